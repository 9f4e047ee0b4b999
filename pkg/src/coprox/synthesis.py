"""Constructive core: paths over the subshift, direction turning,
simultaneous transversality, and the shadowing periodic orbit builder.

A path from x to y is symbolic data (x, x0, n, y) with x0 on the local
unstable set of x and sigma^n x0 on the local stable set of y; its matrix
for a cocycle is  H^s(sigma^n x0 -> y) A^n(x0) H^u(x -> x0), always
recomputed from the symbols.  Two paths meeting at a point concatenate
through a bracket, and the concatenated matrix differs from the plain
product of the two by a holonomy rectangle (an identity the tests verify).

The periodic-orbit builder works against a finite family of cocycles over
a common base with a common certified pair (p, z); exterior powers of a
single cocycle are the default instantiation.  Every existence constant
of the underlying arguments (turn depths, loop lengths, transversality
margins) is replaced by deterministic adaptive search with a posteriori
certification: the products around the constructed orbit are certified
quantitatively proximal directly, member by member.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .cocycle import (
    WindowCocycle,
    exterior_cocycle,
    holonomy_s,
    holonomy_u,
    inverse_cocycle,
    orbit_chi_vec,
    orbit_mu_vec,
    product,
    product_scaled,
)
from .errors import (
    DegenerateTopSingularValue,
    SynthesisFailed,
    TransversalityFailed,
    TurnCapExceeded,
)
from .matnum import (
    ams_hyperplane,
    hyperplane_wedge,
    rho,
    rho_to_hyperplane,
    unit,
)
from .proximal import EpsProximalWitness, eps_proximal_witness
from .sft import (
    PeriodicWord,
    PointSpec,
    Symbols,
    bracket,
    in_local_stable,
    in_local_unstable,
    make_periodic,
    periodic_point,
    point_from_word,
    reverse_point,
    same_point,
    shortest_bridge,
    stable_shift,
    unstable_shift,
)
from .typicality import EigenFrame, eigen_frame


class EndpointMismatch(Exception):
    """Paths being connected do not meet at a common point."""


@dataclass(frozen=True)
class PathSpec:
    """Symbolic path data x -> x0 -> sigma^n x0 -> y (matrices recomputed)."""

    x: PointSpec
    x0: PointSpec
    n: int
    y: PointSpec

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("path length must be >= 0")
        if not in_local_unstable(self.x, self.x0):
            raise ValueError("x0 must lie on the local unstable set of x")
        if not in_local_stable(self.y, self.x0.shift(self.n)):
            raise ValueError("sigma^n x0 must lie on the local stable set of y")

    @property
    def end(self) -> PointSpec:
        return self.x0.shift(self.n)


def path_matrix(A: WindowCocycle, path: PathSpec) -> np.ndarray:
    """H^s(end -> y) A^n(x0) H^u(x -> x0) for the given cocycle."""
    return (
        holonomy_s(A, path.end, path.y)
        @ product(A, path.x0, path.n)
        @ holonomy_u(A, path.x, path.x0)
    )


def path_direction(A: WindowCocycle, path: PathSpec, v: np.ndarray) -> np.ndarray:
    """Unit direction of the path matrix applied to v, overflow-safe for
    long paths (the product is rescaled in flight)."""
    m, _ = product_scaled(A, path.x0, path.n)
    out = holonomy_s(A, path.end, path.y) @ (m @ (holonomy_u(A, path.x, path.x0) @ unit(v)))
    return unit(out)


def connect(path1: PathSpec, path2: PathSpec) -> PathSpec:
    """Concatenate two paths meeting at path1.y == path2.x.

    The new carrier is w = sigma^{-n1} [sigma^{n1} x0_1, x0_2]; per cocycle
    the new matrix equals  B2 R B1  with R the holonomy rectangle through
    the meeting point and sigma^{n1} w.
    """
    if not same_point(path1.y, path2.x):
        raise EndpointMismatch("path1 must end where path2 starts")
    w = bracket(path1.end, path2.x0).shift(-path1.n)
    return PathSpec(path1.x, w, path1.n + path2.n, path2.y)


def extend_at_fixed_target(path: PathSpec, extra: int) -> PathSpec:
    """Lengthen a path ending at a fixed point by iterating the return map."""
    if extra == 0:
        return path
    a = path.y.coord(0)
    if any(path.x0.coord(path.n + i) != a for i in range(extra + 1)):
        raise ValueError("carrier does not stay at the fixed symbol")
    return PathSpec(path.x, path.x0, path.n + extra, path.y)


def loop_path(p: PointSpec, z: PointSpec, ell: int) -> PathSpec:
    """The path p -> z -> sigma^ell z -> p tracing the homoclinic loop.

    Needs z on the local unstable set of p and sigma^ell z on the local
    stable set of p; the matrix is then P^ell psi_z.
    """
    return PathSpec(p, z, ell, p)


def turn_direction(frames: Sequence[EigenFrame], dirs: Sequence[np.ndarray],
                   delta: float, cap: int) -> int:
    """Least a <= cap such that iterating each return map a times brings
    every direction within delta of one of its frame's eigendirections."""
    vecs = [unit(v) for v in dirs]
    for a in range(cap + 1):
        if all(
            min(rho(v, f.vector(i)) for i in range(f.dim)) <= delta
            for f, v in zip(frames, vecs)
        ):
            return a
        vecs = [unit(f.matrix @ v) for f, v in zip(frames, vecs)]
    raise TurnCapExceeded(f"directions not aligned within {delta} after {cap} turns")


@dataclass(frozen=True)
class FamilyContext:
    """A cocycle family with a common certified pair, plus the mirrored data
    (inverse cocycles on the reversed subshift acting on hyperplane wedges)
    used to steer hyperplanes."""

    family: tuple[WindowCocycle, ...]
    p: PointSpec
    z: PointSpec
    frames: tuple[EigenFrame, ...]
    rev_wedge_family: tuple[WindowCocycle, ...]
    rev_frames: tuple[EigenFrame, ...]
    p_rev: PointSpec
    z_rev: PointSpec

    @property
    def excursion_end(self) -> int:
        return stable_shift(self.z, self.p)

    @property
    def rev_excursion_end(self) -> int:
        return stable_shift(self.z_rev, self.p_rev)


def build_family_context(family: Sequence[WindowCocycle], p: PointSpec,
                         z: PointSpec, tol: float = 1e-10) -> FamilyContext:
    family = tuple(family)
    base = family[0].base
    if any(A.base != base for A in family):
        raise ValueError("family members must share one base subshift")
    z_aligned = z.shift(-unstable_shift(p, z))
    frames = tuple(eigen_frame(product(A, p, 1), tol) for A in family)
    rev_wedge = tuple(
        exterior_cocycle(inverse_cocycle(A), A.dim - 1) if A.dim > 1
        else inverse_cocycle(A)
        for A in family
    )
    p_rev = reverse_point(p)
    z_rev = reverse_point(z_aligned)
    z_rev = z_rev.shift(-unstable_shift(p_rev, z_rev))
    rev_frames = tuple(eigen_frame(product(B, p_rev, 1), tol) for B in rev_wedge)
    return FamilyContext(
        family=family,
        p=p,
        z=z_aligned,
        frames=frames,
        rev_wedge_family=rev_wedge,
        rev_frames=rev_frames,
        p_rev=p_rev,
        z_rev=z_rev,
    )


def exterior_family_context(A: WindowCocycle, p: PointSpec, z: PointSpec) -> FamilyContext:
    """Context for the exterior powers t = 1..d-1 of a single cocycle."""
    family = [exterior_cocycle(A, t) for t in range(1, A.dim)]
    return build_family_context(family, p, z)


TURN_CAP = 512


def _entry_path(base, x: PointSpec, p: PointSpec, slack: int) -> PathSpec:
    """Shortest-bridge path from x into the local stable set of p, with
    ``slack`` extra steps at the fixed symbol."""
    a = p.coord(0)
    bridgew = shortest_bridge(base, x.coord(0), a)
    t0 = point_from_word(base, (x.coord(0),) + bridgew + (a,), a)
    w0 = bracket(x, t0)
    n0 = len(bridgew) + 2 + slack
    return PathSpec(x, w0, n0, p)


def _path_to_top(family, frames, base, p, z, exc_end, x, dirs, eps_target,
                 delta, ell) -> Optional[PathSpec]:
    """Path x -> p taking every direction within eps_target of its frame's
    top eigendirection, or None if this (delta, ell) attempt falls short."""
    entry = _entry_path(base, x, p, slack=2)
    u = [path_direction(A, entry, v) for A, v in zip(family, dirs)]
    try:
        a = turn_direction(frames, u, delta, TURN_CAP)
    except TurnCapExceeded:
        return None

    def worst_angle(path):
        return max(
            rho(path_direction(A, path, v), f.vector(0))
            for A, v, f in zip(family, dirs, frames)
        )

    turned = extend_at_fixed_target(entry, a)
    if a == 0 and worst_angle(turned) <= eps_target:
        return turned  # already aligned with the top directions, no twist needed
    cand = connect(turned, loop_path(p, z, max(ell, exc_end + 2)))
    return cand if worst_angle(cand) <= eps_target else None


def _reversed_to_forward(path_rev: PathSpec, p: PointSpec, y: PointSpec) -> PathSpec:
    """Translate a reversed-subshift path rev(y) -> rev(p) into the forward
    path p -> y (member matrices invert under the translation)."""
    y1 = reverse_point(path_rev.x0.shift(path_rev.n))
    return PathSpec(p, y1, path_rev.n, y)


def transversal_path(ctx: FamilyContext, x: PointSpec, y: PointSpec,
                     dirs: Sequence[np.ndarray], normals: Sequence[np.ndarray],
                     attempts: int = 9,
                     margin_floor: float = 1e-7) -> tuple[PathSpec, list[float]]:
    """Path x -> y whose member matrices move each direction away from the
    corresponding hyperplane; margins are computed, never assumed.

    Two turning passes into p: the given directions ride the forward family
    toward the top eigendirections while, on the reversed subshift, the
    hyperplane wedges ride the inverse family toward theirs; bracketing the
    legs at p yields the path and the angular margins are read off
    directly.  The margins are intrinsically exponential in the leg
    lengths (the legs end in long runs of the return map), so the floor
    only guards against genuine degeneracy; deterministic retries sharpen
    the turn targets and lengthen the loops when an attempt falls short.
    """
    if not dirs:
        raise ValueError("empty family")
    eta = min(
        rho_to_hyperplane(f.vector(0), f.hyperplane_normal(0)) for f in ctx.frames
    )
    wedge_dirs = [hyperplane_wedge(nrm) for nrm in normals]
    y_rev = reverse_point(y)
    base = ctx.family[0].base
    rev_base = ctx.rev_wedge_family[0].base
    for k in range(attempts):
        eps = eta / 4.0 / 2**k
        delta = 0.1 / 2**k
        ell = 8 * 2**k
        fwd = _path_to_top(ctx.family, ctx.frames, base, ctx.p, ctx.z,
                           ctx.excursion_end, x, dirs, eps, delta, ell)
        if fwd is None:
            continue
        rev = _path_to_top(ctx.rev_wedge_family, ctx.rev_frames, rev_base,
                           ctx.p_rev, ctx.z_rev, ctx.rev_excursion_end,
                           y_rev, wedge_dirs, eps, delta, ell)
        if rev is None:
            continue
        path = connect(fwd, _reversed_to_forward(rev, ctx.p, y))
        margins = [
            rho_to_hyperplane(path_direction(A, path, v), nrm)
            for A, v, nrm in zip(ctx.family, dirs, normals)
        ]
        if min(margins) >= margin_floor:
            return path, margins
    raise TransversalityFailed(
        f"margins stayed below {margin_floor} after {attempts} attempts"
    )


@dataclass(frozen=True)
class SynthesisReport:
    """Outcome of one shadowing synthesis."""

    x_word: Symbols
    n: int
    q: PeriodicWord
    n_q: int
    j: int
    tau: float
    witnesses: tuple[EpsProximalWitness, ...]
    transversality_margins: tuple[float, ...]
    bound_value: Optional[float]
    ell_used: int
    retries: int
    factorization_residual: float

    def to_dict(self) -> dict:
        return {
            "x_word": "".join(str(c) for c in self.x_word),
            "n": self.n,
            "q": "".join(str(c) for c in self.q.symbols),
            "n_q": self.n_q,
            "j": self.j,
            "tau": self.tau,
            "proximal_all": all(w.verdict for w in self.witnesses),
            "contractions": [w.contraction for w in self.witnesses],
            "transversality_margins": list(self.transversality_margins),
            "bound_value": self.bound_value,
            "ell_used": self.ell_used,
            "retries": self.retries,
            "factorization_residual": self.factorization_residual,
        }


def _shadow_offset(q: PeriodicWord, word: Symbols) -> int:
    n_q = q.period
    for j in range(n_q):
        if all(q.symbols[(j + i) % n_q] == word[i] for i in range(len(word))):
            return j
    raise AssertionError("constructed orbit does not contain the target word")


def _closing_factorization_residual(A: WindowCocycle, qpt: PointSpec,
                                  final: PathSpec) -> float:
    """Relative residual of the closing factorization A^{n_q}(q) = H1 B~ H2
    along the carrier w of the final loop path, with r = [w, q]."""
    w = final.x0
    n_q = final.n
    p = final.y
    w_t = w.shift(n_q)
    r = bracket(w, qpt)
    r_t = r.shift(n_q)
    btilde = path_matrix(A, final)
    h1 = holonomy_s(A, r_t, qpt) @ holonomy_u(A, w_t, r_t) @ holonomy_s(A, p, w_t)
    h2 = holonomy_u(A, r, p) @ holonomy_s(A, qpt, r)
    lhs = product(A, qpt, n_q)
    rhs = h1 @ btilde @ h2
    return float(np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs))


def synthesize_family(ctx: FamilyContext, x_word: Symbols, tau: float, *,
                      ell_cap: int = 2**14, ams_tol: float = 1e-9,
                      period_quantum: int = 16) -> SynthesisReport:
    """Periodic orbit q shadowing x_word whose member products are all
    certified tau-proximal.

    Pipeline: run the word into the stable set of p (the path g); take each
    member's contraction hyperplane from the top singular direction of g;
    build a transversal path from p back to the word's point keeping the
    top eigendirections clear of those hyperplanes; turn; append the
    homoclinic loop with adaptively doubled length; close into a periodic
    word and certify the products around it directly.

    ``period_quantum`` pads the certified loop so the period overhead
    n_q - n lands on a fixed multiple: the overhead plays the role of a
    single per-cocycle constant, so batches report one common value
    instead of per-word jitter (0 disables padding).
    """
    base = ctx.family[0].base
    a = ctx.p.coord(0)
    n = len(x_word)
    x = point_from_word(base, x_word, a)
    # the canonical representative already carries a bridge to the fixed
    # symbol; shortly after time n its orbit sits on the stable set of p
    tail_start = n + len(shortest_bridge(base, x_word[-1], a))
    retries = 0
    g_extra = 0
    while True:
        g_path = PathSpec(x, x, tail_start + 3 + g_extra, ctx.p)
        g_mats = [path_matrix(A, g_path) for A in ctx.family]
        try:
            normals = [ams_hyperplane(g, ams_tol) for g in g_mats]
            break
        except DegenerateTopSingularValue:
            retries += 1
            g_extra = 2 ** retries
            if g_extra > 64:
                raise
    dirs = [f.vector(0) for f in ctx.frames]
    bpath, margins = transversal_path(ctx, ctx.p, x, dirs, normals)
    gb = connect(bpath, g_path)
    u = [path_direction(A, gb, v) for A, v in zip(ctx.family, dirs)]
    a_turn = turn_direction(ctx.frames, u, 0.05, TURN_CAP)
    turned = extend_at_fixed_target(gb, a_turn)

    def attempt(ell):
        final = connect(turned, loop_path(ctx.p, ctx.z, ell))
        n_q = final.n
        q = make_periodic(base, final.x0.coords(0, n_q - 1))
        qpt = periodic_point(q)
        # the witness conditions are scale-invariant, so certify the
        # rescaled products (raw ones can overflow for large ell)
        witnesses = tuple(
            eps_proximal_witness(product_scaled(A, qpt, n_q)[0], tau)
            for A in ctx.family
        )
        return final, q, qpt, witnesses

    ell = max(ctx.excursion_end + 2, 8)
    while ell <= ell_cap:
        final, q, qpt, witnesses = attempt(ell)
        if all(w.verdict for w in witnesses):
            if period_quantum:
                overhang = (final.n - n) % period_quantum
                if overhang:
                    padded = attempt(ell + period_quantum - overhang)
                    if all(w.verdict for w in padded[3]):
                        ell = ell + period_quantum - overhang
                        final, q, qpt, witnesses = padded
            return SynthesisReport(
                x_word=tuple(x_word),
                n=n,
                q=q,
                n_q=final.n,
                j=_shadow_offset(q, tuple(x_word)),
                tau=tau,
                witnesses=witnesses,
                transversality_margins=tuple(margins),
                bound_value=None,
                ell_used=ell,
                retries=retries,
                factorization_residual=_closing_factorization_residual(
                    ctx.family[0], qpt, final
                ),
            )
        retries += 1
        ell *= 2
    raise SynthesisFailed(f"loop length cap {ell_cap} reached without certifying")


def _closure_d1(A: WindowCocycle, x_word: Symbols, base_symbol: int) -> SynthesisReport:
    """Scalar cocycles: close the word through a shortest bridge; every
    nonzero scalar is proximal, so certification is vacuous."""
    base = A.base
    u = shortest_bridge(base, x_word[-1], x_word[0])
    q = make_periodic(base, tuple(x_word) + u)
    n = len(x_word)
    x = point_from_word(base, x_word, base_symbol)
    bound = abs(
        float(orbit_mu_vec(A, x, n)[0]
              - orbit_chi_vec(A, periodic_point(q), q.period)[0])
    )
    return SynthesisReport(
        x_word=tuple(x_word),
        n=n,
        q=q,
        n_q=q.period,
        j=0,
        tau=0.0,
        witnesses=(),
        transversality_margins=(),
        bound_value=bound,
        ell_used=0,
        retries=0,
        factorization_residual=0.0,
    )


def build_proximal_periodic(A: WindowCocycle, cert, x_word: Symbols, tau: float,
                            *, ell_cap: int = 2**14) -> SynthesisReport:
    """Shadowing periodic orbit for a typical cocycle with every exterior
    power of the closing product certified tau-proximal; ``cert`` must be a
    passing typicality certificate (its pair steers the construction)."""
    if len(x_word) < 1:
        raise ValueError("x_word must be nonempty")
    if A.dim == 1:
        sym = cert.p.coord(0) if cert is not None else A.base.fixed_symbols()[0]
        return _closure_d1(A, tuple(x_word), sym)
    if cert is None or not cert.passed:
        raise ValueError("a passing typicality certificate is required")
    ctx = exterior_family_context(A, cert.p, cert.z)
    report = synthesize_family(ctx, tuple(x_word), tau, ell_cap=ell_cap)
    x = point_from_word(A.base, tuple(x_word), cert.p.coord(0))
    qpt = periodic_point(report.q)
    bound = float(
        np.linalg.norm(
            orbit_mu_vec(A, x, report.n) - orbit_chi_vec(A, qpt, report.n_q)
        )
    )
    return replace(report, bound_value=bound)


@dataclass(frozen=True)
class TheoremAReport:
    """Aggregated singular-vs-eigenvalue comparison across sampled words."""

    samples: tuple[SynthesisReport, ...]
    failures: tuple[tuple[Symbols, str], ...]
    empirical_c: float
    empirical_k: int
    slope: float
    intercept: float

    def to_dict(self) -> dict:
        return {
            "num_samples": len(self.samples) + len(self.failures),
            "num_failures": len(self.failures),
            "empirical_c": self.empirical_c,
            "empirical_k": self.empirical_k,
            "slope": self.slope,
            "intercept": self.intercept,
            "samples": [r.to_dict() for r in self.samples],
            "failures": [
                {"x_word": "".join(str(c) for c in w), "error": msg}
                for w, msg in self.failures
            ],
        }


def verify_theorem_a(A: WindowCocycle, cert, words: Sequence[Symbols], tau: float,
                     *, ell_cap: int = 2**14) -> TheoremAReport:
    """Run the builder on each word and aggregate the bound values.

    ``empirical_c`` is the largest observed norm difference, ``empirical_k``
    the largest period overhead; the least-squares slope of bound against
    word length is the drift diagnostic (flat means the bound is length-free).
    """
    reports = []
    failures = []
    for w in words:
        try:
            reports.append(build_proximal_periodic(A, cert, tuple(w), tau,
                                                   ell_cap=ell_cap))
        except (SynthesisFailed, TransversalityFailed) as exc:
            failures.append((tuple(w), str(exc)))
    if not reports:
        raise SynthesisFailed("every sample failed")
    ns = np.array([r.n for r in reports], dtype=float)
    bounds = np.array([r.bound_value for r in reports])
    if len(reports) > 1 and np.ptp(ns) > 0:
        slope, intercept = np.polyfit(ns, bounds, 1)
    else:
        slope, intercept = 0.0, float(bounds.mean())
    return TheoremAReport(
        samples=tuple(reports),
        failures=tuple(failures),
        empirical_c=float(bounds.max()),
        empirical_k=int(max(r.n_q - r.n for r in reports)),
        slope=float(slope),
        intercept=float(intercept),
    )
