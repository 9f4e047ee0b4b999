"""Pinching/twisting certification of cocycles at a fixed point p and a
homoclinic point z, for every exterior power with the common pair.

Pinching asks the return map P at p for simple eigenvalues of distinct
moduli; twisting asks the holonomy loop psi_z to put every collection
{psi v_i : i in I} u {v_j : j in J} with |I| + |J| <= d in general
position.  Margins are the minimal log-modulus gap and the minimal
smallest singular value of the unit-column test matrices; a certificate
passes when every margin exceeds the tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .cocycle import WindowCocycle, holonomy_loop, product
from .errors import NoFixedSymbol, NotFixedPoint, NotHomoclinic
from .matnum import exterior_power, unit
from .sft import (
    PointSpec,
    fixed_point,
    homoclinic_point,
    is_fixed_point,
    same_point,
    stable_shift,
    unstable_shift,
)

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class EigenFrame:
    """Real eigendata of a pinched matrix, sorted by decreasing modulus.

    ``vectors`` holds unit eigenvectors as columns; ``dual`` holds the dual
    basis as rows, so row i is (up to scale) the normal of the invariant
    hyperplane spanned by all eigenvectors except the i-th.
    """

    matrix: np.ndarray
    eigvals: np.ndarray
    vectors: np.ndarray
    dual: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigvals)

    def vector(self, i: int) -> np.ndarray:
        return self.vectors[:, i]

    def hyperplane_normal(self, i: int) -> np.ndarray:
        """Unit normal of span{v_j : j != i}."""
        return unit(self.dual[i])


def pinching_margin(P: np.ndarray) -> float:
    """Min gap of consecutive log eigenvalue moduli; 0 for complex pairs."""
    moduli = np.sort(np.abs(np.linalg.eigvals(P)))[::-1]
    if len(moduli) == 1:
        return np.inf
    return float(np.min(np.diff(-np.log(moduli))))


def eigen_frame(P: np.ndarray, tol: float = DEFAULT_TOL) -> EigenFrame:
    """Eigenframe of a matrix whose pinching margin exceeds tol.

    Distinct moduli force all eigenvalues real (complex pairs share a
    modulus), so the frame is real; eigenvectors get a deterministic sign.
    """
    if pinching_margin(P) <= tol:
        raise ValueError("matrix is not pinched at this tolerance")
    vals, vecs = np.linalg.eig(P)
    order = np.argsort(-np.abs(vals))
    vals = vals[order].real
    vecs = vecs[:, order]
    out = np.empty_like(vecs, dtype=float)
    for i in range(vecs.shape[1]):
        col = vecs[:, i]
        lead = col[np.argmax(np.abs(col))]
        col = (col / (lead / abs(lead))).real
        col = col / np.linalg.norm(col)
        j = np.argmax(np.abs(col))
        if col[j] < 0:
            col = -col
        out[:, i] = col
    dual = np.linalg.inv(out)
    return EigenFrame(np.asarray(P, dtype=float), vals, out, dual)


def _index_pairs(d: int):
    for i_size in range(d + 1):
        for j_size in range(d + 1 - i_size):
            if i_size + j_size == 0:
                continue
            for I in combinations(range(d), i_size):
                for J in combinations(range(d), j_size):
                    yield I, J


def _pair_index_sets(d: int):
    # {psi v_i} u {v_k : k != j}: the collections the turning constructions
    # actually consume (psi v_i clear of every invariant hyperplane)
    for i in range(d):
        for j in range(d):
            yield (i,), tuple(k for k in range(d) if k != j)


def twisting_margin(psi: np.ndarray, frame: EigenFrame,
                    collections: str = "all") -> float:
    """Min over index collections of the smallest singular value of the
    unit-column test matrix {psi v_i : i in I} u {v_j : j in J}.

    ``collections="all"`` takes every I, J with 1 <= |I| + |J| <= d.  For
    eigenframes of exterior powers in base dimension >= 4 that set always
    contains structurally dependent collections (the wedge families
    psi(v ^ v_j) and v ^ v_j share the direction psi(v) ^ v regardless of
    psi), so the full margin is identically zero there;
    ``collections="pairs"`` restricts to the satisfiable pair conditions
    (|I| = 1, |J| = d - 1), which is what the path constructions consume.
    """
    d = frame.dim
    psi_v = np.column_stack([unit(psi @ frame.vector(i)) for i in range(d)])
    index_sets = _index_pairs(d) if collections == "all" else _pair_index_sets(d)
    worst = np.inf
    for I, J in index_sets:
        cols = [psi_v[:, i] for i in I] + [frame.vector(j) for j in J]
        m = np.column_stack(cols)
        smin = np.linalg.svd(m, compute_uv=False)[-1]
        worst = min(worst, float(smin))
    return worst


@dataclass(frozen=True)
class MemberCheck:
    label: str
    pinch_margin: float
    twist_margin: Optional[float]  # None when pinching already failed

    def passed(self, tol: float) -> bool:
        return (
            self.pinch_margin > tol
            and self.twist_margin is not None
            and self.twist_margin > tol
        )


@dataclass(frozen=True)
class TypicalityCertificate:
    """Margins for every checked family member with the common pair (p, z)."""

    p: PointSpec
    z: PointSpec
    per_member: tuple[MemberCheck, ...]
    tol: float

    @property
    def passed(self) -> bool:
        return all(m.passed(self.tol) for m in self.per_member)

    def to_dict(self) -> dict:
        return {
            "passed": bool(self.passed),
            "tol": self.tol,
            "p_symbol": self.p.coord(0),
            "z_window": "".join(str(c) for c in self.z.coords(-2, 12)),
            "members": [
                {
                    "label": m.label,
                    "pinch_margin": m.pinch_margin,
                    "twist_margin": m.twist_margin,
                }
                for m in self.per_member
            ],
        }


def _require_pair(A: WindowCocycle, p: PointSpec, z: PointSpec) -> None:
    if not is_fixed_point(p):
        raise NotFixedPoint(
            "p must be a fixed point of the shift; reduce periodic p by "
            "passing to the power cocycle first"
        )
    if same_point(p, z):
        raise NotHomoclinic("z equals p")
    if stable_shift(z, p) is None or unstable_shift(p, z) is None:
        raise NotHomoclinic("z is not homoclinic to p")


def check_members(members: Sequence[tuple[str, np.ndarray, np.ndarray, str]],
                  tol: float) -> tuple[MemberCheck, ...]:
    """Pinch/twist margins for (label, P, psi, collections) tuples."""
    out = []
    for label, P, psi, collections in members:
        pinch = pinching_margin(P)
        if pinch <= tol:
            out.append(MemberCheck(label, pinch, None))
            continue
        frame = eigen_frame(P, tol)
        out.append(MemberCheck(label, pinch,
                               twisting_margin(psi, frame, collections)))
    return tuple(out)


def typicality_check(A: WindowCocycle, p: PointSpec, z: PointSpec,
                     tol: float = DEFAULT_TOL,
                     exterior_collections: str = "all") -> TypicalityCertificate:
    """Certify pinching and twisting of every exterior power t = 1..d-1
    with the same pair (p, z).

    ``exterior_collections`` selects the index collections checked on the
    powers t >= 2 ("all" or "pairs"); the base level t = 1 always checks
    the full set.  The full set is unsatisfiable for base dimension >= 4
    (see :func:`twisting_margin`), so d >= 4 certification must use
    "pairs".
    """
    _require_pair(A, p, z)
    P = product(A, p, 1)
    psi = holonomy_loop(A, p, z)
    members = [
        (f"t={t}", exterior_power(P, t), exterior_power(psi, t),
         "all" if t == 1 else exterior_collections)
        for t in range(1, A.dim)
    ]
    return TypicalityCertificate(p, z, check_members(members, tol), tol)


def family_certificate(cocycles: Sequence[WindowCocycle], p: PointSpec, z: PointSpec,
                       tol: float = DEFAULT_TOL) -> TypicalityCertificate:
    """Certify that every cocycle in the family is 1-typical for the common pair."""
    for A in cocycles:
        _require_pair(A, p, z)
    members = []
    for i, A in enumerate(cocycles):
        members.append((f"member{i}", product(A, p, 1), holonomy_loop(A, p, z),
                        "all"))
    return TypicalityCertificate(p, z, check_members(members, tol), tol)


def _excursions(s, a: int, length: int):
    """Admissible excursions u (a.u.a admissible, u != a^len), lexicographic."""
    word = [0] * length

    def extend(pos: int):
        if pos == length:
            if s.allowed(word[-1], a) and any(c != a for c in word):
                yield tuple(word)
            return
        prev = a if pos == 0 else word[pos - 1]
        for c in range(s.alphabet_size):
            if s.allowed(prev, c):
                word[pos] = c
                yield from extend(pos + 1)

    yield from extend(0)


def find_typical_pair(A: WindowCocycle, max_excursion_len: int = 6,
                      tol: float = DEFAULT_TOL,
                      exterior_collections: str = "all"):
    """Deterministic scan for a passing pair: fixed symbols in order, then
    excursion words by length and lexicographic order.

    Returns (p, z, certificate) for the first passing pair, or None.
    """
    symbols = A.base.fixed_symbols()
    if not symbols:
        raise NoFixedSymbol("no symbol a with T[a][a] = 1")
    for a in symbols:
        p = fixed_point(A.base, a)
        for length in range(1, max_excursion_len + 1):
            for exc in _excursions(A.base, a, length):
                z = homoclinic_point(A.base, a, exc)
                cert = typicality_check(A, p, z, tol, exterior_collections)
                if cert.passed:
                    return p, z, cert
    return None
