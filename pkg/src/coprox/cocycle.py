"""Finite-window matrix cocycles and their exact canonical holonomies.

A window cocycle assigns an invertible d x d matrix to every admissible
window of 2k+1 symbols; the matrix at a point reads coordinates -k..k.
For such cocycles the stable/unstable holonomy limits stabilize after
exactly k steps (all further factors coincide on a common leaf), so
holonomies here are *exact* finite products.  Fiber-bunching is therefore
not needed for existence and is only reported as a diagnostic.

Also provides the time-reversed (inverse) cocycle over the transposed
subshift, exterior-power cocycles, and a vectorized kernel for products
over many cylinder words at canonical representative points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import (
    InputFormatError,
    NotHomoclinic,
    NotOnGlobalLeaf,
    NotOnLocalLeaf,
    SymbolMismatch,
)
from .matnum import exterior_power, require_invertible
from .sft import (
    PointSpec,
    Sft,
    Symbols,
    bracket,
    enumerate_words,
    in_local_stable,
    in_local_unstable,
    is_fixed_point,
    reverse_sft,
    same_point,
    shortest_bridge,
    stable_shift,
    unstable_shift,
)


@dataclass(frozen=True)
class WindowCocycle:
    """Map from admissible (2*radius+1)-windows to invertible matrices."""

    base: Sft
    dim: int
    radius: int
    table: Mapping[Symbols, np.ndarray]

    def __post_init__(self):
        expected = set(enumerate_words(self.base, 2 * self.radius + 1))
        got = set(self.table)
        if got != expected:
            missing = sorted(expected - got)[:3]
            extra = sorted(got - expected)[:3]
            raise ValueError(
                f"table keys must be exactly the admissible windows "
                f"(missing {missing}, extra {extra})"
            )
        frozen = {}
        for w, m in self.table.items():
            m = require_invertible(np.asarray(m, dtype=float))
            if m.shape != (self.dim, self.dim):
                raise ValueError(f"matrix for window {w} has shape {m.shape}")
            m.setflags(write=False)
            frozen[w] = m
        object.__setattr__(self, "table", frozen)

    def window_at(self, x: PointSpec, j: int = 0) -> Symbols:
        k = self.radius
        return x.coords(j - k, j + k)

    def at(self, x: PointSpec, j: int = 0) -> np.ndarray:
        """Matrix applied at the j-th step along the orbit of x."""
        return self.table[self.window_at(x, j)]


def product(A: WindowCocycle, x: PointSpec, n: int) -> np.ndarray:
    """Cocycle product along the orbit: A(s^{n-1}x) ... A(x) for n >= 0.

    Negative n returns the inverse of the product along the pulled-back
    orbit, so the cocycle equation holds for all integer times.
    """
    d = A.dim
    if n == 0:
        return np.eye(d)
    if n < 0:
        return np.linalg.inv(product(A, x.shift(n), -n))
    out = np.eye(d)
    for j in range(n):
        out = A.at(x, j) @ out
    return out


def product_scaled(A: WindowCocycle, x: PointSpec, n: int) -> tuple[np.ndarray, float]:
    """(M, s) with the cocycle product equal to e^s M and M kept at unit
    max-entry; safe for orbit lengths whose raw product would overflow."""
    d = A.dim
    out = np.eye(d)
    logscale = 0.0
    if n < 0:
        m, s = product_scaled(A, x.shift(n), -n)
        inv = np.linalg.inv(m)
        peak = np.max(np.abs(inv))
        return inv / peak, float(np.log(peak)) - s
    for j in range(n):
        out = A.at(x, j) @ out
        peak = np.max(np.abs(out))
        out = out / peak
        logscale += float(np.log(peak))
    return out, logscale


def orbit_mu_vec(A: WindowCocycle, x: PointSpec, n: int) -> np.ndarray:
    """Log singular values of the product along the orbit, any length.

    Each exterior power of the product is accumulated as a product of the
    exterior-power cocycle with running rescaling, so every ladder rung is
    a top quantity of an accurately represented matrix; the last rung is
    the exact sum of per-factor log determinants.
    """
    if n < 0:
        raise ValueError("orbit spectral ladders need n >= 0")
    d = A.dim
    logs = np.empty(d)
    prev = 0.0
    for t in range(1, d):
        m, s = product_scaled(exterior_cocycle(A, t), x, n)
        cur = s + float(np.log(np.linalg.norm(m, 2)))
        logs[t - 1] = cur - prev
        prev = cur
    logs[d - 1] = _orbit_logdet(A, x, n) - prev
    return logs


def orbit_chi_vec(A: WindowCocycle, x: PointSpec, n: int) -> np.ndarray:
    """Log eigenvalue moduli of the product along the orbit, any length."""
    if n < 0:
        raise ValueError("orbit spectral ladders need n >= 0")
    d = A.dim
    logs = np.empty(d)
    prev = 0.0
    for t in range(1, d):
        m, s = product_scaled(exterior_cocycle(A, t), x, n)
        cur = s + float(np.log(np.max(np.abs(np.linalg.eigvals(m)))))
        logs[t - 1] = cur - prev
        prev = cur
    logs[d - 1] = _orbit_logdet(A, x, n) - prev
    return logs


def _orbit_logdet(A: WindowCocycle, x: PointSpec, n: int) -> float:
    """Sum of per-factor log |det|: the determinant rung, exactly."""
    return float(sum(np.linalg.slogdet(A.at(x, j))[1] for j in range(n)))


def holonomy_s(A: WindowCocycle, x: PointSpec, y: PointSpec,
               steps: Optional[int] = None) -> np.ndarray:
    """Local stable holonomy from x to y (coordinates agree for i >= 0).

    Exact at steps = radius; larger values reproduce the same matrix.
    """
    if not in_local_stable(x, y):
        raise NotOnLocalLeaf("y is not in the local stable set of x")
    m = A.radius if steps is None else steps
    return np.linalg.inv(product(A, y, m)) @ product(A, x, m)


def holonomy_u(A: WindowCocycle, x: PointSpec, y: PointSpec,
               steps: Optional[int] = None) -> np.ndarray:
    """Local unstable holonomy from x to y (coordinates agree for i <= 0)."""
    if not in_local_unstable(x, y):
        raise NotOnLocalLeaf("y is not in the local unstable set of x")
    m = A.radius if steps is None else steps
    return np.linalg.inv(product(A, y, -m)) @ product(A, x, -m)


def global_holonomy_s(A: WindowCocycle, x: PointSpec, y: PointSpec,
                      ell: Optional[int] = None) -> np.ndarray:
    """Stable holonomy extended along orbits: A^l(y)^-1 H^s(s^l x, s^l y) A^l(x).

    ``ell`` defaults to the least shift putting the pair on a local leaf;
    the value is independent of any valid choice.
    """
    if ell is None:
        ell = stable_shift(x, y)
        if ell is None:
            raise NotOnGlobalLeaf("points are not on a common stable set")
    local = holonomy_s(A, x.shift(ell), y.shift(ell))
    return np.linalg.inv(product(A, y, ell)) @ local @ product(A, x, ell)


def global_holonomy_u(A: WindowCocycle, x: PointSpec, y: PointSpec,
                      ell: Optional[int] = None) -> np.ndarray:
    """Unstable holonomy extended along backward orbits."""
    if ell is None:
        ell = unstable_shift(x, y)
        if ell is None:
            raise NotOnGlobalLeaf("points are not on a common unstable set")
    local = holonomy_u(A, x.shift(-ell), y.shift(-ell))
    return product(A, y.shift(-ell), ell) @ local @ np.linalg.inv(product(A, x.shift(-ell), ell))


def holonomy_loop(A: WindowCocycle, p: PointSpec, z: PointSpec) -> np.ndarray:
    """Holonomy loop psi_z = H^s(z -> p) o H^u(p -> z) around a homoclinic z.

    Requires p to be a fixed point and z to approach p both forward and
    backward in time (z eventually-p on both sides, z != p).  z may sit at
    any position along its orbit; the required global holonomies are found
    automatically.
    """
    if not is_fixed_point(p):
        raise NotHomoclinic("p must be a fixed point of the shift")
    if same_point(p, z):
        raise NotHomoclinic("z equals p")
    if stable_shift(z, p) is None or unstable_shift(p, z) is None:
        raise NotHomoclinic("z is not homoclinic to p")
    return global_holonomy_s(A, z, p) @ global_holonomy_u(A, p, z)


def rectangle(A: WindowCocycle, p: PointSpec, q: PointSpec) -> np.ndarray:
    """Four-holonomy rectangle through p and q (requires p0 = q0).

    Composition p -> [q,p] -> q -> [p,q] -> p of alternating local stable
    and unstable holonomies; identity when q = p and, for window cocycles,
    approaches the identity as q -> p.
    """
    if p.coord(0) != q.coord(0):
        raise SymbolMismatch("rectangle needs matching zeroth symbols")
    pq = bracket(p, q)
    qp = bracket(q, p)
    return (
        holonomy_u(A, pq, p)
        @ holonomy_s(A, q, pq)
        @ holonomy_u(A, qp, q)
        @ holonomy_s(A, p, qp)
    )


def fiber_bunching_margin(A: WindowCocycle) -> float:
    """max over windows of |A| |A^-1| / 2; < 1 means fiber-bunched (alpha = 1).

    Diagnostic only: window cocycles have exact holonomies regardless.
    """
    worst = 0.0
    for m in A.table.values():
        worst = max(worst, np.linalg.norm(m, 2) * np.linalg.norm(np.linalg.inv(m), 2) * 0.5)
    return worst


def distortion_residual(A: WindowCocycle, x: PointSpec, y: PointSpec, n: int) -> float:
    """Relative error of the four-holonomy distortion identity on [x]_n.

    With z = [x, y]:
    A^n(x) = H^u(s^n z -> s^n x) H^s(s^n y -> s^n z) A^n(y) H^s(z -> y) H^u(x -> z).
    """
    if any(x.coord(i) != y.coord(i) for i in range(n)):
        raise ValueError("y must agree with x on coordinates 0..n-1")
    z = bracket(x, y)
    lhs = product(A, x, n)
    rhs = (
        global_holonomy_u(A, z.shift(n), x.shift(n))
        @ holonomy_s(A, y.shift(n), z.shift(n))
        @ product(A, y, n)
        @ holonomy_s(A, z, y)
        @ holonomy_u(A, x, z)
    )
    return float(np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs))


def inverse_cocycle(A: WindowCocycle) -> WindowCocycle:
    """The time-reversed cocycle as a window cocycle over the transposed shift.

    Windows reverse, matrices invert; a point x corresponds to the reversed
    point with coordinates x_{-1-i}, under which products satisfy
    product(inverse, reversed x, n) = product(A, x, -n).
    """
    rev = reverse_sft(A.base)
    table = {
        w: np.linalg.inv(A.table[tuple(reversed(w))])
        for w in enumerate_words(rev, 2 * A.radius + 1)
    }
    return WindowCocycle(rev, A.dim, A.radius, table)


def exterior_cocycle(A: WindowCocycle, t: int) -> WindowCocycle:
    """Cocycle of t-th exterior powers over the same base."""
    from math import comb

    table = {w: exterior_power(m, t) for w, m in A.table.items()}
    return WindowCocycle(A.base, comb(A.dim, t), A.radius, table)


def scaled_cocycle(A: WindowCocycle, log_factor: float) -> WindowCocycle:
    """Cocycle with every window matrix multiplied by exp(log_factor)."""
    factor = float(np.exp(log_factor))
    table = {w: factor * m for w, m in A.table.items()}
    return WindowCocycle(A.base, A.dim, A.radius, table)


# ---------------------------------------------------------------------------
# batched products over cylinder words at canonical representatives
# ---------------------------------------------------------------------------


def _padded_symbols(A: WindowCocycle, word: Symbols, base_symbol: int) -> Symbols:
    """Symbols at coordinates -k..n-1+k of the canonical representative."""
    k = A.radius
    if k == 0:
        return word
    s = A.base
    left = shortest_bridge(s, base_symbol, word[0])
    right = shortest_bridge(s, word[-1], base_symbol)
    lpad = ((base_symbol,) * k + left)[-k:]
    rpad = (right + (base_symbol,) * k)[:k]
    return lpad + word + rpad


def _window_indices(A: WindowCocycle, words: np.ndarray, base_symbol: int):
    """(sorted windows, index array of shape (num words, word length)).

    Fully vectorized: the canonical pads depend only on each word's first
    and last symbol, and lexicographic window order equals numeric order
    of the base-q window codes.
    """
    words = np.asarray(words, dtype=np.int64)
    n_words, n = words.shape
    q = A.base.alphabet_size
    k = A.radius
    width = 2 * k + 1
    windows = sorted(A.table)
    if k == 0:
        padded = words
    else:
        s = A.base
        lpads = np.stack([
            np.array((((base_symbol,) * k) + shortest_bridge(s, base_symbol, c))[-k:])
            for c in range(q)
        ])
        rpads = np.stack([
            np.array((shortest_bridge(s, c, base_symbol) +

                      ((base_symbol,) * k))[:k])
            for c in range(q)
        ])
        padded = np.concatenate(
            [lpads[words[:, 0]], words, rpads[words[:, -1]]], axis=1)
    codes = np.zeros((n_words, n), dtype=np.int64)
    for o in range(width):
        codes = codes * q + padded[:, o:o + n]
    lookup = np.full(q**width, -1, dtype=np.int64)
    for i, w in enumerate(windows):
        code = 0
        for c in w:
            code = code * q + c
        lookup[code] = i
    idx = lookup[codes]
    if np.any(idx < 0):
        raise AssertionError("inadmissible window produced by padding")
    return windows, idx


def _chunk_products(args):
    mats, idx = args
    n_words, n_pos = idx.shape
    out = np.broadcast_to(np.eye(mats.shape[1]), (n_words,) + mats.shape[1:]).copy()
    logscale = np.zeros(n_words)
    for pos in range(n_pos):
        out = mats[idx[:, pos]] @ out
        peak = np.max(np.abs(out), axis=(1, 2))
        out /= peak[:, None, None]
        logscale += np.log(peak)
    return out, logscale


def _pooled_chunks(mats, idx, workers: int):
    if workers <= 1 or idx.shape[0] < 4 * workers:
        return [_chunk_products((mats, idx))]
    import multiprocessing as mp

    chunks = np.array_split(idx, workers)
    ctx = mp.get_context("fork")
    with ctx.Pool(workers, initializer=_pin_worker_blas) as pool:
        return pool.map(_chunk_products, [(mats, c) for c in chunks])


def batch_products(A: WindowCocycle, words: Sequence[Symbols], base_symbol: int,
                   workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Stacked rescaled products over the given equal-length words at their
    canonical representatives: (M, s) with the i-th product e^{s_i} M_i.

    Deterministic: results are independent of ``workers`` (chunks merge
    back in input order, each word's arithmetic is self-contained).
    """
    if len(words) == 0:
        return np.empty((0, A.dim, A.dim)), np.empty(0)
    words = np.asarray(words, dtype=np.int64)
    windows, idx = _window_indices(A, words, base_symbol)
    mats = np.stack([A.table[w] for w in windows])
    parts = _pooled_chunks(mats, idx, workers)
    return (
        np.concatenate([p[0] for p in parts]),
        np.concatenate([p[1] for p in parts]),
    )


def _pin_worker_blas():
    """Pool initializer: one BLAS thread per worker so processes do not
    oversubscribe the cores (results are unaffected)."""
    try:
        from threadpoolctl import threadpool_limits

        threadpool_limits(limits=1)
    except ImportError:
        pass


def _log_singular_chunk(args) -> np.ndarray:
    """Full ladder for one chunk of words (self-contained per word, so
    chunking cannot change any result)."""
    A, words, base_symbol = args
    words = np.asarray(words, dtype=np.int64)
    d = A.dim
    windows, idx = _window_indices(A, words, base_symbol)
    logdets = np.array([np.linalg.slogdet(A.table[w])[1] for w in windows])
    rung_det = logdets[idx].sum(axis=1)
    if d == 1:
        return rung_det[:, None]
    out = np.empty((len(words), d))
    prev = np.zeros(len(words))
    for t in range(1, d):
        At = exterior_cocycle(A, t) if t > 1 else A
        mats = np.stack([At.table[w] for w in windows])
        prods, scales = _chunk_products((mats, idx))
        rung = scales + np.log(np.linalg.svd(prods, compute_uv=False)[:, 0])
        out[:, t - 1] = rung - prev
        prev = rung
    out[:, d - 1] = rung_det - prev
    return out


def batch_log_singular(A: WindowCocycle, words: Sequence[Symbols], base_symbol: int,
                       workers: int = 1) -> np.ndarray:
    """Log singular values (rows nonincreasing) of the word products.

    Every ladder rung is the top norm of a batched exterior-power product
    (rescaled in flight), and the determinant rung is the exact sum of
    per-window log determinants, so small singular values stay accurate
    for long words.  With workers > 1 the words are processed in parallel
    chunks and merged back in order; results are worker-count independent.
    """
    if len(words) == 0:
        return np.empty((0, A.dim))
    words = np.asarray(words, dtype=np.int64)
    if workers <= 1 or len(words) < 4 * workers:
        return _log_singular_chunk((A, words, base_symbol))
    import multiprocessing as mp

    bounds = np.linspace(0, len(words), workers + 1).astype(int)
    chunks = [words[a:b] for a, b in zip(bounds, bounds[1:]) if b > a]
    ctx = mp.get_context("fork")
    with ctx.Pool(len(chunks), initializer=_pin_worker_blas) as pool:
        parts = pool.map(_log_singular_chunk,
                         [(A, c, base_symbol) for c in chunks])
    return np.concatenate(parts)


# ---------------------------------------------------------------------------
# cocycle file format
# ---------------------------------------------------------------------------

COCYCLE_SCHEMA = "coprox/cocycle/1"


def cocycle_to_dict(A: WindowCocycle) -> dict:
    return {
        "schema": COCYCLE_SCHEMA,
        "alphabet": A.base.alphabet_size,
        "adjacency": [list(row) for row in A.base.adjacency],
        "dim": A.dim,
        "radius": A.radius,
        "entries": [
            {"window": "".join(str(c) for c in w), "matrix": m.tolist()}
            for w, m in sorted(A.table.items())
        ],
    }


def cocycle_from_dict(data: dict) -> WindowCocycle:
    try:
        q = int(data["alphabet"])
        adjacency = data["adjacency"]
        dim = int(data["dim"])
        radius = int(data["radius"])
        entries = data["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputFormatError(f"cocycle file missing or malformed field: {exc}") from exc
    if q > 10:
        raise InputFormatError("digit window strings support alphabets up to 10")
    try:
        base = Sft.from_matrix(adjacency)
    except ValueError as exc:
        raise InputFormatError(f"adjacency: {exc}") from exc
    if base.alphabet_size != q:
        raise InputFormatError("alphabet size does not match adjacency shape")
    table = {}
    for i, entry in enumerate(entries):
        try:
            window = tuple(int(c) for c in entry["window"])
            matrix = np.asarray(entry["matrix"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputFormatError(f"entries[{i}]: {exc}") from exc
        if len(window) != 2 * radius + 1:
            raise InputFormatError(f"entries[{i}]: window length != 2*radius+1")
        table[window] = matrix
    try:
        return WindowCocycle(base, dim, radius, table)
    except ValueError as exc:
        raise InputFormatError(str(exc)) from exc


def save_cocycle(A: WindowCocycle, path) -> None:
    import json

    with open(path, "w") as fh:
        json.dump(cocycle_to_dict(A), fh, indent=1)


def load_cocycle(path) -> WindowCocycle:
    import json

    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputFormatError(f"not valid JSON: {exc}") from exc
    return cocycle_from_dict(data)
