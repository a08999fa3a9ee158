"""Cell-sum quadrature for nonlocal curvature and perimeter.

All integrals are finite sums over voxels with the kernel sampled at cell
centers.  Kernel samples are stored as integers (``round(mu/mu_max * 2**K)``,
exact for the ball indicator) and every sum is carried out in integer
arithmetic before a single final scaling.  Consequences:

* results do not depend on summation order or thread count;
* identities that hold for finite sums (translation/reflection
  equivariance, the translation decomposition of the perimeter) hold
  exactly, not just to rounding;
* FFT correlation can be used for whole-grid fields, rounded back to the
  exact integers and checked.

The discrete kernel is normalised so that its cell sum equals the exact
``total_mass`` of the continuum kernel; hence ``H = +total_mass`` far from
the set and ``-total_mass`` deep inside it.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import signal

from .kernel import RadialKernel
from .setrep import VoxelSet, relative_complements

__all__ = [
    "Stencil",
    "stencil",
    "CurvatureEvaluator",
    "CurvatureField",
    "curvature_at",
    "perimeter",
    "perimeter_decomposition",
    "Decomposition",
    "curvature_modulus",
    "boundary_curvature",
]

# integer weights are kept below 2**_WEIGHT_BITS so that single-point sums stay
# far inside the exact float64 integer range even after FFT round-off
_WEIGHT_BITS = 30
_SUM_BITS = 44


@dataclass(frozen=True)
class Stencil:
    """Integer kernel samples around a point with fractional cell offset ``shift``.

    ``weights[a]`` multiplies the cell at integer offset ``lo + a`` from the
    base cell.  One integer count is worth ``unit`` in kernel-mass units.
    """

    weights: np.ndarray
    lo: np.ndarray
    total: int
    unit: float
    shift: tuple

    @property
    def radius_cells(self) -> int:
        return -int(self.lo[0])


def _bits(kernel: RadialKernel, h: float, partial: bool = False) -> int:
    if kernel.family.value == "charball" and not partial:
        return 0
    m = math.ceil(kernel.r / h)
    cells = (2 * m + 2) ** kernel.dim
    return max(8, min(_WEIGHT_BITS, _SUM_BITS - math.ceil(math.log2(cells))))


@lru_cache(maxsize=64)
def _stencil_cached(kernel: RadialKernel, h: float, shift: tuple, partial: bool) -> Stencil:
    n = kernel.dim
    m = math.ceil(kernel.r / h)
    offs = np.arange(-m, m + 2, dtype=float)
    axes = [(offs - s) * h for s in shift]
    grids = np.meshgrid(*axes, indexing="ij")
    if not partial:
        rho = np.sqrt(sum(g * g for g in grids))
        vals = kernel.profile(rho)
    else:
        sub = (np.arange(3) - 1.0) * (h / 3.0)
        vals = np.zeros(grids[0].shape)
        for corner in np.ndindex(*(3,) * n):
            rho = np.sqrt(sum((g + sub[c]) ** 2 for g, c in zip(grids, corner)))
            vals += kernel.profile(rho)
        vals /= 3**n
    peak = float(kernel.profile(0.0))
    q = np.rint(vals / peak * 2.0 ** _bits(kernel, h, partial))
    q.flags.writeable = False
    total = int(q.sum())
    unit = kernel.total_mass() / total
    return Stencil(q, np.full(n, -m), total, unit, shift)


def stencil(kernel: RadialKernel, h: float, shift=None, partial: bool = False) -> Stencil:
    """Kernel stencil for points at ``base cell center + shift*h`` (``0 <= shift < 1``)."""
    if shift is None:
        shift = (0.0,) * kernel.dim
    shift = tuple(float(s) for s in shift)
    return _stencil_cached(kernel, float(h), shift, bool(partial))


def _check_dim(A: VoxelSet, kernel: RadialKernel):
    if A.dim != kernel.dim:
        raise ValueError(f"set is {A.dim}D but kernel is {kernel.dim}D")


def _split_point(A: VoxelSet, x) -> tuple[np.ndarray, tuple]:
    u = A.to_index(x)
    if not np.all(np.isfinite(u)):
        raise ValueError("evaluation point must be finite")
    base = np.floor(u)
    return base.astype(int), tuple(float(v) for v in u - base)


def _isum(a: np.ndarray) -> int:
    """Exact integer sum of an array of integer-valued floats."""
    if a.size == 0:
        return 0
    return int(np.rint(a).astype(np.int64).astype(object).sum())


def _occupied_sum(A: VoxelSet, st: Stencil, base: np.ndarray) -> int:
    win = A.window(base + st.lo, st.weights.shape)
    return int(st.weights[win].sum())


def _correlate(occ: np.ndarray, st: Stencil) -> np.ndarray:
    """``S[j] = sum_k w[k] occ[j + k]`` on ``occ``'s index range, exact integers."""
    w = st.weights
    if not occ.any():
        return np.zeros(occ.shape)
    full = signal.fftconvolve(occ.astype(float), w[(slice(None, None, -1),) * w.ndim], mode="full")
    # offset of S[0] inside the full convolution
    start = [L - 1 + int(lo) for L, lo in zip(w.shape, st.lo)]
    sl = tuple(slice(s, s + N) for s, N in zip(start, occ.shape))
    raw = full[sl]
    out = np.rint(raw)
    if out.size and float(np.max(np.abs(raw - out))) > 0.25:
        raise FloatingPointError("FFT correlation lost integer exactness; reduce the grid or kernel bits")
    out[out == 0] = 0.0
    return out


@dataclass
class CurvatureField:
    """Curvature values at a list of points."""

    points: np.ndarray
    values: np.ndarray
    kernel: RadialKernel
    h: float
    partial: bool = False
    counts: np.ndarray = field(default=None, repr=False)

    def __len__(self):
        return len(self.values)

    def check_range(self) -> bool:
        M = self.kernel.total_mass()
        return bool(np.all(np.abs(self.values) <= M * (1 + 1e-12)))


class CurvatureEvaluator:
    """Evaluates ``H^J_A`` at arbitrary points, caching whole-grid fields.

    Points sharing a fractional cell offset (cell centers, cell faces) are
    served from one FFT correlation over the padded grid; isolated points
    use the direct stencil sum.  Both paths produce identical integers.
    """

    def __init__(self, A: VoxelSet, kernel: RadialKernel, partial: bool = False, threads: int = 1):
        _check_dim(A, kernel)
        self.A = A
        self.kernel = kernel
        self.partial = partial
        self.threads = max(1, int(threads))
        self._fields: dict[tuple, tuple[VoxelSet, np.ndarray]] = {}

    def stencil(self, shift) -> Stencil:
        return stencil(self.kernel, self.A.h, shift, self.partial)

    def field(self, shift=None) -> tuple[VoxelSet, np.ndarray]:
        """``(grid, S)`` with ``S`` the occupied stencil sum at ``grid`` cell centers + shift."""
        if shift is None:
            shift = (0.0,) * self.A.dim
        shift = tuple(float(s) for s in shift)
        if shift not in self._fields:
            st = self.stencil(shift)
            grid = self.A.pad(st.radius_cells + 2)
            self._fields[shift] = (grid, _correlate(grid.occ, st))
        return self._fields[shift]

    def counts(self, points, use_fields: bool | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Integer occupied sums, stencil totals and units at each point."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        k = len(pts)
        occ_sum = np.zeros(k)
        total = np.zeros(k)
        unit = np.zeros(k)
        split = [_split_point(self.A, p) for p in pts]
        groups: dict[tuple, list[int]] = {}
        for i, (_, s) in enumerate(split):
            groups.setdefault(s, []).append(i)
        for s, idx in groups.items():
            st = self.stencil(s)
            total[idx] = st.total
            unit[idx] = st.unit
            bases = np.array([split[i][0] for i in idx])
            many = len(idx) >= 64 if use_fields is None else use_fields
            if many:
                grid, S = self.field(s)
                off = self.A.offset_to(grid)
                rel = bases - off
                ok = np.all((rel >= 0) & (rel < np.asarray(grid.shape)), axis=1)
                vals = np.zeros(len(idx))
                vals[ok] = S[tuple(rel[ok].T)]
                occ_sum[idx] = vals
            else:
                def one(b, st=st):
                    return _occupied_sum(self.A, st, b)

                if self.threads > 1 and len(idx) > 1:
                    with ThreadPoolExecutor(self.threads) as ex:
                        vals = list(ex.map(one, bases))
                else:
                    vals = [one(b) for b in bases]
                occ_sum[idx] = vals
        return occ_sum, total, unit

    def at(self, points, use_fields: bool | None = None) -> np.ndarray:
        occ_sum, total, unit = self.counts(points, use_fields)
        return (total - 2.0 * occ_sum) * unit

    def evaluate(self, points, use_fields: bool | None = None) -> CurvatureField:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        occ_sum, total, unit = self.counts(pts, use_fields)
        return CurvatureField(pts, (total - 2.0 * occ_sum) * unit, self.kernel, self.A.h, self.partial,
                              counts=total - 2.0 * occ_sum)

    def center_values(self) -> tuple[VoxelSet, np.ndarray]:
        """Curvature at every cell center of the padded grid."""
        grid, S = self.field()
        st = self.stencil(None)
        return grid, (st.total - 2.0 * S) * st.unit


def curvature_at(A: VoxelSet, kernel: RadialKernel, x, partial: bool = False) -> float:
    """``H^J_A(x) = int J(x-y) (chi_{A^c} - chi_A)(y) dy`` by cell summation.

    Cells outside ``A``'s window count as exterior, which is exact for a
    voxel set; there is no truncation of the horizon.
    """
    _check_dim(A, kernel)
    x = np.asarray(x, dtype=float)
    if x.shape != (A.dim,):
        raise ValueError("point has the wrong dimension")
    base, s = _split_point(A, x)
    st = stencil(kernel, A.h, s, partial)
    return float((st.total - 2 * _occupied_sum(A, st, base)) * st.unit)


def boundary_curvature(A: VoxelSet, kernel: RadialKernel, partial: bool = False) -> CurvatureField:
    """Curvature at the centers of all boundary cells."""
    ev = CurvatureEvaluator(A, kernel, partial)
    pts = A.centers(np.argwhere(A.boundary_mask()))
    return ev.evaluate(pts)


def _pair_count(grid_occ_a: np.ndarray, S_b: np.ndarray) -> int:
    """``sum_{a in A} sum_{b in B} w(a-b)`` given ``S_b`` = correlation of B."""
    return _isum(S_b[grid_occ_a])


def _pair_unit(kernel: RadialKernel, h: float, partial: bool) -> tuple[Stencil, float]:
    st = stencil(kernel, h, None, partial)
    return st, st.unit * h**kernel.dim


def perimeter(A: VoxelSet, kernel: RadialKernel, partial: bool = False) -> float:
    """``P^J(A) = int_A int_{A^c} J(x-y) dy dx`` by cell-pair summation."""
    _check_dim(A, kernel)
    if A.is_empty():
        return 0.0
    st, unit = _pair_unit(kernel, A.h, partial)
    S = _correlate(A.occ, st)
    inner = _pair_count(A.occ, S)
    return float((A.count * st.total - inner) * unit)


def _perimeter_count(A: VoxelSet, st: Stencil) -> int:
    if A.is_empty():
        return 0
    return A.count * st.total - _pair_count(A.occ, _correlate(A.occ, st))


@dataclass(frozen=True)
class Decomposition:
    """Terms of ``P(A_t) - P(A)`` split over ``E_t = A_t minus A`` and ``F_t = A minus A_t``.

    ``curv_F`` and ``curv_E`` integrate the curvature of the untranslated
    set; ``cross_EF`` already carries its factor 2.  ``residual`` is the
    signed sum ``curv_E - curv_F + cross_EF - self_FF - self_EE - (P(A_t)-P(A))``,
    which vanishes identically.
    """

    t: float
    curv_F: float
    curv_E: float
    cross_EF: float
    self_FF: float
    self_EE: float
    perimeter_change: float
    residual: float
    volume_E: float
    volume_F: float

    @property
    def terms(self) -> tuple[float, float, float, float, float]:
        return (self.curv_F, self.curv_E, self.cross_EF, self.self_FF, self.self_EE)

    @property
    def signed_sum(self) -> float:
        return self.curv_E - self.curv_F + self.cross_EF - self.self_FF - self.self_EE

    @property
    def scale(self) -> float:
        return max(abs(v) for v in self.terms) or 1.0

    @property
    def cross_terms(self) -> float:
        return self.cross_EF - self.self_FF - self.self_EE


def perimeter_decomposition(A: VoxelSet, kernel: RadialKernel, t: float, partial: bool = False) -> Decomposition:
    """Five-term split of the perimeter change under translation by ``t`` along ``x_n``."""
    _check_dim(A, kernel)
    if t < 0:
        raise ValueError("translation t must be non-negative")
    At = A.translate_last_axis(t)
    E, F = relative_complements(At, A)
    st, unit = _pair_unit(kernel, A.h, partial)
    # put A, E, F on one window wide enough for the horizon
    pad = st.radius_cells + 2
    win = A.union(At).pad(pad)
    a = _on(win, A)
    e = _on(win, E)
    f = _on(win, F)
    S_A = _correlate(a, st)
    S_E = _correlate(e, st)
    S_F = _correlate(f, st)
    H_A = st.total - 2.0 * S_A
    cF = _isum(H_A[f])
    cE = _isum(H_A[e])
    xEF = 2 * _pair_count(e, S_F)
    sFF = _pair_count(f, S_F)
    sEE = _pair_count(e, S_E)
    dP = _perimeter_count(At, st) - _perimeter_count(A, st)
    resid = cE - cF + xEF - sFF - sEE - dP
    return Decomposition(
        t=float(t), curv_F=float(cF * unit), curv_E=float(cE * unit), cross_EF=float(xEF * unit),
        self_FF=float(sFF * unit), self_EE=float(sEE * unit), perimeter_change=float(dP * unit),
        residual=float(resid * unit), volume_E=E.volume(), volume_F=F.volume(),
    )


def _on(win: VoxelSet, B: VoxelSet) -> np.ndarray:
    off = win.offset_to(B)
    return B.window(-off, win.shape)


def curvature_modulus(A: VoxelSet, kernel: RadialKernel, samples: int = 2000, seed: int = 0,
                      partial: bool = False, return_pair: bool = False):
    """Empirical Lipschitz constant of ``H`` over sampled near-boundary pairs.

    Pairs join a boundary cell center to a cell center at distance in
    ``[h, r/4]``; the four axis neighbours at distance ``h`` are always
    included for every sampled cell.  Zero-distance pairs never occur.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    _check_dim(A, kernel)
    if A.is_empty():
        return (0.0, None) if return_pair else 0.0
    h, n = A.h, A.dim
    grid, H = CurvatureEvaluator(A, kernel, partial).center_values()
    off = A.offset_to(grid)
    bidx = np.argwhere(A.boundary_mask()) - off
    rng = np.random.default_rng(seed)
    pick = bidx[rng.integers(0, len(bidx), size=samples)]
    kmax = max(1, int(math.floor(kernel.r / 4 / h)))
    rng_off = np.arange(-kmax, kmax + 1)
    cand = np.stack(np.meshgrid(*([rng_off] * n), indexing="ij"), axis=-1).reshape(-1, n)
    dist = np.sqrt((cand.astype(float) ** 2).sum(axis=1)) * h
    cand = cand[(dist >= h * (1 - 1e-12)) & (dist <= kernel.r / 4 + 1e-12)]
    if len(cand) == 0:
        cand = np.eye(n, dtype=int)
    axis_nb = np.concatenate([np.eye(n, dtype=int), -np.eye(n, dtype=int)])
    rand_off = cand[rng.integers(0, len(cand), size=samples)]
    best, best_pair = 0.0, None
    shape = np.asarray(grid.shape)
    for offs in [rand_off[:, None, :], np.broadcast_to(axis_nb, (samples,) + axis_nb.shape)]:
        q = pick[:, None, :] + offs
        ok = np.all((q >= 0) & (q < shape), axis=-1)
        p = np.broadcast_to(pick[:, None, :], q.shape)
        hp = H[tuple(p[ok].T)]
        hq = H[tuple(q[ok].T)]
        d = np.sqrt(((q[ok] - p[ok]).astype(float) ** 2).sum(axis=1)) * h
        ratio = np.abs(hp - hq) / d
        if ratio.size:
            i = int(np.argmax(ratio))
            if ratio[i] > best:
                best = float(ratio[i])
                best_pair = (grid.centers(p[ok][i]), grid.centers(q[ok][i]))
    return (best, best_pair) if return_pair else best
