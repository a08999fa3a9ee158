"""Vertical fibers, boundary taxonomy and the domain hypotheses.

Each column ``xhat`` (a multi-index over the first ``n-1`` axes) meets the
set in finitely many maximal runs of occupied cells; run ``[s, e)`` is the
closed interval ``[origin_n + s*h, origin_n + e*h]``.  Intervals are stored
in ascending order of ``x_n``.

Boundary cells are classified by where they sit in their run:

======  =====================================================
``P1``  top cell of a run of length >= 2 (top boundary point)
``P2``  bottom cell of such a run (bottom boundary point)
``P3``  boundary cell strictly inside a run (lateral point)
``P4``  a run of a single cell (directionally isolated point)
======  =====================================================

``P1``/``P2`` records sit on the exposed cell face (the interval endpoint);
``P3``/``P4`` records sit on the cell center.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .kernel import RadialKernel
from .measure import CurvatureEvaluator, curvature_modulus, stencil
from .setrep import VoxelSet

__all__ = [
    "PointClass",
    "FiberDecomposition",
    "BoundaryPointRecord",
    "decompose",
    "record_curvature",
    "classify_boundary",
    "fiber_measure_below",
    "OrderedCurvatureReport",
    "check_ordered_curvature",
    "DomainReport",
    "check_domain_hypotheses",
    "NondegeneracyResult",
    "nondegeneracy_quotient",
]


class PointClass(str, enum.Enum):
    TOP = "P1"
    BOTTOM = "P2"
    LATERAL = "P3"
    ISOLATED = "P4"


@dataclass(frozen=True)
class FiberDecomposition:
    """Run-length decomposition of a voxel set along ``x_n``.

    ``col``, ``start`` and ``stop`` are parallel arrays over all runs, sorted
    by column then height; ``start``/``stop`` are cell indices (``stop``
    exclusive).
    """

    A: VoxelSet
    col: np.ndarray
    start: np.ndarray
    stop: np.ndarray
    _where: dict = field(default_factory=dict, repr=False, compare=False)

    def __len__(self):
        return len(self.start)

    @property
    def lower(self) -> np.ndarray:
        return self.A.origin[-1] + self.start * self.A.h

    @property
    def upper(self) -> np.ndarray:
        return self.A.origin[-1] + self.stop * self.A.h

    @property
    def region(self) -> set[tuple[int, ...]]:
        """Projection ``R``: the set of nonempty columns."""
        return {tuple(c) for c in self.col}

    def column_runs(self, xhat) -> slice:
        """Slice into the run arrays for one column (empty if the column is empty)."""
        if not self._where:
            keys = [tuple(c) for c in self.col]
            for i, k in enumerate(keys):
                if k in self._where:
                    self._where[k] = slice(self._where[k].start, i + 1)
                else:
                    self._where[k] = slice(i, i + 1)
        return self._where.get(tuple(int(v) for v in np.atleast_1d(xhat)), slice(0, 0))

    def intervals(self, xhat) -> list[tuple[float, float]]:
        sl = self.column_runs(xhat)
        return list(zip(self.lower[sl].tolist(), self.upper[sl].tolist()))

    @property
    def columns(self) -> dict[tuple[int, ...], list[tuple[float, float]]]:
        out: dict[tuple[int, ...], list[tuple[float, float]]] = {}
        for c, lo, hi in zip(self.col, self.lower.tolist(), self.upper.tolist()):
            out.setdefault(tuple(int(v) for v in c), []).append((lo, hi))
        return out

    def column_center(self, xhat) -> np.ndarray:
        """World coordinates of the column axis (first ``n-1`` coordinates)."""
        return self.A.origin[:-1] + (np.asarray(xhat, dtype=float) + 0.5) * self.A.h


def decompose(A: VoxelSet) -> FiberDecomposition:
    """Split every column of ``A`` into its maximal occupied runs."""
    n = A.dim
    flat = A.occ.reshape(-1, A.shape[-1])
    pad = np.zeros((flat.shape[0], flat.shape[1] + 2), dtype=np.int8)
    pad[:, 1:-1] = flat
    d = np.diff(pad, axis=1)
    sc, sp = np.nonzero(d == 1)
    ec, ep = np.nonzero(d == -1)
    col = np.stack(np.unravel_index(sc, A.shape[:-1]), axis=-1) if len(sc) else np.zeros((0, n - 1), int)
    return FiberDecomposition(A, col.astype(int), sp.astype(int), ep.astype(int))


@dataclass(frozen=True)
class BoundaryPointRecord:
    position: tuple
    kind: PointClass
    column: tuple
    interval: int
    cell: tuple
    partner: tuple | None = None


def classify_boundary(A: VoxelSet, decomp: FiberDecomposition | None = None) -> list[BoundaryPointRecord]:
    """Classify every boundary cell as P1-P4; P1/P2 of one run are partners."""
    if decomp is None:
        decomp = decompose(A)
    h = A.h
    bnd = A.boundary_mask()
    z0 = A.origin[-1]
    out: list[BoundaryPointRecord] = []
    for ridx, (c, s, e) in enumerate(zip(decomp.col, decomp.start, decomp.stop)):
        c = tuple(int(v) for v in c)
        xh = tuple(decomp.column_center(c).tolist())
        sl = decomp.column_runs(c)
        k = ridx - sl.start
        if e - s == 1:
            out.append(BoundaryPointRecord(xh + (z0 + (s + 0.5) * h,), PointClass.ISOLATED, c, k, c + (int(s),)))
            continue
        bot = xh + (z0 + s * h,)
        top = xh + (z0 + e * h,)
        out.append(BoundaryPointRecord(bot, PointClass.BOTTOM, c, k, c + (int(s),), partner=top))
        inner = np.nonzero(bnd[c][s + 1:e - 1])[0] + s + 1
        for j in inner.tolist():
            out.append(BoundaryPointRecord(xh + (z0 + (j + 0.5) * h,), PointClass.LATERAL, c, k, c + (j,)))
        out.append(BoundaryPointRecord(top, PointClass.TOP, c, k, c + (int(e - 1),), partner=bot))
    return out


def fiber_measure_below(decomp: FiberDecomposition, xhat, s: float) -> float:
    """Length of the column's intervals below height ``s``."""
    sl = decomp.column_runs(xhat)
    lo = decomp.lower[sl]
    hi = decomp.upper[sl]
    return float(np.clip(np.minimum(hi, s) - lo, 0.0, None).sum())


def record_curvature(A: VoxelSet, kernel: RadialKernel, records, evaluator: CurvatureEvaluator | None = None):
    ev = evaluator or CurvatureEvaluator(A, kernel)
    if not records:
        return np.zeros(0)
    return ev.at(np.array([r.position for r in records]))


def default_tolerance(A: VoxelSet, kernel: RadialKernel, samples: int = 2000) -> tuple[float, float]:
    """``(4 * C_lip * h, C_lip)`` with ``C_lip`` the measured curvature modulus."""
    c = curvature_modulus(A, kernel, samples)
    return 4.0 * c * A.h, c


@dataclass
class OrderedCurvatureReport:
    passed: bool
    tol: float
    worst: float
    worst_pair: tuple | None
    violations: int
    intervals: int

    def to_dict(self):
        return {
            "passed": self.passed, "tol": self.tol, "worst_violation": self.worst,
            "worst_pair": None if self.worst_pair is None else [list(p) for p in self.worst_pair],
            "violations": self.violations, "intervals_checked": self.intervals,
        }


def check_ordered_curvature(A: VoxelSet, kernel: RadialKernel, tol: float | None = None,
                            records=None, values=None) -> OrderedCurvatureReport:
    """Check that ``H`` is non-decreasing upward along every fiber interval.

    Only boundary records on the same interval are compared.  The worst
    violation is ``max H(x) - H(y)`` over record pairs with ``x`` below ``y``.
    """
    if tol is None:
        tol, _ = default_tolerance(A, kernel)
    if records is None:
        records = classify_boundary(A)
    if values is None:
        values = record_curvature(A, kernel, records)
    groups: dict[tuple, list[int]] = {}
    for i, rec in enumerate(records):
        groups.setdefault((rec.column, rec.interval), []).append(i)
    worst, worst_pair, nviol = 0.0, None, 0
    for idx in groups.values():
        idx.sort(key=lambda i: records[i].position[-1])
        run_max, arg = -math.inf, None
        for i in idx:
            v = values[i]
            if arg is not None:
                gap = run_max - v
                if gap > tol:
                    nviol += 1
                if gap > worst:
                    worst, worst_pair = float(gap), (records[arg].position, records[i].position)
            if v > run_max:
                run_max, arg = v, i
    return OrderedCurvatureReport(worst <= tol, float(tol), worst, worst_pair, nviol, len(groups))


@dataclass
class DomainReport:
    boundary_volume: float
    countable_fibers: bool
    diameter: float
    diameter_ok: bool
    shell_min_count: int | None
    shell_ok: bool
    components: int
    h: float

    @property
    def passed(self) -> bool:
        return self.diameter_ok and self.shell_ok

    @property
    def connected(self) -> bool:
        return self.components == 1

    def to_dict(self):
        return {
            "boundary_layer_volume": self.boundary_volume,
            "countable_fibers": self.countable_fibers,
            "diameter": self.diameter,
            "diameter_exceeds_2r": self.diameter_ok,
            "sphere_shell_min_count": self.shell_min_count,
            "sphere_shell_ok": self.shell_ok,
            "components": self.components,
            "connected": self.connected,
            "passed": self.passed,
        }


def check_domain_hypotheses(A: VoxelSet, kernel: RadialKernel, samples: int = 256, seed: int = 0) -> DomainReport:
    """Zero-measure boundary (refinement diagnostic), countable fibers, and ``diam > 2r``.

    For the ball-indicator kernel the sphere ``dB_r(x)`` must also meet the
    set at boundary points ``x``; this is estimated by counting occupied cell
    centers in the shell ``r-h <= |y-x| <= r+h`` around sampled boundary cells.
    """
    if A.is_empty():
        return DomainReport(0.0, True, 0.0, False, None, False, 0, A.h)
    h, r = A.h, kernel.r
    diam = A.diameter()
    shell_min = None
    shell_ok = True
    if kernel.regularity == "indicator":
        bidx = np.argwhere(A.boundary_mask())
        rng = np.random.default_rng(seed)
        pick = bidx[rng.choice(len(bidx), size=min(samples, len(bidx)), replace=False)]
        m = math.ceil(r / h) + 1
        offs = np.arange(-m, m + 1)
        grid = np.stack(np.meshgrid(*([offs] * A.dim), indexing="ij"), axis=-1)
        dist = np.sqrt((grid.astype(float) ** 2).sum(-1)) * h
        shell = (dist >= r - h) & (dist <= r + h)
        counts = [int(np.count_nonzero(A.window(p - m, shell.shape) & shell)) for p in pick]
        shell_min = min(counts)
        shell_ok = shell_min > 0
    return DomainReport(
        boundary_volume=A.boundary_volume(),
        countable_fibers=True,
        diameter=diam,
        diameter_ok=diam > 2 * r,
        shell_min_count=shell_min,
        shell_ok=shell_ok,
        components=A.components(),
        h=h,
    )


@dataclass
class NondegeneracyResult:
    value: float
    pair: tuple | None
    pairs_evaluated: int


def _variation(A: VoxelSet, kernel: RadialKernel, c1: np.ndarray, c2: np.ndarray) -> float:
    """``int_A |J(x1-y) - J(x2-y)| dy`` for two cell centers, by cell summation."""
    st = stencil(kernel, A.h)
    w = st.weights
    m = st.radius_cells
    L = np.asarray(w.shape)
    d = c2 - c1
    if np.any(np.abs(d) >= L):
        s1 = w[A.window(c1 + st.lo, w.shape)].sum()
        s2 = w[A.window(c2 + st.lo, w.shape)].sum()
        return float((s1 + s2) * st.unit)
    lo = np.minimum(c1, c2) - m
    shape = L + np.abs(d)
    occ = A.window(lo, shape)
    w1 = np.zeros(shape)
    w2 = np.zeros(shape)
    a1 = c1 - m - lo
    a2 = c2 - m - lo
    w1[tuple(slice(a, a + n) for a, n in zip(a1, L))] = w
    w2[tuple(slice(a, a + n) for a, n in zip(a2, L))] = w
    return float(np.abs(w1 - w2)[occ].sum() * st.unit)


def nondegeneracy_quotient(A: VoxelSet, kernel: RadialKernel, pairs: int = 500, seed: int = 0,
                           candidates=None) -> NondegeneracyResult:
    """Minimum over sampled boundary-cell pairs of the kernel-smoothed variation per unit distance.

    ``candidates`` may supply an explicit ``(k, 2, n)`` array of cell-index
    pairs instead of random sampling.
    """
    if pairs < 1:
        raise ValueError("need at least one pair")
    bidx = np.argwhere(A.boundary_mask())
    if len(bidx) < 2:
        raise ValueError("nondegeneracy needs at least two boundary cells")
    if candidates is None:
        rng = np.random.default_rng(seed)
        i = rng.integers(0, len(bidx), size=pairs)
        j = rng.integers(0, len(bidx) - 1, size=pairs)
        j = j + (j >= i)
        candidates = np.stack([bidx[i], bidx[j]], axis=1)
    best, best_pair, count = math.inf, None, 0
    for c1, c2 in np.asarray(candidates, dtype=int):
        dist = float(np.sqrt(((c2 - c1).astype(float) ** 2).sum())) * A.h
        if dist == 0.0:
            continue
        q = _variation(A, kernel, c1, c2) / dist
        count += 1
        if q < best:
            best, best_pair = q, (tuple(A.centers(c1).tolist()), tuple(A.centers(c2).tolist()))
    return NondegeneracyResult(best, best_pair, count)
