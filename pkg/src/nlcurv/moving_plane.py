"""Moving-plane sweep along the distinguished axis.

The plane ``x_n = lam`` moves upward from below the set.  The part of the
set below the plane is mirrored above it; as long as the mirror image stays
inside the set the sweep continues.  The critical plane ``lam0`` is the last
half-cell position before the mirror image first leaves the set.

On the grid every candidate plane sits on the half-cell lattice, so all
reflections are exact bit flips and the containment test is a plain
boolean comparison.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .kernel import RadialKernel
from .measure import CurvatureEvaluator
from .setrep import VoxelSet

__all__ = [
    "StopEvent",
    "SweepState",
    "SymmetryReport",
    "reflected_upper_excess",
    "find_critical_plane",
    "classify_stopping_event",
    "touching_point_identity_check",
    "symmetry_defect",
    "symmetry_tolerance",
    "analyze_symmetry",
    "TouchingCheck",
]


class StopEvent(str, enum.Enum):
    INTERIOR_TOUCHING = "InteriorTouching"
    NON_TRANSVERSAL = "NonTransversal"
    SWEEP_EXHAUSTED = "SweepExhausted"


def _column_profiles(A: VoxelSet):
    """Occupancy reshaped to ``(columns, height)``."""
    return A.occ.reshape(-1, A.shape[-1])


def _mirror_lower(occ_cols: np.ndarray, m: int) -> np.ndarray:
    """Cells above plane ``m`` (half-cell index) hit by the mirror image of the cells below it.

    Cell ``j`` maps to ``m - 1 - j``; returns a mask on the same window.
    """
    nz = occ_cols.shape[1]
    out = np.zeros_like(occ_cols)
    # rows strictly above the plane have j > (m - 1)/2; their sources m-1-j lie below
    j_up = np.arange(max((m + 1) // 2, 0), nz)
    j_low = m - 1 - j_up
    keep = (j_low >= 0) & (j_low < nz)
    out[:, j_up[keep]] = occ_cols[:, j_low[keep]]
    return out


def _excess_cols(occ_cols: np.ndarray, m: int) -> np.ndarray:
    return _mirror_lower(occ_cols, m) & ~occ_cols


def reflected_upper_excess(A: VoxelSet, lam: float) -> tuple[float, VoxelSet]:
    """``R_lam(A) ∩ {x_n > lam}`` minus ``A``, as a volume and a voxel set.

    The reflected part may stick out of ``A``'s window, so the work is done
    on a window extended upward as far as needed.
    """
    m = A.check_plane(lam)
    nz = A.shape[-1]
    grow = max(0, m - nz)
    B = A.regrid(np.zeros(A.dim, dtype=int), A.shape[:-1] + (nz + grow,)) if grow else A
    cols = _column_profiles(B)
    ex = _excess_cols(cols, m).reshape(B.shape)
    E = VoxelSet(ex, A.h, B.origin)
    return E.volume(), E


@dataclass
class SweepState:
    """Critical plane found by the sweep and what happened there."""

    lam0: float
    m0: int
    excess_volume: float
    eroded_excess_volume: float
    next_excess_volume: float
    touching: list = field(default_factory=list)
    nontransversal: bool = False
    exhausted: bool = False
    steps: int = 0


def _first_failure_scan(cols: np.ndarray, m_lo: int, m_hi: int) -> int | None:
    for m in range(m_lo, m_hi + 1):
        if _excess_cols(cols, m).any():
            return m
    return None


def _first_failure_runs(cols: np.ndarray) -> int | None:
    # a below-plane cell j with an empty cell k > j first leaks at m = j + k + 1,
    # minimized per column by the first run [j1, e1)
    occ = cols.any(axis=1)
    if not occ.any():
        return None
    c = cols[occ]
    j1 = np.argmax(c, axis=1)
    nz = c.shape[1]
    after = ~c & (np.arange(nz)[None, :] > j1[:, None])
    e1 = np.where(after.any(axis=1), np.argmax(after, axis=1), nz)
    return int((j1 + e1).min()) + 1


def find_critical_plane(A: VoxelSet, method: str = "runs") -> SweepState:
    """Sweep ``lam`` upward on the half-cell lattice and stop at the first containment failure.

    ``lam0`` is the largest plane with zero excess at every tested plane up
    to and including it; the next half-cell step has positive excess.
    ``method="scan"`` tests every plane in turn; the default reads the
    answer off the first run of each column, which is equivalent and
    linear in the grid size.
    """
    if A.is_empty():
        raise ValueError("cannot sweep an empty set")
    if A.occ[..., -1].any():
        raise ValueError("set reaches the top of its grid; pad the window before sweeping")
    A = A.cropped(1)
    cols = _column_profiles(A)
    rows = np.nonzero(cols.any(axis=0))[0]
    bottom, top = int(rows[0]), int(rows[-1]) + 1
    # plane index m <-> lam = origin_n + m*h/2; the set spans cells [bottom, top)
    m_lo, m_hi = 2 * bottom, 2 * top
    if method == "scan":
        m_fail = _first_failure_scan(cols, m_lo, m_hi)
    elif method == "runs":
        m_fail = _first_failure_runs(cols)
    else:
        raise ValueError(f"unknown sweep method {method!r}")
    exhausted = m_fail is None
    m0 = m_hi if exhausted else m_fail - 1
    lam0 = A.plane_level(m0)
    state = SweepState(lam0=lam0, m0=m0, excess_volume=0.0, eroded_excess_volume=0.0,
                       next_excess_volume=0.0, exhausted=exhausted, steps=m0 - m_lo + 2)
    if not exhausted:
        ex = _excess_cols(cols, m0 + 1)
        state.next_excess_volume = float(np.count_nonzero(ex)) * A.cell_volume
        # what survives erosion by one layer at the first failing plane
        eroded = ndimage.binary_erosion(ex.reshape(A.shape), structure=ndimage.generate_binary_structure(A.dim, 1))
        state.eroded_excess_volume = float(np.count_nonzero(eroded)) * A.cell_volume
    return state


def _touching_cells(A: VoxelSet, m0: int) -> np.ndarray:
    """Boundary cells above the plane whose mirror image is a boundary cell."""
    bnd = A.boundary_mask()
    mir = _mirror_lower(bnd.reshape(-1, A.shape[-1]), m0).reshape(A.shape)
    return np.argwhere(bnd & mir)


@dataclass
class SymmetryReport:
    lam0: float
    event: StopEvent
    defect: float
    touching_points: list
    verdict: str
    tolerance: float
    excess_at_next: float
    eroded_excess_at_next: float
    hypothesis_violation: bool
    grid: dict
    hypothesis_checks: dict = field(default_factory=dict)

    @property
    def symmetric(self) -> bool:
        return self.verdict == "symmetric"

    def to_dict(self) -> dict:
        return {
            "lambda0": self.lam0,
            "event": self.event.value,
            "defect": self.defect,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "touching_points": [list(map(float, p)) for p in self.touching_points],
            "excess_next_step": self.excess_at_next,
            "eroded_excess_next_step": self.eroded_excess_at_next,
            "hypothesis_violation": self.hypothesis_violation,
            "hypothesis_checks": self.hypothesis_checks,
            "grid": self.grid,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def symmetry_defect(A: VoxelSet, lam: float) -> float:
    """``|R_lam(A) Δ A| / |A|`` in ``[0, 2]``."""
    if A.is_empty():
        raise ValueError("symmetry defect of an empty set")
    return A.symmetric_difference(A.reflect(lam)).count / A.count


def symmetry_tolerance(A: VoxelSet) -> float:
    """``2 * (boundary layer volume) / |A|``."""
    return 2.0 * A.boundary_volume() / A.volume()


def classify_stopping_event(A: VoxelSet, state: SweepState, tol: float | None = None) -> SymmetryReport:
    """Label the stop at ``lam0`` and measure how far the set is from symmetric there.

    Touching points are boundary cells above the plane whose mirror images
    are boundary cells too.  Cells within one cell of the plane always pair
    up on a grid, so the event counts as interior touching only when some
    touching cell sits more than ``h`` above the plane; otherwise the
    contact happened at the plane itself (non-transversal).  Excess cells at the next plane that are
    not face-adjacent to the set would contradict the structure of the
    excess set near a critical plane and flag a hypothesis violation.
    """
    B = A.cropped(1)
    m0 = B.check_plane(state.lam0)
    if state.exhausted:
        event = StopEvent.SWEEP_EXHAUSTED
        touching = np.zeros((0, A.dim), dtype=int)
        violation = True
    else:
        touching = _touching_cells(B, m0)
        height = B.centers(touching)[:, -1] - state.lam0
        deep = bool(np.any(height > B.h * (1 + 1e-9)))
        _, E = reflected_upper_excess(B, B.plane_level(m0 + 1))
        own = B.window(B.offset_to(E), E.shape)
        near = ndimage.binary_dilation(own, structure=ndimage.generate_binary_structure(A.dim, 1))
        violation = bool((E.occ & ~near).any())
        event = StopEvent.INTERIOR_TOUCHING if deep else StopEvent.NON_TRANSVERSAL
    defect = symmetry_defect(B, state.lam0)
    if tol is None:
        tol = symmetry_tolerance(B)
    return SymmetryReport(
        lam0=state.lam0,
        event=event,
        defect=defect,
        touching_points=[tuple(p) for p in B.centers(touching).tolist()],
        verdict="symmetric" if defect <= tol else "asymmetric",
        tolerance=tol,
        excess_at_next=state.next_excess_volume,
        eroded_excess_at_next=state.eroded_excess_volume,
        hypothesis_violation=violation,
        grid={"h": A.h, "dims": list(A.shape)},
    )


def analyze_symmetry(A: VoxelSet, tol: float | None = None) -> SymmetryReport:
    """Sweep, classify and score in one call."""
    return classify_stopping_event(A, find_critical_plane(A), tol)


@dataclass
class TouchingCheck:
    upper: tuple
    lower: tuple
    curvature_gap: float
    measure: float
    layer_volume: float
    window: str

    @property
    def flagged(self) -> bool:
        """Mismatch volume exceeds the one-layer allowance."""
        return self.measure > self.layer_volume

    def to_dict(self):
        return {
            "upper": list(self.upper), "lower": list(self.lower),
            "curvature_gap": self.curvature_gap, "measure": self.measure,
            "layer_volume": self.layer_volume, "window": self.window,
            "flagged": self.flagged,
        }


def touching_point_identity_check(A: VoxelSet, kernel: RadialKernel, x0, lam0: float) -> TouchingCheck:
    """Curvature gap and mismatch volume at a touching pair ``x0``, ``R_lam0(x0)``.

    Let ``u`` be the member of the pair above the plane and ``d`` its
    mirror.  With ``W = B_r(u) \\ B_r(d)`` for the ball indicator and
    ``W = B_r(u)`` otherwise, returns ``|H(u) - H(d)|`` and
    ``|(A \\ R(A)) ∩ W|``.  When the set meets the hypotheses both vanish
    up to grid error.  ``layer_volume`` is the volume of boundary cells of
    ``A`` inside ``W``, the one-layer allowance for rasterization.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (A.dim,) or not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be a finite point of the set's dimension")
    xm = x0.copy()
    xm[-1] = 2.0 * lam0 - x0[-1]
    up, dn = (x0, xm) if x0[-1] >= xm[-1] else (xm, x0)
    ev = CurvatureEvaluator(A, kernel)
    H = ev.at(np.array([up, dn]), use_fields=False)
    D = A.difference(A.reflect(lam0))
    r = kernel.r
    ball_only = kernel.regularity == "indicator"

    def inside(pts):
        pts = np.asarray(pts).reshape(-1, A.dim)
        hit = np.linalg.norm(pts - up, axis=1) < r
        if ball_only:
            hit &= np.linalg.norm(pts - dn, axis=1) >= r
        return int(np.count_nonzero(hit))

    meas = inside(D.centers(np.argwhere(D.occ))) * A.cell_volume
    layer = inside(A.centers(np.argwhere(A.boundary_mask()))) * A.cell_volume
    return TouchingCheck(
        upper=tuple(up.tolist()), lower=tuple(dn.tolist()),
        curvature_gap=float(abs(H[0] - H[1])), measure=float(meas), layer_volume=float(layer),
        window="ball minus ball" if ball_only else "ball",
    )
