"""Voxel representation of bounded measurable sets.

A :class:`VoxelSet` is the union of the closed cells of its occupied voxels.
Cell ``i`` (a multi-index) spans ``origin + i*h`` to ``origin + (i+1)*h``;
its center sits at ``origin + (i + 1/2)*h``.  The last axis is the
distinguished vertical direction ``x_n``.

Everything outside the stored window is unoccupied, so any two sets whose
origins differ by whole cells can be combined exactly by re-windowing.
Translations and reflections are restricted to values that keep cell
centers on the lattice; with dyadic ``h`` and coordinates every operation
is bit-exact.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import ndimage
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

from .shapes import Shape

__all__ = ["VoxelSet", "rasterize", "relative_complements", "GridMismatch"]

_ALIGN_TOL = 1e-9


class GridMismatch(ValueError):
    """Raised when two grids, or a grid and an offset, are not lattice-compatible."""


def _as_int(value: float, what: str) -> int:
    k = round(value)
    if abs(value - k) > _ALIGN_TOL:
        raise GridMismatch(f"{what} is not aligned with the grid (off by {value - k:+.3g} cells)")
    return int(k)


class VoxelSet:
    """Occupancy grid with cell size ``h``; immutable after construction."""

    __slots__ = ("occ", "h", "origin")

    def __init__(self, occ, h: float, origin=None):
        occ = np.array(occ, dtype=bool)
        if occ.ndim not in (2, 3):
            raise ValueError(f"only 2D and 3D sets are supported, got ndim={occ.ndim}")
        if not (math.isfinite(h) and h > 0):
            raise ValueError("cell size h must be positive")
        origin = np.zeros(occ.ndim) if origin is None else np.asarray(origin, dtype=float).copy()
        if origin.shape != (occ.ndim,):
            raise ValueError("origin must have one coordinate per axis")
        occ.flags.writeable = False
        origin.flags.writeable = False
        self.occ = occ
        self.h = float(h)
        self.origin = origin

    def __repr__(self):
        return f"VoxelSet(dim={self.dim}, shape={self.shape}, h={self.h}, cells={self.count})"

    @property
    def dim(self) -> int:
        return self.occ.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.occ.shape

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.occ))

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    def volume(self) -> float:
        return self.count * self.cell_volume

    def is_empty(self) -> bool:
        return not self.occ.any()

    # coordinates

    def centers(self, index) -> np.ndarray:
        """World coordinates of cell centers for an ``(k, n)`` index array."""
        return self.origin + (np.asarray(index, dtype=float) + 0.5) * self.h

    def occupied_index(self) -> np.ndarray:
        return np.argwhere(self.occ)

    def to_index(self, x) -> np.ndarray:
        """Fractional cell coordinates of a point (cell centers are integers)."""
        return (np.asarray(x, dtype=float) - self.origin) / self.h - 0.5

    def centroid(self) -> np.ndarray:
        if self.is_empty():
            raise ValueError("centroid of an empty set")
        return self.centers(self.occupied_index()).mean(axis=0)

    def offset_to(self, other: "VoxelSet") -> np.ndarray:
        """Integer cell offset of ``other``'s origin relative to this one."""
        if not math.isclose(self.h, other.h, rel_tol=1e-12) or self.dim != other.dim:
            raise GridMismatch("grids have different cell sizes or dimensions")
        rel = (other.origin - self.origin) / self.h
        return np.array([_as_int(v, "origin offset") for v in rel])

    # window management

    def window(self, lo, shape) -> np.ndarray:
        """Occupancy on the index box ``[lo, lo+shape)`` (relative to this grid), zero outside."""
        lo = np.asarray(lo, dtype=int)
        out = np.zeros(tuple(int(s) for s in shape), dtype=bool)
        src, dst = [], []
        for a in range(self.dim):
            s0 = max(lo[a], 0)
            s1 = min(lo[a] + shape[a], self.shape[a])
            if s1 <= s0:
                return out
            src.append(slice(s0, s1))
            dst.append(slice(s0 - lo[a], s1 - lo[a]))
        out[tuple(dst)] = self.occ[tuple(src)]
        return out

    def regrid(self, lo, shape) -> "VoxelSet":
        lo = np.asarray(lo, dtype=int)
        return VoxelSet(self.window(lo, shape), self.h, self.origin + lo * self.h)

    def pad(self, cells: int) -> "VoxelSet":
        return self.regrid(-np.full(self.dim, cells), np.asarray(self.shape) + 2 * cells)

    def cropped(self, pad_cells: int = 0) -> "VoxelSet":
        """Tight bounding window of the occupied cells plus a margin."""
        if self.is_empty():
            return self
        lo, hi = np.empty(self.dim, dtype=int), np.empty(self.dim, dtype=int)
        for a in range(self.dim):
            hit = np.nonzero(self.occ.any(axis=tuple(b for b in range(self.dim) if b != a)))[0]
            lo[a], hi[a] = hit[0] - pad_cells, hit[-1] + 1 + pad_cells
        return self.regrid(lo, hi - lo)

    def with_padding(self, padding: float) -> "VoxelSet":
        """Tight window with at least ``padding`` of empty margin on every side."""
        return self.cropped(int(math.ceil(padding / self.h - 1e-9)))

    def _common(self, other: "VoxelSet"):
        off = self.offset_to(other)
        lo = np.minimum(0, off)
        hi = np.maximum(self.shape, off + np.asarray(other.shape))
        shape = hi - lo
        a = self.window(lo, shape)
        b = other.window(lo - off, shape)
        return a, b, self.origin + lo * self.h

    def aligned(self, other: "VoxelSet") -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Both occupancies on their common bounding window, and that window's origin."""
        return self._common(other)

    # set algebra

    def union(self, other):
        a, b, o = self._common(other)
        return VoxelSet(a | b, self.h, o)

    def intersection(self, other):
        a, b, o = self._common(other)
        return VoxelSet(a & b, self.h, o)

    def difference(self, other):
        a, b, o = self._common(other)
        return VoxelSet(a & ~b, self.h, o)

    def symmetric_difference(self, other):
        a, b, o = self._common(other)
        return VoxelSet(a ^ b, self.h, o)

    __or__ = union
    __and__ = intersection
    __sub__ = difference
    __xor__ = symmetric_difference

    def equals(self, other: "VoxelSet") -> bool:
        """Same point set (windows may differ)."""
        a, b, _ = self._common(other)
        return bool(np.array_equal(a, b))

    def complement_in_window(self) -> "VoxelSet":
        return VoxelSet(~self.occ, self.h, self.origin)

    # motions along the distinguished axis

    def translate_last_axis(self, t: float) -> "VoxelSet":
        """The set shifted by ``t`` along ``x_n``; ``t`` must be a whole number of cells."""
        q = t / self.h
        if abs(q - round(q)) > _ALIGN_TOL:
            lo, hi = math.floor(q) * self.h, math.ceil(q) * self.h
            raise GridMismatch(f"translation t={t} is not a multiple of h={self.h}; nearest are {lo} and {hi}")
        k = int(round(q))
        if k == 0:
            return self
        shift = np.zeros(self.dim)
        shift[-1] = k * self.h
        return VoxelSet(self.occ, self.h, self.origin + shift)

    def reflect(self, lam: float) -> "VoxelSet":
        """Mirror image across ``x_n = lam``; ``lam`` must sit on a cell face or center."""
        self.check_plane(lam)
        top = self.origin[-1] + self.shape[-1] * self.h
        origin = self.origin.copy()
        origin[-1] = 2.0 * lam - top
        return VoxelSet(self.occ[..., ::-1], self.h, origin)

    def check_plane(self, lam: float) -> int:
        """Half-cell index ``m`` with ``lam = origin_n + m*h/2``; raises if misaligned."""
        return _as_int(2.0 * (lam - self.origin[-1]) / self.h, f"plane x_n={lam}")

    def plane_level(self, m: int) -> float:
        return self.origin[-1] + m * self.h / 2.0

    # measures and topology

    def diameter(self) -> float:
        """Outer estimate: farthest occupied cell centers plus one cell diagonal."""
        if self.is_empty():
            raise ValueError("diameter of an empty set")
        pts = self.centers(np.argwhere(self.boundary_mask()))
        if len(pts) > 64:
            try:
                pts = pts[ConvexHull(pts).vertices]
            except QhullError:
                pass
        far = float(pdist(pts).max()) if len(pts) > 1 else 0.0
        return far + self.h * math.sqrt(self.dim)

    def boundary_mask(self) -> np.ndarray:
        """Occupied cells with at least one face-adjacent empty cell."""
        padded = np.pad(self.occ, 1)
        inner = ndimage.binary_erosion(padded, structure=ndimage.generate_binary_structure(self.dim, 1))
        return (padded & ~inner)[tuple(slice(1, -1) for _ in range(self.dim))]

    def boundary_volume(self) -> float:
        return int(np.count_nonzero(self.boundary_mask())) * self.cell_volume

    def components(self) -> int:
        """Number of face-connected components."""
        _, n = ndimage.label(self.occ, structure=ndimage.generate_binary_structure(self.dim, 1))
        return int(n)

    def is_connected(self) -> bool:
        return self.components() == 1


def relative_complements(a: VoxelSet, b: VoxelSet) -> tuple[VoxelSet, VoxelSet]:
    """``(a \\ b, b \\ a)`` on the common window of both grids."""
    x, y, o = a.aligned(b)
    return VoxelSet(x & ~y, a.h, o), VoxelSet(y & ~x, a.h, o)


def rasterize(shape: Shape, h: float, padding: float = 0.0, supersample: bool = False) -> VoxelSet:
    """Sample ``shape`` on the lattice ``h*Z^n`` (cell faces at multiples of ``h``).

    A cell is occupied when its center lies in the shape.  With
    ``supersample`` the ``2^n`` points at ``center +- h/4`` vote instead and a
    tie falls back to the center sample.
    """
    if not h > 0 or padding < 0:
        raise ValueError("need h > 0 and padding >= 0")
    n = shape.dim
    if n not in (2, 3):
        raise ValueError("only 2D and 3D shapes can be rasterized")
    b = shape.bounds()
    if b is None:
        ext = max(1, int(math.ceil(2 * padding / h)))
        return VoxelSet(np.zeros((ext,) * n, dtype=bool), h, np.full(n, -(ext // 2) * h))
    lo, hi = (np.asarray(v, dtype=float) for v in b)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("shape is unbounded")
    ilo = np.floor((lo - padding) / h).astype(int)
    ihi = np.ceil((hi + padding) / h).astype(int)
    ext = ihi - ilo
    axes = [(ilo[a] + np.arange(ext[a]) + 0.5) * h for a in range(n)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    if not supersample:
        occ = shape.contains(grid)
    else:
        votes = np.zeros(ext, dtype=int)
        for corner in np.ndindex(*(2,) * n):
            d = (np.asarray(corner) - 0.5) * (h / 2)
            votes += shape.contains(grid + d)
        half = 2 ** (n - 1)
        occ = np.where(votes == half, shape.contains(grid), votes > half)
    return VoxelSet(occ, h, ilo * h)
