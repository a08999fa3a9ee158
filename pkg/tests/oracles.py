"""Independent reference computations used by the tests.

Nothing here calls into the quadrature code under test; each oracle is a
direct, slow evaluation of the defining formula.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def lens_area(R: float, r: float, d: float) -> float:
    """Area of the intersection of two disks with radii ``R``, ``r`` at center distance ``d``."""
    if d >= R + r:
        return 0.0
    if d <= abs(R - r):
        return math.pi * min(R, r) ** 2
    a = r * r * math.acos((d * d + r * r - R * R) / (2 * d * r))
    b = R * R * math.acos((d * d + R * R - r * r) / (2 * d * R))
    c = 0.5 * math.sqrt((-d + r + R) * (d + r - R) * (d - r + R) * (d + r + R))
    return a + b - c


def disk_boundary_curvature(R: float, r: float) -> float:
    """Exact ball-indicator curvature at a boundary point of a disk of radius ``R``."""
    return math.pi * r * r - 2.0 * lens_area(R, r, R)


def brute_curvature(occ: np.ndarray, h: float, origin, kernel_fn, x, total_mass: float) -> float:
    """Cell-center sum of ``J(x - y) * sign`` over every cell, rescaled to the exact kernel mass.

    ``kernel_fn`` maps an array of distances to profile values.  Cells
    outside the array count as exterior; their share is recovered from the
    full kernel sum.
    """
    occ = np.asarray(occ, dtype=bool)
    idx = np.argwhere(occ)
    centers = np.asarray(origin, dtype=float) + (idx + 0.5) * h
    inside = float(kernel_fn(np.linalg.norm(centers - np.asarray(x, dtype=float), axis=1)).sum())
    # full sum of the sampled kernel around x on the same lattice
    n = occ.ndim
    u = (np.asarray(x, dtype=float) - np.asarray(origin, dtype=float)) / h - 0.5
    frac = u - np.floor(u)
    # the kernel's support is bounded by the caller's choice of fn; scan a generous box
    m = 2
    while float(kernel_fn(np.array([m * h])).max()) > 0:
        m *= 2
    offs = np.arange(-m - 1, m + 2, dtype=float)
    grids = np.meshgrid(*[(offs - f) * h for f in frac], indexing="ij")
    rho = np.sqrt(sum(g * g for g in grids))
    full = float(kernel_fn(rho.ravel()).sum())
    del n
    return total_mass * (full - 2.0 * inside) / full


def brute_diameter(occ: np.ndarray, h: float) -> float:
    """Max pairwise distance between occupied cell centers plus the cell diagonal."""
    idx = np.argwhere(np.asarray(occ, dtype=bool)).astype(float) * h
    best = 0.0
    for a, b in itertools.combinations(range(len(idx)), 2):
        best = max(best, float(np.linalg.norm(idx[a] - idx[b])))
    return best + h * math.sqrt(occ.ndim)


def dense_grid_max(fn, lo: float, hi: float, n: int = 200001) -> float:
    xs = np.linspace(lo, hi, n)
    return float(np.max(fn(xs)))


def brute_variation(occ: np.ndarray, h: float, r: float, c1, c2) -> float:
    """``int_A |chi_{B_r}(x1 - y) - chi_{B_r}(x2 - y)| dy`` between two cell centers.

    Counts cells in the symmetric difference of the two sampled disks inside
    ``A``; each sampled-disk cell carries the weight ``pi r^2 / (lattice
    points in the disk)`` so that the sampled indicator has the exact mass.
    """
    idx = np.argwhere(np.asarray(occ, dtype=bool))
    d1 = np.linalg.norm((idx - np.asarray(c1)) * h, axis=1) < r
    d2 = np.linalg.norm((idx - np.asarray(c2)) * h, axis=1) < r
    m = int(math.ceil(r / h)) + 1
    g = np.arange(-m, m + 1) * h
    inside = int(np.count_nonzero(np.hypot(*np.meshgrid(g, g)) < r))
    return float(np.count_nonzero(d1 ^ d2)) * math.pi * r * r / inside


def column_runs(col: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of True as half-open index ranges, by a plain loop."""
    runs, start = [], None
    for j, v in enumerate(list(col) + [False]):
        if v and start is None:
            start = j
        elif not v and start is not None:
            runs.append((start, j))
            start = None
    return runs
