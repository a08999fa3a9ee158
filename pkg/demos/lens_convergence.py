"""Grid convergence of the ball-indicator curvature on the unit disk.

On a disk of radius R the exact value at distance ``d`` from the center is
``pi r^2 - 2 * lens(R, r, d)``.  The table shows the error at the point
(R, 0) and the worst error over boundary cell centers as h halves.

    python3 demos/lens_convergence.py
"""
import math

import numpy as np

from nlcurv import Ball, RadialKernel, boundary_curvature, curvature_at, rasterize


def lens(R, r, d):
    if d >= R + r:
        return 0.0
    if d <= abs(R - r):
        return math.pi * min(R, r) ** 2
    a = R * R * math.acos((d * d + R * R - r * r) / (2 * d * R))
    b = r * r * math.acos((d * d + r * r - R * R) / (2 * d * r))
    c = 0.5 * math.sqrt((-d + R + r) * (d + R - r) * (d - R + r) * (d + R + r))
    return a + b - c


def main(R=1.0, r=0.5):
    k = RadialKernel.charball(r)
    exact = math.pi * r * r - 2 * lens(R, r, R)
    print(f"exact value at (R, 0): {exact:.6f}")
    print(f"{'h':>10} {'point err':>11} {'max err':>10} {'ratio':>6}")
    prev = None
    for p in range(6, 10):
        h = 2.0 ** -p
        A = rasterize(Ball((0, 0), R), h, padding=r + h)
        pt = abs(curvature_at(A, k, [R, 0.0]) - exact)
        f = boundary_curvature(A, k)
        ref = np.array([math.pi * r * r - 2 * lens(R, r, d) for d in np.linalg.norm(f.points, axis=1)])
        worst = float(np.max(np.abs(f.values - ref)))
        ratio = f"{worst / prev:.2f}" if prev else ""
        print(f"{h:10.6f} {pt:11.3e} {worst:10.3e} {ratio:>6}")
        prev = worst


if __name__ == "__main__":
    main()
