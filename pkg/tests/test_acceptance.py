"""Acceptance suite: one test group per criterion, each recorded for the summary lines.

Run ``pytest tests/test_acceptance.py`` to see the per-criterion PASS/FAIL
block at the end of the session output.
"""
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from nlcurv.corpus import load_corpus
from nlcurv.fibers import check_domain_hypotheses, nondegeneracy_quotient
from nlcurv.harness import verify_main_theorem, verify_pairwise_equal_curvature
from nlcurv.kernel import RadialKernel
from nlcurv.measure import (
    CurvatureEvaluator, boundary_curvature, curvature_at, curvature_modulus, perimeter, perimeter_decomposition,
)
from nlcurv.setrep import rasterize
from nlcurv.shapes import Ball, Box, Ellipsoid, Union

from oracles import disk_boundary_curvature

FAMILIES = ["charball", "tent", "bump"]
R = 0.4
CORPUS_H = 1 / 128


@pytest.fixture(scope="module", autouse=True)
def titles(acceptance):
    for n, t in enumerate([
        "half-space face curvature below 4 r h, under 1 s",
        "lens oracle within 2%, error ratio 0.5 +- 0.15 under halving",
        "exact identities on 100 randomized cases",
        "constant curvature on a disk and a separated disk pair",
        "paired endpoint gap: symmetric corpus below C h, blobs above 10 C h",
        "sweep plane, symmetry defect and plane stability on the corpus",
        "curvature modulus below the analytic Lipschitz bound plus h",
        "nondegeneracy positive on the disk; diameter gate",
        "verify report bytes identical across thread counts",
    ], start=1):
        acceptance.title(n, t)


# 1


def test_half_space_face_point(acceptance):
    h = 1 / 256
    t0 = time.perf_counter()
    slab = rasterize(Box((-1.5, -1.0), (1.5, 0.0)), h, padding=R)
    val = curvature_at(slab, RadialKernel.charball(R), [0.0, 0.0])
    dt = time.perf_counter() - t0
    ok = abs(val) <= 4 * R * h and dt < 1.0
    acceptance.record(1, "slab h=1/256", ok, f"|H|={abs(val):.3g} bound={4 * R * h:.3g} time={dt:.2f}s")
    assert abs(val) <= 4 * R * h
    assert dt < 1.0


# 2


def test_lens_oracle(acceptance):
    k = RadialKernel.charball(0.5)
    ref = disk_boundary_curvature(1.0, 0.5)
    errs = []
    for h in (1 / 256, 1 / 512):
        A = rasterize(Ball((0, 0), 1), h, padding=0.6)
        errs.append(abs(curvature_at(A, k, [1.0, 0.0]) - ref))
    rel = errs[0] / ref
    ratio = errs[1] / errs[0]
    ok = rel <= 0.02 and abs(ratio - 0.5) <= 0.15
    acceptance.record(2, "disk R=1 r=0.5 x=(1,0)", ok, f"ref={ref:.5f} rel err={rel:.2e} ratio={ratio:.3f}")
    assert ref == pytest.approx(0.0839, abs=5e-5)
    assert rel <= 0.02
    assert abs(ratio - 0.5) <= 0.15


# 3


def _random_case(rng):
    parts = []
    for _ in range(int(rng.integers(1, 4))):
        c = tuple(np.round(rng.uniform(-0.5, 0.5, 2) * 64) / 64)
        if rng.random() < 0.5:
            parts.append(Ball(c, float(rng.uniform(0.2, 0.6))))
        else:
            parts.append(Ellipsoid(c, tuple(rng.uniform(0.2, 0.6, 2))))
    fam = FAMILIES[int(rng.integers(3))]
    r = float(rng.choice([0.2, 0.25, 0.3]))
    h = float(rng.choice([1 / 32, 1 / 64]))
    return Union(tuple(parts)), RadialKernel(fam, r), h


def test_exact_identities_randomized(acceptance):
    rng = np.random.default_rng(20261016)
    worst = {"reflect involution": 0, "translation equivariance": 0.0, "reflection equivariance": 0.0,
             "perimeter translation": 0.0, "five-term identity": 0.0}
    for _ in range(100):
        shape, k, h = _random_case(rng)
        A = rasterize(shape, h, padding=k.r + 4 * h)
        M = k.total_mass()
        lam = A.plane_level(int(rng.integers(0, 2 * A.shape[-1])))
        worst["reflect involution"] += int(not A.reflect(lam).reflect(lam).equals(A))

        pts = rng.uniform(A.origin, A.origin + np.array(A.shape) * h, size=(5, 2))
        j = int(rng.integers(-12, 13))
        t = j * h
        base = CurvatureEvaluator(A, k).at(pts)
        moved = CurvatureEvaluator(A.translate_last_axis(t), k).at(pts + [0.0, t])
        worst["translation equivariance"] = max(worst["translation equivariance"], np.max(np.abs(moved - base)) / M)
        mirror = pts * [1.0, -1.0] + [0.0, 2 * lam]
        refl = CurvatureEvaluator(A.reflect(lam), k).at(mirror)
        worst["reflection equivariance"] = max(worst["reflection equivariance"], np.max(np.abs(refl - base)) / M)

        P = perimeter(A, k)
        dP = abs(perimeter(A.translate_last_axis(t), k) - P) / P
        worst["perimeter translation"] = max(worst["perimeter translation"], dP)

        steps = max(1, int(math.floor(k.r / 4 / h + 1e-9)))
        d = perimeter_decomposition(A, k, int(rng.integers(1, steps + 1)) * h)
        worst["five-term identity"] = max(worst["five-term identity"], abs(d.residual) / d.scale)
    for name, v in worst.items():
        ok = v == 0 if name == "reflect involution" else v <= 1e-10
        acceptance.record(3, name, ok, f"worst={v:.3g} over 100 cases")
    assert worst["reflect involution"] == 0
    assert all(v <= 1e-10 for v in worst.values())


# 4


@pytest.mark.parametrize("label, shape", [
    ("disk", Ball((0, 0), 1)),
    # gap 0.5 exceeds the horizon, so neither disk sees the other
    ("separated pair", Union((Ball((0, 0), 1), Ball((2.5, 0), 1)))),
])
def test_constant_curvature_on_spheres(acceptance, label, shape):
    k = RadialKernel.charball(R)
    consts, within = [], []
    for h in (1 / 64, 1 / 128, 1 / 256):
        A = rasterize(shape, h, padding=R + h)
        spread = float(np.ptp(boundary_curvature(A, k).values))
        c = curvature_modulus(A, k)
        consts.append(spread / h)
        # boundary cell centers sit within h*sqrt(2)/2 of the circle, on either side
        within.append(spread <= math.sqrt(2) * c * h)
    stable = max(consts) <= 1.5 * min(consts)
    ok = all(within) and stable
    acceptance.record(4, label, ok, "spread/h = " + ", ".join(f"{c:.3f}" for c in consts))
    assert all(within)
    assert stable


# 5


@pytest.fixture(scope="module")
def corpus_sets():
    return {e.name: (e, rasterize(e.shape, CORPUS_H, padding=R + CORPUS_H)) for e in load_corpus()}


SYMMETRIC = [e.name for e in load_corpus("symmetric")]
BLOBS = [e.name for e in load_corpus("counterexample")]


@pytest.mark.parametrize("name", [
    pytest.param(n, marks=pytest.mark.xfail(
        strict=True, reason="the annulus breaks the ordered-curvature hypothesis: inner and outer "
                            "endpoints see different curvature")) if n == "annulus" else n
    for n in SYMMETRIC
])
def test_endpoint_gap_symmetric(acceptance, corpus_sets, name):
    e, A = corpus_sets[name]
    rec = verify_pairwise_equal_curvature(A, RadialKernel.charball(R), label=name).records[0]
    acceptance.record(5, name, rec.passed, f"gap={rec.measured:.4g} C h={rec.bound:.4g}")
    assert rec.passed


@pytest.mark.parametrize("name", BLOBS)
def test_endpoint_gap_blobs(acceptance, corpus_sets, name):
    e, A = corpus_sets[name]
    k = RadialKernel.charball(R)
    rec = verify_pairwise_equal_curvature(A, k, label=name).records[0]
    c_h = rec.bound
    ok = rec.measured > 10 * c_h and not rec.passed
    acceptance.record(5, name, ok, f"gap/(C h)={rec.measured / c_h:.1f}")
    assert not rec.passed
    assert rec.measured > 10 * c_h


# 6


def test_main_theorem_corpus(acceptance):
    k = RadialKernel.charball(R)
    t0 = time.perf_counter()
    applicable = []
    for e in load_corpus("symmetric"):
        rep = verify_main_theorem(e.shape, k, [1 / 256, 1 / 512], expected_plane=e.plane, padding=R, label=e.name)
        if rep.applicable:
            applicable.append(e.name)
            bad = [r.name for r in rep.records if not r.passed]
            acceptance.record(6, e.name, rep.passed, "all records pass" if not bad else "failed: " + "; ".join(bad))
            assert rep.passed, bad
        else:
            acceptance.record(6, e.name, True, "n/a: " + rep.records[0].detail["reason"])
    dt = time.perf_counter() - t0
    acceptance.record(6, "runtime", dt < 120, f"{dt:.1f}s for the corpus at h=1/256 and 1/512")
    assert {"disk", "ellipse"} <= set(applicable)
    assert dt < 120


# 7


@pytest.mark.parametrize("fam", FAMILIES)
def test_lipschitz_bound(acceptance, corpus_sets, fam):
    k = RadialKernel(fam, R)
    worst = 0.0
    for name, (e, A) in corpus_sets.items():
        c = curvature_modulus(A, k)
        bound = k.lipschitz_bound(A.volume()) + A.h
        worst = max(worst, c / bound)
    acceptance.record(7, fam, worst <= 1.0, f"max modulus/(bound + h)={worst:.3f} over {len(corpus_sets)} inputs")
    assert worst <= 1.0


# 8


def test_nondegeneracy_disk(acceptance):
    k = RadialKernel.charball(R)
    vals = [nondegeneracy_quotient(rasterize(Ball((0, 0), 1), h, padding=R + h), k).value for h in (1 / 64, 1 / 128)]
    ok = min(vals) > 0
    acceptance.record(8, "disk quotient", ok, ", ".join(f"{v:.4f}" for v in vals))
    assert ok


def test_diameter_gate(acceptance):
    k = RadialKernel.charball(R)
    h = 1 / 128
    cases = []
    for rad, expect in ((0.45, True), (0.6, True), (0.35, False), (0.2, False)):
        rep = check_domain_hypotheses(rasterize(Ball((0, 0), rad), h, padding=R + h), k)
        cases.append((f"disk radius {rad}", rep.diameter_ok, expect))
    # the gate at its edge: diameter equal to 2r must be rejected, slightly larger accepted
    A = rasterize(Ball((0, 0), 0.4), h, padding=R + h)
    d = A.diameter()
    at = check_domain_hypotheses(A, RadialKernel.charball(d / 2)).diameter_ok
    above = check_domain_hypotheses(A, RadialKernel.charball(d / 2 * (1 - 1e-9))).diameter_ok
    cases += [("diam == 2r", at, False), ("diam just above 2r", above, True)]
    ok = all(got == want for _, got, want in cases)
    acceptance.record(8, "diameter gate", ok, f"{sum(g == w for _, g, w in cases)}/{len(cases)} cases")
    for label, got, want in cases:
        assert got == want, label


# 9


def test_thread_determinism(acceptance, tmp_path):
    blobs, codes = [], []
    for t in (1, 4, 8):
        out = tmp_path / f"r{t}.json"
        proc = subprocess.run([sys.executable, "-m", "nlcurv", "verify", "--threads", str(t), "--report", str(out)],
                              capture_output=True)
        codes.append(proc.returncode)
        blobs.append((out.read_bytes(), proc.stdout))
    same = all(b == blobs[0] for b in blobs)
    acceptance.record(9, "corpus matrix h=1/128", same, f"exit codes {codes}, {len(blobs[0][0])} report bytes")
    assert same
    assert set(codes) <= {0, 1}
