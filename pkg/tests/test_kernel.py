import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import trapezoid
from scipy.spatial.transform import Rotation

from nlcurv.kernel import Family, RadialKernel, load_profile_table, unit_ball_volume

from oracles import dense_grid_max

FAMILIES = ["charball", "tent", "bump"]


def test_eval_examples():
    assert RadialKernel.charball(1.0).eval([0.5, 0.0]) == 1.0
    assert RadialKernel.charball(1.0).eval([1.5, 0.0]) == 0.0
    assert RadialKernel.tent(1.0).eval([0.0, 0.5]) == pytest.approx(0.5)


def test_eval_zero_at_and_past_horizon():
    for fam in FAMILIES:
        k = RadialKernel(fam, 0.7)
        assert k.eval([0.7, 0.0]) == 0.0
        assert k.eval([0.0, -3.0]) == 0.0


@pytest.mark.parametrize("z", [[math.nan, 0.0], [0.0, math.inf]])
def test_eval_rejects_nonfinite(z):
    with pytest.raises(ValueError):
        RadialKernel.tent(1.0).eval(z)


def test_eval_rejects_wrong_length():
    with pytest.raises(ValueError):
        RadialKernel.tent(1.0).eval([0.1, 0.2, 0.3])


def test_total_mass_examples():
    assert RadialKernel.charball(1.0).total_mass() == pytest.approx(math.pi, rel=1e-14)
    assert RadialKernel.tent(1.0).total_mass() == pytest.approx(math.pi / 3, rel=1e-14)
    assert RadialKernel.charball(2.0, dim=3).total_mass() == pytest.approx(4 / 3 * math.pi * 8, rel=1e-14)


def test_bump_mass_closed_form_matches_quadrature():
    k = RadialKernel.bump(0.8, dim=3)
    rho = np.linspace(0.0, 0.8, 100001)
    mu = (1 - (rho / 0.8) ** 2) ** 2
    ref = 3 * unit_ball_volume(3) * trapezoid(mu * rho**2, rho)
    assert k.total_mass() == pytest.approx(ref, rel=1e-8)


def test_ball_mass_examples():
    assert RadialKernel.charball(1.0).ball_mass(0.5) == pytest.approx(math.pi / 4)
    for fam in FAMILIES:
        assert RadialKernel(fam, 1.0).ball_mass(0.0) == 0.0
    assert RadialKernel.tent(1.0).ball_mass(1.0) == pytest.approx(math.pi / 3)


def test_ball_mass_rejects_negative():
    with pytest.raises(ValueError):
        RadialKernel.tent(1.0).ball_mass(-0.1)


def test_gradient_sup_examples():
    assert RadialKernel.tent(2.0).gradient_sup() == 0.5
    assert RadialKernel.charball(1.0).gradient_sup() == math.inf
    k = RadialKernel.bump(1.0)
    ref = dense_grid_max(lambda p: np.abs(2 * (1 - p**2) * (-2 * p)), 0.0, 1.0)
    assert k.gradient_sup() == pytest.approx(ref, rel=1e-9)
    assert k.gradient_sup() == pytest.approx(8 / (3 * math.sqrt(3)))


def test_regularity_labels():
    assert RadialKernel.charball(1.0).regularity == "indicator"
    assert RadialKernel.tent(1.0).regularity == "strictly_decreasing"
    assert RadialKernel.bump(1.0).regularity == "strictly_decreasing"
    assert RadialKernel.from_table([0, 0.5, 1], [1, 1, 0]).regularity is None


def test_family_aliases():
    assert Family.parse("CharacteristicBall") is Family.CHARBALL
    assert Family.parse("SmoothBump") is Family.BUMP
    assert Family.parse("tent") is Family.TENT
    with pytest.raises(ValueError):
        Family.parse("gaussian")


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_rejects_bad_horizon(bad):
    with pytest.raises(ValueError):
        RadialKernel.tent(bad)


def test_normalized_has_unit_mass():
    for fam in FAMILIES:
        assert RadialKernel(fam, 0.3, 3).normalized().total_mass() == pytest.approx(1.0, rel=1e-12)


def test_table_validation():
    with pytest.raises(ValueError, match="non-increasing"):
        RadialKernel.from_table([0, 0.5, 1], [1, 2, 0])
    with pytest.raises(ValueError, match="end with mu = 0"):
        RadialKernel.from_table([0, 1], [1, 0.5])
    with pytest.raises(ValueError, match="strictly increasing"):
        RadialKernel.from_table([0, 0.5, 0.5, 1], [1, 1, 1, 0])


def test_table_matches_tent_and_csv_roundtrip(tmp_path):
    p = tmp_path / "tent.csv"
    p.write_text("rho,mu\n0,1\n1,0\n")
    k = RadialKernel.from_csv(p)
    t = RadialKernel.tent(1.0)
    rho = np.linspace(0, 1.2, 97)
    np.testing.assert_allclose(k.profile(rho), t.profile(rho), atol=1e-15)
    assert k.total_mass() == pytest.approx(t.total_mass(), rel=1e-10)
    rho_t, mu_t = load_profile_table(p)
    assert list(rho_t) == [0.0, 1.0] and list(mu_t) == [1.0, 0.0]


def test_lipschitz_bound_forms():
    assert RadialKernel.charball(0.5).lipschitz_bound(123.0) == pytest.approx(4 * math.pi * 0.5)
    assert RadialKernel.tent(0.5).lipschitz_bound(math.pi) == pytest.approx(2 * 2 * math.pi)


unit_vectors = st.lists(st.floats(-1, 1, allow_nan=False), min_size=3, max_size=3)


@settings(max_examples=60, deadline=None)
@given(z=unit_vectors, seed=st.integers(0, 2**32 - 1), fam=st.sampled_from(FAMILIES))
def test_rotation_invariance(z, seed, fam):
    k = RadialKernel(fam, 1.0, 3)
    Q = Rotation.random(random_state=seed).as_matrix()
    assert k.eval(Q @ np.asarray(z)) == pytest.approx(k.eval(z), abs=1e-12)


@pytest.mark.parametrize("fam", FAMILIES + ["table"])
def test_profile_non_increasing(fam):
    if fam == "table":
        k = RadialKernel.from_table([0, 0.2, 0.6, 1.0], [2, 1.5, 1.5, 0])
    else:
        k = RadialKernel(fam, 1.0)
    v = k.profile(np.linspace(1e-9, 1.0, 20001))
    assert np.all(np.diff(v) <= 0)


@settings(max_examples=60, deadline=None)
@given(a=st.floats(0, 2), b=st.floats(0, 2), fam=st.sampled_from(FAMILIES), n=st.sampled_from([2, 3]))
def test_ball_mass_monotone(a, b, fam, n):
    k = RadialKernel(fam, 1.3, n)
    lo, hi = sorted((a, b))
    assert k.ball_mass(lo) <= k.ball_mass(hi)
    assert k.ball_mass(1.3) == pytest.approx(k.total_mass(), rel=1e-12)


@pytest.mark.parametrize("fam", ["tent", "bump"])
def test_derivative_matches_finite_difference(fam):
    k = RadialKernel(fam, 1.0)
    rho = np.linspace(0.05, 0.95, 37)
    errs = []
    for step in (1e-3, 5e-4):
        fd = (k.profile(rho + step) - k.profile(rho - step)) / (2 * step)
        errs.append(np.max(np.abs(fd - k.derivative(rho))))
    # central differences are exact for the tent and second order for the bump
    assert errs[0] < 1e-5
    if fam == "bump":
        assert errs[1] == pytest.approx(errs[0] / 4, rel=0.05)
