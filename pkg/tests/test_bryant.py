import numpy as np
import pytest

from conftest import bryant_point
from solitonkit.bryant import BryantConfig, asymptotics, integrate, origin_series, series_residual, unit_sphere_area
from solitonkit.errors import ProfileError
from solitonkit.soliton import relative_soliton_residual
from solitonkit.warped import analytic_profile


# ---------------------------------------------------------------- configuration and series


@pytest.mark.parametrize("kwargs", [{"n": 2}, {"n": 4, "normalization": 0.0}, {"n": 4, "normalization": -1.0},
                                    {"n": 4, "r_seed": 10.0, "r_max": 5.0}, {"n": 4, "series_order": 1}])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        BryantConfig(**kwargs)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_series_leading_terms(n):
    s = origin_series(BryantConfig(n=n))
    phis, Fs = s.derivatives(0.0, 2)
    assert phis[0] == 0.0 and phis[1] == 1.0 and phis[2] == 0.0
    assert Fs[1] == 0.0
    # R(0) = n F''(0) with the default normalization R(0) = 1
    assert n * Fs[2] == pytest.approx(1.0)
    assert np.all(s.phi_coeffs[::2] == 0.0) and np.all(s.F_coeffs[1::2] == 0.0)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
@pytest.mark.parametrize("c", [0.5, 1.0, 3.0])
def test_series_self_consistency_at_handoff(n, c):
    cfg = BryantConfig(n=n, normalization=c)
    assert series_residual(origin_series(cfg), n, cfg.lam, cfg.r_seed) < 1e-10


def test_series_residual_grows_with_radius():
    cfg = BryantConfig(n=4)
    s = origin_series(cfg)
    assert series_residual(s, 4, 2.0, 1e-3) < series_residual(s, 4, 2.0, 1e-1)


# ---------------------------------------------------------------- integration


def test_energy_conservation_n3_short():
    p = integrate(BryantConfig(n=3, r_max=100.0))
    assert np.ptp(p.meta["step_energy"]) < 1e-7
    assert np.ptp(p.energy()) < 1e-7


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_trajectory_invariants(n, bryant_profiles):
    p = bryant_profiles[n]
    c0 = p.meta["normalization"]
    assert np.max(np.abs(p.energy() - c0)) < 1e-7 * c0
    assert p.meta["step_min_dphi"] > 0 and np.all(p.dphi > 0)
    e1, e2 = p.ode_residual()
    assert max(e1.max(), e2.max()) < 1e-9
    R = p.scalar_curvature()
    assert np.all(R >= 0.0)
    assert R[0] == pytest.approx(1.0, abs=1e-6)


def test_scalar_curvature_decreasing_on_tail(bryant_profiles):
    p = bryant_profiles[5]
    R = p.scalar_curvature()
    tail = p.r >= 10.0
    assert np.all(np.diff(R[tail]) < 0)


def test_n4_assembled_chart_at_log_spaced_radii(entries):
    s = entries("bryant", n=4).soliton
    for r in np.geomspace(0.1, 10.0, 20):
        assert relative_soliton_residual(s, bryant_point(4, r)) < 1e-5


def test_normalization_matches_assembled_chart(entries):
    e = entries("bryant", n=5, normalization=2.0)
    R = float(e.soliton.geometry(bryant_point(5, 0.11), 2).scalar.value)
    assert R == pytest.approx(e.profile.scalar_curvature()[np.searchsorted(e.profile.r, 0.11)], rel=1e-3)
    assert e.profile.scalar_curvature()[0] == pytest.approx(2.0, abs=1e-6)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_scaling_covariance(n):
    """Normalizations c and 4c are the same soliton up to r -> r/2 and g -> g/4."""
    pc = integrate(BryantConfig(n=n, normalization=1.0, r_max=200.0))
    p4 = integrate(BryantConfig(n=n, normalization=4.0, r_max=100.0))
    r = np.geomspace(0.01, 150.0, 40)
    phi_c = np.array([pc.value(x) for x in r])
    phi_4 = np.array([p4.value(x / 2) for x in r])
    np.testing.assert_allclose(phi_c, 2.0 * phi_4, rtol=1e-7)
    R_c = np.interp(r, pc.r, pc.scalar_curvature())
    R_4 = np.interp(r / 2, p4.r, p4.scalar_curvature())
    np.testing.assert_allclose(R_c, R_4 / 4.0, rtol=1e-4)


# ---------------------------------------------------------------- asymptotics


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_asymptotic_exponents(n, bryant_profiles):
    rep = asymptotics(bryant_profiles[n])
    assert rep.curvature_decay_exponent == pytest.approx(-1.0, abs=0.05)
    assert rep.volume_growth_exponent == pytest.approx((n + 1) / 2, abs=0.1)
    assert rep.phi_growth_exponent == pytest.approx(0.5, abs=0.05)
    assert rep.energy_constant == pytest.approx(1.0, abs=1e-7)


def test_flat_profile_asymptotics():
    n = 4
    p = analytic_profile(lambda r: r, lambda r: 0.0 * r, n, n - 2, 0.0, 100.0, points=401)
    rep = asymptotics(p)
    assert rep.curvature_decay is None and rep.curvature_decay_exponent is None
    assert rep.volume_growth_exponent == pytest.approx(n, abs=1e-6)
    assert rep.as_dict()["curvature_decay_exponent"] is None


def test_tail_too_short():
    p = analytic_profile(lambda r: r, lambda r: 0.0 * r, 3, 1.0, 1.0, 5.0, points=20)
    with pytest.raises(ProfileError):
        asymptotics(p)


def test_unit_sphere_area():
    assert unit_sphere_area(1) == pytest.approx(2 * np.pi)
    assert unit_sphere_area(2) == pytest.approx(4 * np.pi)
    assert unit_sphere_area(3) == pytest.approx(2 * np.pi**2)
