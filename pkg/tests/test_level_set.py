import jax.numpy as jnp
import numpy as np
import pytest

from conftest import bryant_point
from solitonkit import charts
from solitonkit.charts import JaxField
from solitonkit.errors import CriticalPointError, DomainError, EmptySampleError, FibrationError
from solitonkit.level_set import cluster_eigenvalues, constancy_scan, level_diagnostics
from solitonkit.soliton import SolitonChart
from solitonkit.warped import analytic_profile, flat_torus_fiber, profile_to_chart


def flat(n, f):
    return SolitonChart(charts.flat_chart(n), JaxField(f))


def test_linear_potential_planes_are_totally_geodesic():
    rep = level_diagnostics(flat(3, lambda x: x[0]), [0.3, 0.2, -0.4])
    assert np.all(rep.h == 0.0) and rep.H == 0.0 and rep.umbilicity_deficit == 0.0
    np.testing.assert_allclose(rep.unit_normal, [1.0, 0.0, 0.0])


def test_euclidean_sphere_of_radius_two():
    x = np.array([1.2, -1.6, 0.0])  # |x| = 2
    rep = level_diagnostics(flat(3, lambda x: 0.5 * jnp.dot(x, x)), x)
    np.testing.assert_allclose(rep.h, 0.5 * np.eye(2), atol=1e-14)
    assert rep.H == pytest.approx(1.0)
    assert rep.umbilicity_deficit < 1e-14
    np.testing.assert_allclose(rep.unit_normal, x / 2.0)


def test_h_is_symmetric_and_H_is_its_trace(entries):
    s = entries("cigar_product").soliton
    for x in s.chart.sample(np.random.default_rng(0), 10):
        rep = level_diagnostics(s, x)
        np.testing.assert_allclose(rep.h, rep.h.T, atol=1e-12)
        assert rep.H == pytest.approx(np.trace(rep.h))


def test_umbilic_exactly_when_pure_trace(entries):
    # cigar x R^3: level sets are circle x R^3, with curvature only along the circle
    rep = level_diagnostics(entries("cigar_product").soliton, [1.0, 0.5, 0.2, -0.3, 0.7])
    assert rep.umbilicity_deficit > 1e-2
    assert np.linalg.matrix_rank(rep.h, tol=1e-10) == 1


def test_bryant_n4_level_sets(entries):
    rep = level_diagnostics(entries("bryant", n=4).soliton, bryant_point(4, 1.0))
    assert rep.umbilicity_deficit < 1e-5
    assert rep.normal_ricci_mix < 1e-5
    assert [m for _, m in rep.ricci_eigs] in ([1, 3], [3, 1])
    assert rep.multiplicity_pattern == (1, 3)
    assert rep.H > 0  # level spheres of an increasing potential curve toward the tip


def test_bryant_h_matches_warping_function(entries):
    e = entries("bryant", n=5)
    r = 2.0
    phis, _ = e.profile.jets(r, 1)
    rep = level_diagnostics(e.soliton, bryant_point(5, r))
    np.testing.assert_allclose(rep.h, phis[1] / phis[0] * np.eye(4), atol=1e-8)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_bryant_multiplicity_pattern_at_all_radii(n, entries):
    s = entries("bryant", n=n).soliton
    for r in np.geomspace(0.2, 9.0, 8):
        assert level_diagnostics(s, bryant_point(n, r)).multiplicity_pattern == (1, n - 1)


def test_critical_point_raises(entries):
    with pytest.raises(CriticalPointError):
        level_diagnostics(flat(3, lambda x: 0.5 * jnp.dot(x, x)), [0.0, 0.0, 0.0])
    with pytest.raises(CriticalPointError):
        level_diagnostics(entries("flat", n=4).soliton, [0.0, 0.0, 0.0, 0.0])


def test_cluster_eigenvalues():
    assert cluster_eigenvalues([1.0, 2.0, 1.0 + 1e-9, 2.0]) == ((1.0 + 5e-10, 2), (2.0, 2))
    assert cluster_eigenvalues([0.0, 0.0, 0.0]) == ((0.0, 3),)
    assert cluster_eigenvalues([]) == ()
    assert len(cluster_eigenvalues([1.0, 1.001])) == 2


STEADY_D_FLAT = [("flat", {"n": 4}), ("product_line_cross_fiber", {}), ("bryant", {"n": 4}), ("bryant", {"n": 5})]


@pytest.mark.parametrize("name,params", STEADY_D_FLAT)
def test_d_flat_solitons_have_umbilic_level_sets(entries, name, params):
    e = entries(name, **params)
    tol = 1e-4
    for x in e.chart.sample(np.random.default_rng(1), 20):
        try:
            rep = level_diagnostics(e.soliton, x)
        except CriticalPointError:
            continue
        geo = e.soliton.geometry(x, 2)
        scale = 1.0 + geo.riemann_scale
        assert rep.umbilicity_deficit / scale < 10 * tol
        assert rep.normal_ricci_mix / scale < 10 * tol


# ---------------------------------------------------------------- constancy scans


def test_bryant_constancy_scan(entries):
    scan = constancy_scan(entries("bryant", n=4).soliton, 2.0, samples=32)
    assert max(scan.as_tuple()) < 1e-6


def test_line_cross_flat_torus_scan_is_exact():
    profile = analytic_profile(lambda r: 1.0 + 0.0 * r, lambda r: 2.0 * r, 5, 0.0, -3.0, 3.0, points=8)
    chart, F = profile_to_chart(profile, flat_torus_fiber(4))
    scan = constancy_scan(SolitonChart.steady(chart, F), 0.5, samples=16)
    assert scan.as_tuple() == (0.0, 0.0, 0.0)


def test_non_einstein_control_scan_detects_variation(entries):
    scan = constancy_scan(entries("warped_control_non_einstein_fiber").soliton, 2.0, samples=32)
    assert scan.scalar_spread > 1e-3


def test_constancy_scan_errors(entries):
    with pytest.raises(FibrationError):
        constancy_scan(entries("cigar_product").soliton, 1.0)
    s = entries("bryant", n=4).soliton
    with pytest.raises(EmptySampleError):
        constancy_scan(s, 2.0, samples=1)
    with pytest.raises(DomainError):
        constancy_scan(s, -1.0)
