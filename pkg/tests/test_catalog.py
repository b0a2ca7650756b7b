import numpy as np
import pytest

from solitonkit import catalog
from solitonkit.catalog import EQUALS, FRACTION_ABOVE, MAX_BELOW, MIN_ABOVE, SCALAR, SPREAD_BELOW
from solitonkit.errors import CatalogError

REQUIRED = ["cigar", "flat", "gaussian_shrinker", "round_sphere", "product_line_cross_fiber",
            "euclidean_schwarzschild", "warped_control_non_einstein_fiber", "perturbed_non_soliton"]


def test_names_cover_required_entries():
    assert set(REQUIRED) <= set(catalog.names())
    assert len(catalog.names()) == len(set(catalog.names()))


@pytest.mark.parametrize("name", catalog.names())
def test_sweep_passes(entries, name):
    results = catalog.sweep(entries(name), samples=20, seed=0)
    assert results, f"{name} has no expected properties"
    failed = [r for r in results if not r.passed]
    assert not failed, failed


@pytest.mark.parametrize("name", catalog.names())
def test_expected_properties_carry_provenance(entries, name):
    for exp in entries(name).expected.values():
        assert exp.provenance in {"literature", "trivial", "derived"}
        assert exp.tol is not None
        assert exp.relation in {MAX_BELOW, MIN_ABOVE, EQUALS, SPREAD_BELOW, FRACTION_ABOVE, SCALAR}


def test_cigar_entry(entries):
    e = entries("cigar")
    np.testing.assert_allclose(e.chart.metric_at([1.0, 2.0]), np.eye(2) / 6.0)
    geo = e.soliton.geometry([1.0, 2.0], 0)
    assert -float(geo.f.value) == pytest.approx(np.log(6.0))
    assert e.expected["hamilton_energy"].target == 4.0
    assert e.is_steady and e.rho == 0.0


def test_flat_with_constant_potential():
    e = catalog.make("flat", n=5, F=2.0)
    assert e.chart.dim == 5
    assert {"flat", "d_flat", "is_soliton"} <= set(e.expected)
    assert all(r.passed for r in catalog.sweep(e, samples=5))


def test_schwarzschild_expectations(entries):
    e = entries("euclidean_schwarzschild")
    assert e.expected["ricci_flat"].tol == 1e-6
    assert e.expected["weyl_nonzero"].relation == MIN_ABOVE


def test_product_entry_is_soliton(entries):
    e = entries("product_line_cross_fiber")
    assert e.chart.dim == 5 and e.chart.fibration is not None
    for x in e.chart.sample(np.random.default_rng(0), 5):
        geo = e.soliton.geometry(x, 2)
        assert geo.norm(geo.soliton_tensor.value) < 1e-10


def test_warped_control_d_margin(entries):
    """The control's D norm stays well above its 1e-2 expectation over many samples."""
    e = entries("warped_control_non_einstein_fiber")
    vals = [catalog.POINT_QUANTITIES["d_norm"](e.soliton, x) for x in e.chart.sample(np.random.default_rng(9), 50)]
    assert min(vals) > 1e-2


def test_perturbed_factor_parameter():
    assert all(r.passed for r in catalog.sweep(catalog.make("perturbed_non_soliton", factor=1.5), samples=10))
    # factor 1 is the cigar itself, so the negative-control expectation must fail
    results = catalog.sweep(catalog.make("perturbed_non_soliton", factor=1.0), samples=10)
    assert not results[0].passed


def test_sweep_is_deterministic(entries):
    e = entries("round_sphere", n=4)
    assert catalog.sweep(e, samples=5, seed=3) == catalog.sweep(e, samples=5, seed=3)


def test_unknown_entry():
    with pytest.raises(CatalogError, match="unknown catalog entry"):
        catalog.make("eguchi_hanson")


@pytest.mark.parametrize("name,params", [
    ("round_sphere", {"radius": 0.0}),
    ("round_sphere", {"radius": -2.0}),
    ("round_sphere", {"n": 1}),
    ("flat", {"n": 1}),
    ("gaussian_shrinker", {"n": 1}),
    ("euclidean_schwarzschild", {"mass": -1.0}),
    ("product_line_cross_fiber", {"slope": 0.0}),
    ("product_line_cross_fiber", {"mass": 0.0}),
    ("bryant", {"n": 2}),
    ("bryant", {"normalization": 0.0}),
    ("cigar_product", {"k": 0}),
])
def test_invalid_params(name, params):
    with pytest.raises(CatalogError):
        catalog.make(name, **params)
