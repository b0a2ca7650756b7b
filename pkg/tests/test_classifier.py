import pytest

from solitonkit import catalog
from solitonkit.charts import JaxField
from solitonkit.classifier import BRANCHES, DEFINITE, Thresholds, classify
from solitonkit.errors import EmptySampleError, NonzeroRhoError
from solitonkit.soliton import SolitonChart
from solitonkit.warped import (
    CSV_COLUMNS,
    FiberSpec,
    WarpedProfile,
    analytic_profile,
    bumpy_fiber,
    flat_torus_fiber,
    round_sphere_fiber,
)

STEADY = [name for name in catalog.names() if name not in ("gaussian_shrinker", "round_sphere")]


@pytest.mark.parametrize("name", STEADY)
def test_catalog_expected_branch(entries, name):
    e = entries(name)
    rep = classify(e.soliton, samples=16)
    assert rep.branch == e.expected_branch, rep.evidence


@pytest.mark.parametrize("name", STEADY)
def test_loosening_thresholds_never_flips_definite_branches(entries, name):
    e = entries(name)
    strict = classify(e.soliton, samples=16).branch
    loose = classify(e.soliton, Thresholds().scaled(10.0), samples=16).branch
    if strict in DEFINITE and loose in DEFINITE:
        assert strict == loose
    else:
        assert strict == "inconclusive" or strict == loose


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_bryant_profiles(bryant_profiles, n):
    rep = classify(bryant_profiles[n])
    assert rep.branch == "bryant", rep.evidence
    assert rep.evidence["phi_behavior"] == "vanishes_at_endpoint"
    assert any("roundness assumed" in note for note in rep.notes)


def test_bryant_profile_with_round_fiber_data(bryant_profiles):
    rep = classify(bryant_profiles[5], fiber=round_sphere_fiber(4))
    assert rep.branch == "bryant"
    assert any("round fiber verified" in note for note in rep.notes)


def test_flat_constant_potential():
    rep = classify(catalog.make("flat", n=5, F=1.0).soliton)
    assert rep.branch == "ricci_flat_constant_potential"


def test_product_profile_branch():
    prof = analytic_profile(lambda r: 1.0 + 0.0 * r, lambda r: 0.7 * r, 5, 0.0, -3.0, 3.0, points=16)
    rep = classify(prof)
    assert rep.branch == "product_ricci_flat_fiber"
    assert rep.evidence["phi_behavior"] == "constant"


def test_product_schwarzschild_chart(entries):
    rep = classify(entries("product_line_cross_fiber").soliton)
    assert rep.branch == "product_ricci_flat_fiber"
    assert rep.evidence["d_norm_max"] < 1e-3


def test_linear_potential_on_flat_chart_without_fibration():
    from solitonkit.charts import flat_chart

    s = SolitonChart.steady(flat_chart(5), JaxField(lambda x: 2.0 * x[0] - x[3]))
    rep = classify(s)
    assert rep.branch == "product_ricci_flat_fiber"
    assert any("pointwise rule" in note for note in rep.notes)


def test_not_a_soliton_wins_over_other_evidence(entries):
    rep = classify(entries("perturbed_non_soliton").soliton)
    assert rep.branch == "not_a_soliton"
    assert rep.evidence["soliton_residual_max"] > Thresholds().soliton


def test_not_d_flat(entries):
    rep = classify(entries("cigar_product").soliton)
    assert rep.branch == "not_d_flat"
    assert rep.evidence["d_norm_max"] > 1e-2


def test_non_steady_profile_is_not_a_soliton(bryant_profiles):
    p = bryant_profiles[4]
    arrays = dict(zip(CSV_COLUMNS, p.columns().T))
    arrays["F"] = arrays["F"] * 1.1
    arrays["dF"] = arrays["dF"] * 1.1
    arrays["d2F"] = arrays["d2F"] * 1.1
    rep = classify(WarpedProfile.from_arrays(arrays, 4, 2.0))
    assert rep.branch == "not_a_soliton"


def test_cylinder_over_sphere_is_not_a_soliton():
    # phi = 1 over a round S^2 with constant F: Ric is nonzero while Hess F vanishes
    prof = analytic_profile(lambda r: 1.0 + 0.0 * r, lambda r: 0.0 * r, 3, 1.0, -1.0, 1.0, points=8)
    assert classify(prof).branch == "not_a_soliton"


def test_bryant_profile_over_non_round_fiber_is_not_d_flat(bryant_profiles):
    rep = classify(bryant_profiles[5], fiber=FiberSpec(4, 3.0, bumpy_fiber(4).chart, "not round", round=False))
    assert rep.branch == "not_d_flat"


def test_report_fields(entries):
    rep = classify(entries("bryant", n=5).soliton, samples=8)
    d = rep.as_dict()
    assert set(d) == {"branch", "evidence", "thresholds_used", "notes", "statement"}
    assert d["thresholds_used"] == {"soliton": 1e-4, "d_tensor": 1e-3, "gradient": 1e-6, "shape": 1e-6}
    assert rep.branch in BRANCHES
    assert "n >= 5" in rep.statement
    assert classify(entries("bryant", n=4).soliton, samples=4).statement.startswith("four-dimensional")
    assert "numerical extension" in classify(entries("bryant", n=3).soliton, samples=4).statement


def test_torus_fiber_product_profile():
    prof = analytic_profile(lambda r: 1.0 + 0.0 * r, lambda r: r, 4, 0.0, -2.0, 2.0, points=8)
    rep = classify(prof, fiber=flat_torus_fiber(3))
    assert rep.branch == "product_ricci_flat_fiber"


def test_classifier_errors(entries):
    with pytest.raises(NonzeroRhoError):
        classify(entries("gaussian_shrinker").soliton)
    with pytest.raises(EmptySampleError):
        classify(entries("flat").soliton, samples=0)
    with pytest.raises(TypeError):
        classify("not a soliton")


def test_thresholds_scaled():
    t = Thresholds().scaled(10)
    assert (t.soliton, t.d_tensor, t.gradient, t.shape) == pytest.approx((1e-3, 1e-2, 1e-5, 1e-5))

