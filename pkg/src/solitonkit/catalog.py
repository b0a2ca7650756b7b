"""Reference geometries with known properties, used as fixtures and oracles."""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import jax.numpy as jnp
import numpy as np

from . import charts
from .charts import JaxField
from .errors import CatalogError, CriticalPointError, DimensionError
from .soliton import SOLITON_GATE, SolitonChart

# relation tags for expected properties
MAX_BELOW = "max_below"  # max over samples <= tol
MIN_ABOVE = "min_above"  # min over samples >= tol
EQUALS = "equals"  # every sample within tol of target
SPREAD_BELOW = "spread_below"  # max - min <= tol
FRACTION_ABOVE = "fraction_above"  # fraction of samples with value > target is >= tol
SCALAR = "scalar"  # a single (non-pointwise) value compared for equality / bound


@dataclass(frozen=True)
class Expected:
    quantity: str
    relation: str
    tol: float
    provenance: str  # "literature", "trivial" or "derived"
    target: object = None
    at: Optional[tuple] = None  # evaluate at this point only
    note: str = ""


@dataclass
class CatalogEntry:
    name: str
    chart: object
    soliton: Optional[SolitonChart]
    expected: dict
    expected_branch: Optional[str] = None
    profile: object = None
    params: dict = field(default_factory=dict)
    description: str = ""

    @property
    def potential(self):
        return None if self.soliton is None else self.soliton.potential

    @property
    def rho(self):
        return None if self.soliton is None else self.soliton.rho

    @property
    def is_steady(self):
        return self.soliton is not None and self.soliton.is_steady


# ---------------------------------------------------------------- point quantities


def _geo(s, x, order):
    return s.geometry(x, order)


def _q_soliton(s, x):
    geo = _geo(s, x, 2)
    return geo.norm(geo.soliton_tensor.value)


def _q_rel_soliton(s, x):
    geo = _geo(s, x, 2)
    return geo.norm(geo.soliton_tensor.value) / (1.0 + geo.riemann_scale)


def _q_riemann(s, x):
    return _geo(s, x, 2).riemann_scale


def _q_ricci(s, x):
    geo = _geo(s, x, 2)
    return geo.norm(geo.ricci.value)


def _q_weyl(s, x):
    geo = _geo(s, x, 2)
    return geo.norm(geo.weyl.value)


def _q_scalar(s, x):
    return float(_geo(s, x, 2).scalar.value)


def _q_energy(s, x):
    geo = _geo(s, x, 2)
    return float(geo.scalar.value) + geo.grad_norm**2


def _q_d_norm(s, x):
    geo = _geo(s, x, 3)
    return geo.norm(geo.d_via_weyl.value)


POINT_QUANTITIES: dict[str, Callable] = {
    "soliton_residual": _q_soliton,
    "relative_soliton_residual": _q_rel_soliton,
    "riemann_norm": _q_riemann,
    "ricci_norm": _q_ricci,
    "weyl_norm": _q_weyl,
    "scalar": _q_scalar,
    "hamilton_energy": _q_energy,
    "d_norm": _q_d_norm,
}


# ---------------------------------------------------------------- constructors


def _cigar_potential(scale=1.0):
    return JaxField(lambda x: scale * jnp.log(1.0 + x[0] ** 2 + x[1] ** 2))


def _cigar(params):
    chart = charts.cigar_chart()
    s = SolitonChart.steady(chart, _cigar_potential(), label="cigar", hamilton_constant=4.0)
    expected = {
        "scalar_at_origin": Expected("scalar", EQUALS, 1e-10, "derived", 4.0, at=(0.0, 0.0),
                                     note="conformal oracle R = 4/(1+x^2+y^2)"),
        "is_soliton": Expected("soliton_residual", MAX_BELOW, 1e-8, "literature"),
        "hamilton_energy": Expected("hamilton_energy", EQUALS, 1e-8, "derived", 4.0,
                                    note="R + |grad F|^2 = 4/(1+r^2) + 4r^2/(1+r^2)"),
    }
    return CatalogEntry("cigar", chart, s, expected, "inconclusive",
                        description="Hamilton's cigar (dx^2+dy^2)/(1+x^2+y^2), F = log(1+x^2+y^2)")


def _flat(params):
    n = int(params.get("n", 5))
    c = float(params.get("F", 0.0))
    if n < 2:
        raise CatalogError("flat: n must be >= 2")
    chart = charts.flat_chart(n)
    F = JaxField(lambda x: c + 0.0 * x[0])
    s = SolitonChart.steady(chart, F, label=f"flat R^{n}", hamilton_constant=0.0)
    expected = {
        "flat": Expected("riemann_norm", MAX_BELOW, 1e-12, "trivial"),
        "is_soliton": Expected("soliton_residual", MAX_BELOW, 1e-12, "trivial"),
        "hamilton_energy": Expected("hamilton_energy", EQUALS, 1e-12, "trivial", 0.0),
    }
    if n >= 3:
        expected["d_flat"] = Expected("d_norm", MAX_BELOW, 1e-12, "trivial")
    return CatalogEntry("flat", chart, s, expected, "ricci_flat_constant_potential", params={"n": n, "F": c},
                        description=f"Euclidean R^{n} with constant potential")


def _gaussian(params):
    n = int(params.get("n", 3))
    if n < 2:
        raise CatalogError("gaussian_shrinker: n must be >= 2")
    chart = charts.flat_chart(n)
    f = JaxField(lambda x: 0.25 * jnp.dot(x, x))
    s = SolitonChart(chart, f, rho=0.5, label=f"gaussian shrinker on R^{n}")
    expected = {
        "is_soliton": Expected("soliton_residual", MAX_BELOW, 1e-12, "trivial", note="Hess f = g/2"),
        "flat": Expected("riemann_norm", MAX_BELOW, 1e-12, "trivial"),
    }
    if n >= 3:
        expected["d_flat"] = Expected("d_norm", MAX_BELOW, 1e-12, "trivial")
    return CatalogEntry("gaussian_shrinker", chart, s, expected, None, params={"n": n},
                        description="flat R^n with f = |x|^2/4 and rho = 1/2")


def _round_sphere(params):
    n = int(params.get("n", 4))
    a = float(params.get("radius", 1.0))
    if a <= 0:
        raise CatalogError("round_sphere: radius must be positive")
    if n < 2:
        raise CatalogError("round_sphere: n must be >= 2")
    chart = charts.sphere_chart(n, a)
    rho = (n - 1) / a**2
    s = SolitonChart(chart, JaxField(lambda x: 0.0 * x[0]), rho=rho, label=chart.label)
    expected = {
        "scalar": Expected("scalar", EQUALS, 1e-8, "trivial", n * (n - 1) / a**2),
        "is_soliton": Expected("soliton_residual", MAX_BELOW, 1e-8, "trivial", note="Einstein with constant potential"),
    }
    if n >= 3:
        expected["d_flat"] = Expected("d_norm", MAX_BELOW, 1e-8, "literature",
                                      note="Einstein with a constant potential has D = 0")
        expected["conformally_flat"] = Expected("weyl_norm", MAX_BELOW, 1e-8, "trivial")
    return CatalogEntry("round_sphere", chart, s, expected, None, params={"n": n, "radius": a},
                        description=f"round S^{n} of radius {a:g}, rho = (n-1)/a^2, constant f")


def _product(params):
    from .warped import analytic_profile, profile_to_chart, schwarzschild_fiber

    m = float(params.get("mass", 1.0))
    slope = float(params.get("slope", 1.0))
    if m <= 0:
        raise CatalogError("product_line_cross_fiber: mass must be positive")
    if slope == 0:
        raise CatalogError("product_line_cross_fiber: slope must be nonzero (use euclidean_schwarzschild)")
    profile = analytic_profile(lambda r: 1.0 + 0.0 * r, lambda r: slope * r, 5, 0.0, -5.0, 5.0, points=11)
    chart, F = profile_to_chart(profile, schwarzschild_fiber(m))
    s = SolitonChart.steady(chart, F, label=f"R x euclidean schwarzschild (m={m:g})", hamilton_constant=slope**2)
    expected = {
        "is_soliton": Expected("soliton_residual", MAX_BELOW, 1e-8, "derived"),
        "ricci_flat": Expected("ricci_norm", MAX_BELOW, 1e-6, "derived"),
        "d_flat": Expected("d_norm", MAX_BELOW, 1e-4, "derived",
                           note="C = 0 (Ricci-flat) and W(., ., ., grad F) = 0 along the line factor"),
        "hamilton_energy": Expected("hamilton_energy", EQUALS, 1e-8, "trivial", slope**2),
    }
    return CatalogEntry("product_line_cross_fiber", chart, s, expected, "product_ricci_flat_fiber", profile,
                        {"mass": m, "slope": slope}, "R x euclidean Schwarzschild (n = 5), F = slope * t")


def _schwarzschild(params):
    m = float(params.get("mass", params.get("m", 1.0)))
    if m <= 0:
        raise CatalogError("euclidean_schwarzschild: mass must be positive")
    chart = charts.euclidean_schwarzschild_chart(m)
    s = SolitonChart.steady(chart, JaxField(lambda x: 0.0 * x[0]), label=chart.label, hamilton_constant=0.0)
    expected = {
        "ricci_flat": Expected("ricci_norm", MAX_BELOW, 1e-6, "derived"),
        "weyl_nonzero": Expected("weyl_norm", MIN_ABOVE, 1e-3, "derived"),
        "is_soliton": Expected("soliton_residual", MAX_BELOW, 1e-6, "derived"),
    }
    return CatalogEntry("euclidean_schwarzschild", chart, s, expected, "ricci_flat_constant_potential",
                        params={"mass": m}, description="Ricci-flat euclidean Schwarzschild 4-metric, constant potential")


def _warped_control(params):
    from .warped import analytic_profile, bumpy_fiber, profile_to_chart

    profile = analytic_profile(lambda r: 1.0 + 0.25 * r**2, lambda r: r, 5, 0.0, 0.5, 3.0, points=11)
    chart, F = profile_to_chart(profile, bumpy_fiber(4))
    s = SolitonChart.steady(chart, F, label="warped control over a non-Einstein fiber")
    expected = {
        "not_soliton": Expected("relative_soliton_residual", MIN_ABOVE, 10 * SOLITON_GATE, "derived"),
        "d_nonzero": Expected("d_norm", MIN_ABOVE, 1e-2, "derived", note="measured at build time"),
        "scalar_varies_on_slices": Expected("scan_scalar_spread", SCALAR, 1e-3, "derived", target=2.0,
                                            note="constancy scan at r = target"),
    }
    return CatalogEntry("warped_control_non_einstein_fiber", chart, s, expected, "not_a_soliton", profile,
                        description="dr^2 + (1 + r^2/4)^2 (dx^2 + (2 + sin x)^2 dy^2 + dz^2 + dw^2), F = r")


def _perturbed(params):
    factor = float(params.get("factor", 1.1))
    chart = charts.cigar_chart()
    s = SolitonChart.steady(chart, _cigar_potential(factor), label=f"cigar with F x {factor:g}")
    expected = {
        "not_soliton": Expected("relative_soliton_residual", FRACTION_ABOVE, 0.9, "trivial", 10 * SOLITON_GATE),
    }
    return CatalogEntry("perturbed_non_soliton", chart, s, expected, "not_a_soliton", params={"factor": factor},
                        description="cigar metric with the potential scaled by a factor")


@lru_cache(maxsize=16)
def bryant_profile(n, normalization=1.0):
    from .bryant import BryantConfig, integrate

    return integrate(BryantConfig(n=n, normalization=normalization))


def _bryant(params):
    from .warped import profile_to_chart, round_sphere_fiber

    n = int(params.get("n", 5))
    c = float(params.get("normalization", 1.0))
    if n < 3:
        raise CatalogError("bryant: n must be >= 3")
    if c <= 0:
        raise CatalogError("bryant: normalization must be positive")
    profile = bryant_profile(n, c)
    r_window = tuple(params.get("r_window", (0.1, 10.0)))
    chart, F = profile_to_chart(profile, round_sphere_fiber(n - 1), r_window=r_window)
    s = SolitonChart.steady(chart, F, label=f"bryant n={n}", hamilton_constant=c)
    expected = {
        "is_soliton": Expected("soliton_residual", MAX_BELOW, 1e-5, "derived"),
        "hamilton_energy": Expected("hamilton_energy", EQUALS, 1e-6, "trivial", c, note="C0 = R(0)"),
        "d_flat": Expected("d_norm", MAX_BELOW, 1e-4, "derived"),
        "nonnegative_scalar": Expected("scalar", MIN_ABOVE, 0.0, "literature"),
    }
    return CatalogEntry("bryant", chart, s, expected, "bryant", profile, {"n": n, "normalization": c},
                        f"numerically integrated Bryant soliton on R^{n}, R(0) = {c:g}")


def _cigar_product(params):
    k = int(params.get("k", 3))
    if k < 1:
        raise CatalogError("cigar_product: k must be >= 1")
    n = 2 + k

    def metric(x):
        c = 1.0 / (1.0 + x[0] ** 2 + x[1] ** 2)
        return jnp.diag(jnp.stack([c, c] + [jnp.ones_like(x[0])] * k))

    chart = charts.analytic_chart(n, metric, [-np.inf] * n, [np.inf] * n, f"cigar x R^{k}",
                                  window=([-3.0] * n, [3.0] * n))
    s = SolitonChart.steady(chart, _cigar_potential(), label=chart.label, hamilton_constant=4.0)
    expected = {
        "is_soliton": Expected("soliton_residual", MAX_BELOW, 1e-8, "derived"),
        "hamilton_energy": Expected("hamilton_energy", EQUALS, 1e-8, "derived", 4.0),
        "d_nonzero": Expected("d_norm", MIN_ABOVE, 1e-2, "derived", note="level sets circle x R^k are not umbilic"),
    }
    return CatalogEntry("cigar_product", chart, s, expected, "not_d_flat", params={"k": k},
                        description=f"cigar x R^{k}: a steady soliton with nonvanishing D")


_BUILDERS = {
    "cigar": _cigar,
    "flat": _flat,
    "gaussian_shrinker": _gaussian,
    "round_sphere": _round_sphere,
    "product_line_cross_fiber": _product,
    "euclidean_schwarzschild": _schwarzschild,
    "warped_control_non_einstein_fiber": _warped_control,
    "perturbed_non_soliton": _perturbed,
    "bryant": _bryant,
    "cigar_product": _cigar_product,
}


def names():
    return list(_BUILDERS)


def make(name, **params):
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise CatalogError(f"unknown catalog entry {name!r}; known: {', '.join(_BUILDERS)}") from None
    return builder(params)


# ---------------------------------------------------------------- sweep


@dataclass(frozen=True)
class PropertyResult:
    name: str
    quantity: str
    relation: str
    tol: float
    target: object
    value: float
    passed: bool
    provenance: str


def _check(exp, values):
    v = np.asarray(values, dtype=float)
    if exp.relation == MAX_BELOW:
        value = float(v.max())
        return value, value <= exp.tol
    if exp.relation == MIN_ABOVE:
        value = float(v.min())
        return value, value >= exp.tol
    if exp.relation == EQUALS:
        value = float(np.max(np.abs(v - exp.target)))
        return value, value <= exp.tol
    if exp.relation == SPREAD_BELOW:
        value = float(np.ptp(v))
        return value, value <= exp.tol
    if exp.relation == FRACTION_ABOVE:
        value = float(np.mean(v > exp.target))
        return value, value >= exp.tol
    raise ValueError(f"unknown relation {exp.relation!r}")


def sweep(entry, samples=20, seed=0):
    """Check every expected property of ``entry``; returns one PropertyResult per property."""
    from .level_set import constancy_scan

    s = entry.soliton
    pts = entry.chart.sample(np.random.default_rng(seed), samples)
    results = []
    for name, exp in entry.expected.items():
        if exp.quantity == "scan_scalar_spread":
            value = constancy_scan(s, exp.target, samples=samples, seed=seed).scalar_spread
            passed = value >= exp.tol
        else:
            fn = POINT_QUANTITIES[exp.quantity]
            where = [np.asarray(exp.at, dtype=float)] if exp.at is not None else pts
            values = []
            for x in where:
                try:
                    values.append(fn(s, x))
                except (CriticalPointError, DimensionError):
                    continue
            value, passed = _check(exp, values)
        results.append(PropertyResult(name, exp.quantity, exp.relation, exp.tol, exp.target, value, bool(passed),
                                      exp.provenance))
    return results
