"""Warped products ds^2 = dr^2 + phi(r)^2 gbar over an Einstein fiber.

Fiber convention: Ric(gbar) = lam * gbar, so the unit round S^{n-1} has lam = n - 2.
The closed-form formulas below are written in coordinate components of gbar; in an
orthonormal frame the fiber coefficients are divided by phi^2.
"""

from dataclasses import dataclass, field
from functools import cached_property
from math import comb, factorial
from typing import Optional

import numpy as np
from scipy.interpolate import BPoly

from . import charts
from .charts import Box, CoordinateChart, Fibration, JaxField
from .errors import DomainError, ProfileError
from .jets import Jet, contract, embed, univariate

CSV_COLUMNS = ("r", "phi", "dphi", "d2phi", "d3phi", "F", "dF", "d2F")


# ---------------------------------------------------------------- fibers


@dataclass(frozen=True)
class FiberSpec:
    fiber_dim: int
    einstein_lambda: Optional[float]  # None marks a deliberately non-Einstein fiber
    chart: Optional[CoordinateChart] = None
    label: str = ""
    round: bool = False

    def einstein_residual(self, samples=5, seed=0):
        """max ||Ric(gbar) - lam gbar|| over sampled fiber points."""
        from .geometry import PointGeometry

        if self.chart is None or self.einstein_lambda is None:
            raise ProfileError("Einstein check needs a fiber chart and a declared Einstein constant")
        rng = np.random.default_rng(seed)
        worst = 0.0
        for x in self.chart.sample(rng, samples):
            geo = PointGeometry(self.chart, x, 2)
            worst = max(worst, geo.norm(geo.ricci.value - self.einstein_lambda * geo.metric))
        return worst


def round_sphere_fiber(k, lam=None):
    """Round S^k with Einstein constant lam (default k - 1, the unit sphere)."""
    if k < 2:
        raise ProfileError("round sphere fibers need dimension >= 2")
    lam = float(k - 1) if lam is None else float(lam)
    if lam <= 0:
        raise ProfileError("a round sphere has positive Einstein constant")
    radius = np.sqrt((k - 1) / lam)
    return FiberSpec(k, lam, charts.sphere_chart(k, radius), f"S^{k}(radius {radius:g})", round=True)


def flat_torus_fiber(k):
    # periodic coordinates: the metric is defined on the universal cover, samplers use one period
    chart = charts.flat_chart(k)
    box = Box(tuple([-np.inf] * k), tuple([np.inf] * k), (tuple([0.0] * k), tuple([2 * np.pi] * k)))
    chart = CoordinateChart(k, chart.metric, box, f"flat T^{k}", margin=0.0)
    return FiberSpec(k, 0.0, chart, f"flat T^{k}")


def schwarzschild_fiber(mass=1.0):
    return FiberSpec(4, 0.0, charts.euclidean_schwarzschild_chart(mass), f"euclidean schwarzschild (m={mass:g})")


def bumpy_fiber(k=4):
    """dx^2 + (2 + sin x)^2 dy^2 + flat directions: scalar curvature varies with x."""
    import jax.numpy as jnp

    if k < 3:
        raise ProfileError("the non-Einstein control fiber needs dimension >= 3")

    def metric(x):
        diag = [jnp.ones_like(x[0]), (2.0 + jnp.sin(x[0])) ** 2] + [jnp.ones_like(x[0])] * (k - 2)
        return jnp.diag(jnp.stack(diag))

    box = Box(tuple([-np.inf] * k), tuple([np.inf] * k), (tuple([0.0] * k), tuple([2 * np.pi] * k)))
    chart = CoordinateChart(k, JaxField(metric), box, f"surface of revolution x T^{k - 2}", margin=0.0)
    return FiberSpec(k, None, chart, chart.label)


def canonical_fiber(k, lam):
    """Simplest fiber with a given Einstein constant: round sphere, flat torus or (for lam < 0) none."""
    if lam > 0:
        return round_sphere_fiber(k, lam)
    if lam == 0:
        return flat_torus_fiber(k)
    raise ProfileError("no built-in fiber with negative Einstein constant")


# ---------------------------------------------------------------- closed-form formulas


@dataclass(frozen=True)
class WarpedCurvature:
    r11: float
    fiber_coeff: float  # R_ab = fiber_coeff * gbar_ab
    scalar: float


def _check_phi(phi):
    if np.any(np.asarray(phi) <= 0):
        raise ProfileError("warping function must be positive")


def warped_curvature(n, lam, phi, dphi, d2phi):
    _check_phi(phi)
    r11 = -(n - 1) * d2phi / phi
    coeff = lam - phi * d2phi - (n - 2) * dphi**2
    scalar = (n - 1) / phi**2 * (lam - 2 * phi * d2phi - (n - 2) * dphi**2)
    return WarpedCurvature(r11, coeff, scalar)


@dataclass(frozen=True)
class WarpedHessian:
    rr: float
    ra: float
    fiber_coeff: float  # Hess_ab F = fiber_coeff * gbar_ab


def warped_hessian(dF, d2F, phi, dphi):
    _check_phi(phi)
    return WarpedHessian(d2F, 0.0 * d2F, phi * dphi * dF)


def steady_rhs(state, n, lam):
    """(phi'', F'') of the steady soliton system from (phi, phi', F')."""
    phi, dphi, dF = state
    _check_phi(phi)
    d2phi = (lam - (n - 2) * dphi**2 - phi * dphi * dF) / phi
    d2F = -(n - 1) * d2phi / phi
    return d2phi, d2F


def steady_taylor(phi, dphi, dF, n, lam, order):
    """Taylor coefficients at a regular point of the steady system.

    Returns (P, Q): phi(r + t) = sum P_k t^k for k <= order and F'(r + t) = sum Q_k t^k
    for k <= order - 1, obtained by matching powers in
    phi phi'' = lam - (n-2) phi'^2 - phi phi' F'  and  phi (F')' = -(n-1) phi''.
    """
    _check_phi(phi)
    P = np.zeros(order + 1)
    Q = np.zeros(max(order, 1))
    P[0] = phi
    if order >= 1:
        P[1] = dphi
    Q[0] = dF
    for k in range(order - 1):
        dP = np.array([(j + 1) * P[j + 1] for j in range(k + 1)])
        sq = np.dot(dP, dP[::-1])
        triple = sum(P[a] * dP[b] * Q[k - a - b] for a in range(k + 1) for b in range(k + 1 - a))
        rhs = (lam if k == 0 else 0.0) - (n - 2) * sq - triple
        known = sum(P[i] * (k - i + 2) * (k - i + 1) * P[k - i + 2] for i in range(1, k + 1))
        P[k + 2] = (rhs - known) / (P[0] * (k + 2) * (k + 1))
        knownq = sum(P[i] * (k - i + 1) * Q[k - i + 1] for i in range(1, k + 1))
        Q[k + 1] = (-(n - 1) * (k + 2) * (k + 1) * P[k + 2] - knownq) / (P[0] * (k + 1))
    return P, Q


def steady_derivatives(phi, dphi, F, dF, n, lam, order):
    """Derivatives phi^(k), F^(k), k = 0..order, implied by the steady system."""
    P, Q = steady_taylor(phi, dphi, dF, n, lam, order)
    phis = [P[k] * factorial(k) for k in range(order + 1)]
    Fs = [F] + [Q[k] * factorial(k) for k in range(order)]
    return phis, Fs


# ---------------------------------------------------------------- origin series


@dataclass(frozen=True)
class OriginSeries:
    """Truncated series phi = sum p_k r^k (odd), F = sum q_k r^k (even) at a smooth tip."""

    phi_coeffs: np.ndarray
    F_coeffs: np.ndarray
    r_seed: float

    def derivatives(self, r, order):
        p = np.polynomial.Polynomial(self.phi_coeffs)
        q = np.polynomial.Polynomial(self.F_coeffs)
        return [float(p.deriv(k)(r)) for k in range(order + 1)], [float(q.deriv(k)(r)) for k in range(order + 1)]


# ---------------------------------------------------------------- profiles


def _quintic(r, y, dy, d2y):
    return BPoly.from_derivatives(r, np.column_stack([y, dy, d2y]))


@dataclass(frozen=True, eq=False)
class WarpedProfile:
    """Samples of (phi, F) and derivatives on an increasing r grid.

    ``kind`` selects how values between grid points are produced:
    ``"steady_ode"`` interpolates the ODE state (phi, phi', F, F') with quintic Hermite
    splines and takes every higher derivative from the steady system itself;
    ``"sampled"`` uses quintic Hermite splines of phi and F directly;
    ``"analytic"`` evaluates the closed-form functions in ``exact``.
    """

    r: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    d2phi: np.ndarray
    d3phi: np.ndarray
    F: np.ndarray
    dF: np.ndarray
    d2F: np.ndarray
    n: int
    lam: float
    kind: str = "sampled"
    series: Optional[OriginSeries] = None
    exact: Optional[tuple] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if r.ndim != 1 or r.size < 2:
            raise ProfileError("profile grid needs at least two points")
        if np.any(np.diff(r) <= 0):
            raise ProfileError("profile grid must be strictly increasing")
        phi = np.asarray(self.phi, dtype=float)
        if np.any(phi[1:-1] <= 0) or np.any(phi < 0):
            raise ProfileError("warping function must be positive on the open grid interior")
        if self.kind not in ("steady_ode", "sampled", "analytic"):
            raise ProfileError(f"unknown profile kind {self.kind!r}")

    @property
    def r_min(self):
        return float(self.r[0])

    @property
    def r_max(self):
        return float(self.r[-1])

    def columns(self):
        return np.column_stack([getattr(self, c) for c in ("r", "phi", "dphi", "d2phi", "d3phi", "F", "dF", "d2F")])

    # -- interpolation

    @cached_property
    def _splines(self):
        if self.kind == "sampled":
            return {"phi": _quintic(self.r, self.phi, self.dphi, self.d2phi), "F": _quintic(self.r, self.F, self.dF, self.d2F)}
        # steady: interpolate the state; derivatives at nodes come from the system
        mask = self.phi > 0
        r = self.r[mask]
        d3F = np.array([
            steady_derivatives(p, dp, f, df, self.n, self.lam, 3)[1][3]
            for p, dp, f, df in zip(self.phi[mask], self.dphi[mask], self.F[mask], self.dF[mask])
        ])
        return {
            "phi": _quintic(r, self.phi[mask], self.dphi[mask], self.d2phi[mask]),
            "dphi": _quintic(r, self.dphi[mask], self.d2phi[mask], self.d3phi[mask]),
            "F": _quintic(r, self.F[mask], self.dF[mask], self.d2F[mask]),
            "dF": _quintic(r, self.dF[mask], self.d2F[mask], d3F),
            "r0": r[0],
        }

    @cached_property
    def _exact_fields(self):
        phi_fn, F_fn = self.exact
        return JaxField(lambda x: phi_fn(x[0])), JaxField(lambda x: F_fn(x[0]))

    def jets(self, r, order):
        """Lists [phi^(k)(r)] and [F^(k)(r)] for k = 0..order."""
        r = float(r)
        if not (self.r_min <= r <= self.r_max):
            raise DomainError(f"r = {r} outside profile range [{self.r_min}, {self.r_max}]")
        if self.kind == "analytic":
            fp, fF = self._exact_fields
            x = np.array([r])
            phis = [float(np.ravel(p)[0]) for p in fp.jets(x, order)]
            Fs = [float(np.ravel(p)[0]) for p in fF.jets(x, order)]
            return phis, Fs
        sp = self._splines
        if self.kind == "sampled":
            phis = [float(sp["phi"](r, nu=k)) if k <= 5 else 0.0 for k in range(order + 1)]
            Fs = [float(sp["F"](r, nu=k)) if k <= 5 else 0.0 for k in range(order + 1)]
            return phis, Fs
        if self.series is not None and r < max(sp["r0"], self.series.r_seed):
            return self.series.derivatives(r, order)
        state = (float(sp["phi"](r)), float(sp["dphi"](r)), float(sp["F"](r)), float(sp["dF"](r)))
        return steady_derivatives(*state, self.n, self.lam, order)

    def value(self, r):
        return self.jets(r, 0)[0][0]

    # -- pointwise diagnostics on the grid

    def scalar_curvature(self):
        """R at every grid point (origin row from the series limit R(0) = n F''(0))."""
        out = np.empty_like(self.r)
        pos = self.phi > 0
        out[pos] = warped_curvature(self.n, self.lam, self.phi[pos], self.dphi[pos], self.d2phi[pos]).scalar
        out[~pos] = self.n * self.d2F[~pos]
        return out

    def energy(self):
        """Hamilton quantity R + |dF|^2 at every grid point."""
        return self.scalar_curvature() + self.dF**2

    def ode_residual(self):
        """Pointwise residuals of the two steady equations (zero for exact steady profiles)."""
        pos = self.phi > 0
        phi, dphi, d2phi = self.phi[pos], self.dphi[pos], self.d2phi[pos]
        e1 = self.d2F[pos] + (self.n - 1) * d2phi / phi
        e2 = phi * dphi * self.dF[pos] - (self.lam - phi * d2phi - (self.n - 2) * dphi**2)
        return np.abs(e1), np.abs(e2)

    # -- persistence

    def to_csv(self, path):
        np.savetxt(path, self.columns(), delimiter=",", header=",".join(CSV_COLUMNS), comments="", fmt="%.16e")

    @classmethod
    def from_csv(cls, path, n=None, lam=None):
        with open(path) as fh:
            header = fh.readline().strip()
        cols = [c.strip() for c in header.split(",")]
        if tuple(cols) != CSV_COLUMNS:
            raise ProfileError(f"profile CSV header must be {','.join(CSV_COLUMNS)}, got {header!r}")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.shape[1] != len(CSV_COLUMNS):
            raise ProfileError("profile CSV has the wrong number of columns")
        arrays = dict(zip(CSV_COLUMNS, data.T))
        if n is None or lam is None:
            n_fit, lam_fit = infer_dimension_and_lambda(arrays)
            n = n_fit if n is None else n
            lam = lam_fit if lam is None else lam
        return cls.from_arrays(arrays, int(n), float(lam))

    @classmethod
    def from_arrays(cls, arrays, n, lam, steady_tol=1e-8):
        """Build a profile, detecting whether the samples solve the steady system."""
        trial = cls(**{k: np.asarray(arrays[k], dtype=float) for k in CSV_COLUMNS}, n=n, lam=lam, kind="sampled")
        e1, e2 = trial.ode_residual()
        scale = 1.0 + np.max(np.abs(trial.d2F)) + np.max(np.abs(trial.phi * trial.dphi * trial.dF))
        if max(e1.max(initial=0.0), e2.max(initial=0.0)) > steady_tol * scale:
            return trial
        series = None
        if trial.phi[0] == 0.0 and trial.r[0] == 0.0 and trial.d2F[0] > 0:
            from .bryant import BryantConfig, origin_series

            cfg = BryantConfig(n=n, normalization=n * float(trial.d2F[0]), r_seed=float(trial.r[1]))
            series = origin_series(cfg)
        return cls(**{k: np.asarray(arrays[k], dtype=float) for k in CSV_COLUMNS}, n=n, lam=lam, kind="steady_ode", series=series)


def infer_dimension_and_lambda(arrays):
    """Least-squares n and lam from the steady equations; fails for products (phi'' = 0)."""
    phi, dphi, d2phi, dF, d2F = (np.asarray(arrays[k]) for k in ("phi", "dphi", "d2phi", "dF", "d2F"))
    use = (phi > 0) & (np.abs(d2phi) > 1e-12 * (1 + np.abs(phi)))
    if use.sum() < 2:
        raise ProfileError("cannot infer the dimension from this profile; pass n and lambda explicitly")
    x = d2phi[use] / phi[use]
    n = 1.0 + float(np.dot(-d2F[use], x) / np.dot(x, x))
    n_int = int(round(n))
    lam_samples = phi * dphi * dF + phi * d2phi + (n_int - 2) * dphi**2
    return n_int, float(np.median(lam_samples[phi > 0]))


def analytic_profile(phi_fn, F_fn, n, lam, r_lo, r_hi, points=64):
    """Profile from closed-form ``jax.numpy`` functions, sampled on a uniform grid."""
    grid = np.linspace(r_lo, r_hi, points)
    fp = JaxField(lambda x: phi_fn(x[0]))
    fF = JaxField(lambda x: F_fn(x[0]))
    rows = []
    for r in grid:
        x = np.array([r])
        rows.append([float(np.ravel(v)[0]) for v in fp.jets(x, 3) + fF.jets(x, 2)])
    rows = np.array(rows)
    return WarpedProfile(
        grid, rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3], rows[:, 4], rows[:, 5], rows[:, 6],
        n=n, lam=float(lam), kind="analytic", exact=(phi_fn, F_fn),
    )


# ---------------------------------------------------------------- assembled charts


class WarpedMetricField:
    """Metric blockdiag(1, phi(r)^2 gbar(theta)) with jets from profile and fiber."""

    def __init__(self, profile, fiber_chart):
        self.profile = profile
        self.fiber_chart = fiber_chart
        self.n = profile.n
        self.max_order = min(5, fiber_chart.order)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        phi = self.profile.value(x[0])
        g = np.zeros((self.n, self.n))
        g[0, 0] = 1.0
        g[1:, 1:] = phi**2 * self.fiber_chart.metric(x[1:])
        return g

    def jets(self, x, order):
        x = np.asarray(x, dtype=float)
        n = self.n
        phis, _ = self.profile.jets(x[0], order)
        phi2 = [sum(comb(m, j) * phis[j] * phis[m - j] for j in range(m + 1)) for m in range(order + 1)]
        scale = univariate(phi2, 0, n)
        fib = Jet(self.fiber_chart.metric.jets(x[1:], order), n - 1)
        block = contract(",ab->ab", scale, embed(fib, range(1, n), n))
        parts = []
        for m, p in enumerate(block.parts):
            out = np.zeros((n, n) + (n,) * m)
            out[1:, 1:] = p
            if m == 0:
                out[0, 0] = 1.0
            parts.append(out)
        return parts


class WarpedPotentialField:
    """F(r) on a warped chart (the steady potential as a function of the radial coordinate)."""

    def __init__(self, profile):
        self.profile = profile
        self.n = profile.n
        self.max_order = 6

    def __call__(self, x):
        return self.profile.jets(np.asarray(x)[0], 0)[1][0]

    def jets(self, x, order):
        _, Fs = self.profile.jets(np.asarray(x, dtype=float)[0], order)
        return univariate(Fs, 0, self.n).parts


def profile_to_chart(profile, fiber, margin=None, r_window=None):
    """Chart of dr^2 + phi^2 gbar plus the potential F(r), as ``(chart, potential_field)``.

    ``r_window`` optionally restricts where samplers place the radial coordinate.
    """
    if fiber is None or fiber.chart is None:
        raise ProfileError("assembling a warped chart needs an explicit fiber chart")
    if fiber.fiber_dim != profile.n - 1:
        raise ProfileError(f"fiber dimension {fiber.fiber_dim} does not match profile dimension n = {profile.n}")
    if profile.r.size < 4:
        raise ProfileError("grid too coarse: at least four radii are needed")
    fchart = fiber.chart
    fbox = fchart.domain
    margin = fchart.margin if margin is None else margin
    lower = (profile.r_min,) + tuple(fbox.lower)
    upper = (profile.r_max,) + tuple(fbox.upper)
    window = None
    r_lo, r_hi = (profile.r_min, profile.r_max) if r_window is None else r_window
    if fbox.window is not None or r_window is not None:
        flo = fbox.window[0] if fbox.window is not None else fbox.lower
        fhi = fbox.window[1] if fbox.window is not None else fbox.upper
        window = ((r_lo,) + tuple(flo), (r_hi,) + tuple(fhi))
    box = Box(lower, upper, window)
    field_ = WarpedMetricField(profile, fchart)
    fib = Fibration(0, profile, fiber)
    label = f"warped n={profile.n} over {fiber.label}"
    chart = CoordinateChart(profile.n, field_, box, label, margin=max(margin, 1e-3), fibration=fib)
    return chart, WarpedPotentialField(profile)


def warped_consistency(chart, point):
    """max deviation between generic chart curvature and the closed-form warped formulas."""
    from .geometry import PointGeometry

    fib = chart.fibration
    profile, fiber = fib.profile, fib.fiber
    geo = PointGeometry(chart, point, 2)
    r = float(point[0])
    phis, _ = profile.jets(r, 2)
    wc = warped_curvature(profile.n, fiber.einstein_lambda, phis[0], phis[1], phis[2])
    ric = geo.ricci.value
    gbar = fiber.chart.metric(np.asarray(point)[1:])
    diffs = [
        abs(ric[0, 0] - wc.r11),
        float(np.max(np.abs(ric[0, 1:]))),
        float(np.max(np.abs(ric[1:, 1:] - wc.fiber_coeff * gbar))),
        abs(float(geo.scalar.value) - wc.scalar),
    ]
    return max(diffs)
