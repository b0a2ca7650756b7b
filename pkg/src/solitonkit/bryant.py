"""Numerical construction of the Bryant steady soliton.

The rotationally symmetric steady soliton on R^n is dr^2 + phi(r)^2 g_{S^{n-1}} with
fiber constant lam = n - 2.  The tip r = 0 is a regular singular point of the steady
system, so the solution is started from a power series at r_seed and continued with an
adaptive 8th-order Runge-Kutta method (DOP853).
"""

from dataclasses import asdict, dataclass, field
from math import gamma, pi

import numpy as np
from scipy.integrate import cumulative_simpson, solve_ivp

from .errors import IntegrationError, ProfileError
from .warped import OriginSeries, WarpedProfile, steady_derivatives, steady_rhs, warped_curvature


@dataclass(frozen=True)
class BryantConfig:
    n: int
    normalization: float = 1.0  # scalar curvature at the tip, R(0)
    r_max: float = 1e3
    r_seed: float = 1e-3
    series_order: int = 7
    rtol: float = 1e-10
    atol: float = 1e-12
    grid_points: int = 2000

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("the Bryant soliton needs n >= 3")
        if self.normalization <= 0:
            raise ValueError("normalization R(0) must be positive")
        if not 0 < self.r_seed < self.r_max:
            raise ValueError("need 0 < r_seed < r_max")
        if self.series_order < 3:
            raise ValueError("series_order must be at least 3")

    @property
    def lam(self):
        return float(self.n - 2)


def _series_residuals(p, q, n, lam):
    """Coefficient arrays of phi F'' + (n-1) phi'' and phi phi' F' + phi phi'' + (n-2) phi'^2 - lam."""
    P = np.polynomial.Polynomial(p)
    Q = np.polynomial.Polynomial(q)
    e1 = P * Q.deriv(2) + (n - 1) * P.deriv(2)
    e2 = P * P.deriv() * Q.deriv() + P * P.deriv(2) + (n - 2) * P.deriv() ** 2 - lam
    return e1.coef, e2.coef


def _coef(c, k):
    return c[k] if k < len(c) else 0.0


def origin_series(cfg):
    """Taylor coefficients of phi (odd, through r^order) and F (even) at the tip.

    phi = r + p3 r^3 + ..., F = q2 r^2 + q4 r^4 + ... with F(0) = 0.  Since the Hessian
    of F at the tip is F''(0) g, tracing the soliton equation gives R(0) = n F''(0), which
    fixes q2 = R(0) / (2n); the r^1 balance of F'' = -(n-1) phi''/phi fixes p3.  Each
    further pair (p_{m+1}, q_m), m even, solves a 2x2 linear system read off from the
    r^{m-1} coefficient of the first equation and the r^m coefficient of the second.
    """
    n, lam = cfg.n, cfg.lam
    order = cfg.series_order if cfg.series_order % 2 else cfg.series_order - 1
    p = np.zeros(order + 1)
    q = np.zeros(order)
    p[1] = 1.0
    q[2] = cfg.normalization / (2 * n)
    p[3] = -cfg.normalization / (6 * n * (n - 1))
    for m in range(4, order, 2):
        def resid(a, b):
            pp, qq = p.copy(), q.copy()
            pp[m + 1], qq[m] = a, b
            e1, e2 = _series_residuals(pp, qq, n, lam)
            return np.array([_coef(e1, m - 1), _coef(e2, m)])

        base = resid(0.0, 0.0)
        M = np.column_stack([resid(1.0, 0.0) - base, resid(0.0, 1.0) - base])
        p[m + 1], q[m] = np.linalg.solve(M, -base)
    return OriginSeries(p, q, cfg.r_seed)


def series_residual(series, n, lam, r):
    """max |residual| of the steady system evaluated on the truncated series at r."""
    phis, Fs = series.derivatives(r, 2)
    e1 = Fs[2] + (n - 1) * phis[2] / phis[0]
    e2 = phis[0] * phis[1] * Fs[1] - (lam - phis[0] * phis[2] - (n - 2) * phis[1] ** 2)
    return max(abs(e1), abs(e2))


def _rhs(n, lam):
    def fun(r, y):
        phi, dphi, _, dF = y
        d2phi, d2F = steady_rhs((phi, dphi, dF), n, lam)
        return [dphi, d2phi, dF, d2F]

    return fun


def _phi_hits_zero(r, y):
    return y[0]


_phi_hits_zero.terminal = True
_phi_hits_zero.direction = -1


def integrate(cfg):
    """Integrate the steady system from the tip series to r_max; returns a steady profile."""
    n, lam = cfg.n, cfg.lam
    series = origin_series(cfg)
    phis, Fs = series.derivatives(cfg.r_seed, 1)
    y0 = [phis[0], phis[1], Fs[0], Fs[1]]
    try:
        sol = solve_ivp(
            _rhs(n, lam), (cfg.r_seed, cfg.r_max), y0, method="DOP853",
            rtol=cfg.rtol, atol=cfg.atol, dense_output=True, events=_phi_hits_zero,
        )
    except ProfileError as exc:
        raise IntegrationError(f"warping function left the positive region: {exc}") from None
    if sol.status == 1:
        raise IntegrationError(f"warping function reached zero at r = {sol.t_events[0][0]:.6g}")
    if sol.status != 0:
        raise IntegrationError(f"integration failed: {sol.message}")

    grid = np.concatenate([[0.0], np.geomspace(cfg.r_seed, cfg.r_max, cfg.grid_points)])
    rows = np.zeros((grid.size, 8))
    tip_phi, tip_F = series.derivatives(0.0, 3)
    rows[0] = [0.0, tip_phi[0], tip_phi[1], tip_phi[2], tip_phi[3], tip_F[0], tip_F[1], tip_F[2]]
    states = sol.sol(grid[1:])
    for i, (phi, dphi, F, dF) in enumerate(states.T, start=1):
        dp, dFs = steady_derivatives(phi, dphi, F, dF, n, lam, 3)
        rows[i] = [grid[i], dp[0], dp[1], dp[2], dp[3], dFs[0], dFs[1], dFs[2]]

    # diagnostics at the accepted steps
    phi, dphi, _, dF = sol.y
    d2phi, _ = steady_rhs((phi, dphi, dF), n, lam)
    R = warped_curvature(n, lam, phi, dphi, d2phi).scalar
    energy = R + dF**2
    meta = {
        "steps": int(sol.t.size),
        "step_radii": sol.t,
        "step_energy": energy,
        "step_min_dphi": float(dphi.min()),
        "nfev": int(sol.nfev),
        "normalization": cfg.normalization,
        "config": asdict(cfg),
    }
    return WarpedProfile(
        *rows.T, n=n, lam=lam, kind="steady_ode", series=series, meta=meta,
    )


def unit_sphere_area(k):
    """Area of the unit S^k."""
    return 2 * pi ** ((k + 1) / 2) / gamma((k + 1) / 2)


@dataclass(frozen=True)
class LogLogFit:
    slope: float
    slope_stderr: float
    residual_stderr: float
    window: tuple


@dataclass(frozen=True)
class AsymptoticsReport:
    curvature_decay: LogLogFit | None  # None when R vanishes on the tail (degenerate fit)
    volume_growth: LogLogFit
    phi_growth: LogLogFit
    energy_constant: float
    energy_spread: float
    notes: list = field(default_factory=list)

    @property
    def curvature_decay_exponent(self):
        return None if self.curvature_decay is None else self.curvature_decay.slope

    @property
    def volume_growth_exponent(self):
        return self.volume_growth.slope

    @property
    def phi_growth_exponent(self):
        return self.phi_growth.slope

    def as_dict(self):
        return {
            "curvature_decay_exponent": self.curvature_decay_exponent,
            "curvature_decay_fit": None if self.curvature_decay is None else asdict(self.curvature_decay),
            "volume_growth_exponent": self.volume_growth_exponent,
            "volume_growth_fit": asdict(self.volume_growth),
            "phi_growth_exponent": self.phi_growth_exponent,
            "phi_growth_fit": asdict(self.phi_growth),
            "energy_constant": self.energy_constant,
            "energy_spread": self.energy_spread,
            "notes": list(self.notes),
        }


def loglog_fit(r, y):
    x, z = np.log(r), np.log(y)
    coef, cov = np.polyfit(x, z, 1, cov="unscaled")
    resid = z - np.polyval(coef, x)
    dof = max(x.size - 2, 1)
    s2 = float(resid @ resid) / dof
    return LogLogFit(float(coef[0]), float(np.sqrt(s2 * cov[0, 0])), float(np.sqrt(s2)), (float(r[0]), float(r[-1])))


def asymptotics(profile, decades=1.0):
    """Log-log fits of R, Vol(B_r) and phi over the last ``decades`` of the profile."""
    r = profile.r
    positive = r[r > 0]
    if positive.size < 4 or profile.r_max / positive[0] < 10.0 ** decades:
        raise ProfileError("tail too short: the profile must span at least one decade in r")
    lo = profile.r_max / 10.0**decades
    tail = r >= lo
    notes = []

    R = profile.scalar_curvature()
    Rt = R[tail]
    scale = np.max(np.abs(R)) if R.size else 0.0
    if np.all(Rt > 1e-12 * max(scale, 1.0)):
        curv = loglog_fit(r[tail], Rt)
    else:
        curv = None
        notes.append("scalar curvature not positive on the tail; curvature decay fit is degenerate")

    integrand = profile.phi ** (profile.n - 1)
    vol = unit_sphere_area(profile.n - 1) * cumulative_simpson(integrand, x=r, initial=0.0)
    if r[0] > 0:
        notes.append("profile does not start at the tip; volumes exclude r < r_min")
    volume = loglog_fit(r[tail], vol[tail])
    phi = loglog_fit(r[tail], profile.phi[tail])

    energy = profile.energy()
    return AsymptoticsReport(curv, volume, phi, float(np.median(energy)), float(np.ptp(energy)), notes)
