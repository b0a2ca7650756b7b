"""Sort a numerical steady soliton into the branches of the D-flat classification.

A complete D-flat steady gradient soliton is Ricci-flat with constant potential, a
product of a line with a Ricci-flat manifold, or the Bryant soliton.  The decision
procedure below follows that trichotomy with numerical gates:

1. soliton residual gate (otherwise ``not_a_soliton``);
2. D gate (otherwise ``not_d_flat``);
3. |grad F| below the gradient gate everywhere: ``ricci_flat_constant_potential``;
4. warping-function behaviour of a profile (tip at phi = 0 or constant phi);
5. ``inconclusive`` when none of the above decides.

Every residual is relative, ``|T| / (1 + |Rm|)``, as in :mod:`solitonkit.soliton`.
Deciding "grad F vanishes on an open set" is replaced by a global maximum over the
samples, so a potential that is constant on one region but not another is reported
through the gradient evidence rather than detected.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import CriticalPointError, EmptySampleError, NonzeroRhoError, ProfileError
from .soliton import SolitonChart

BRANCHES = (
    "ricci_flat_constant_potential",
    "product_ricci_flat_fiber",
    "bryant",
    "not_d_flat",
    "not_a_soliton",
    "inconclusive",
)
DEFINITE = frozenset(BRANCHES) - {"inconclusive"}


@dataclass(frozen=True)
class Thresholds:
    soliton: float = 1e-4
    d_tensor: float = 1e-3
    gradient: float = 1e-6
    # profile shape tolerances: phi reaching zero, phi' vanishing, lam vanishing, tip smoothness
    shape: float = 1e-6

    def scaled(self, factor):
        return Thresholds(*(factor * v for v in asdict(self).values()))


@dataclass
class ClassificationReport:
    branch: str
    evidence: dict
    thresholds_used: Thresholds
    notes: list = field(default_factory=list)
    statement: str = ""

    def as_dict(self):
        return {
            "branch": self.branch,
            "evidence": dict(self.evidence),
            "thresholds_used": asdict(self.thresholds_used),
            "notes": list(self.notes),
            "statement": self.statement,
        }


def _statement(n):
    if n >= 5:
        return "trichotomy for complete D-flat steady solitons, n >= 5"
    if n == 4:
        return "four-dimensional D-flat case (D-flat implies conformally flat here)"
    return "no classification statement for this dimension; branches reported as a numerical extension"


# ---------------------------------------------------------------- chart evidence


def _chart_evidence(s, points):
    sol, dn, grad, ric, umb, mix = [], [], [], [], [], []
    from .level_set import level_diagnostics

    n = s.dim
    for x in points:
        geo = s.geometry(x, 3 if n >= 3 else 2)
        scale = 1.0 + geo.riemann_scale
        sol.append(geo.norm(geo.soliton_tensor.value) / scale)
        ric.append(geo.norm(geo.ricci.value) / scale)
        grad.append(geo.grad_norm / (1.0 + abs(float(geo.f.value))))
        if n >= 3:
            dn.append(geo.norm(geo.d_via_weyl.value) / scale)
        try:
            rep = level_diagnostics(s, x)
        except CriticalPointError:
            continue
        umb.append(rep.umbilicity_deficit / scale)
        mix.append(rep.normal_ricci_mix / scale)
    mx = lambda v: float(max(v)) if v else None  # noqa: E731
    return {
        "soliton_residual_max": mx(sol),
        "d_norm_max": mx(dn),
        "grad_max": mx(grad),
        "ricci_max": mx(ric),
        "umbilicity_max": mx(umb),
        "normal_ricci_mix_max": mx(mix),
        "samples": len(points),
    }


# ---------------------------------------------------------------- profile evidence


def _profile_evidence(profile, th, fiber=None):
    """Residuals and the phi-behaviour tag of a warped profile."""
    n, lam = profile.n, profile.lam
    e1, e2 = profile.ode_residual()
    R = profile.scalar_curvature()
    rm_scale = 1.0 + float(np.max(np.abs(R)))
    phi, dphi = profile.phi, profile.dphi
    phi_scale = float(np.max(np.abs(phi)))
    grad = np.abs(profile.dF) / (1.0 + np.abs(profile.F))
    ev = {
        "soliton_residual_max": float(max(np.max(e1), np.max(e2))) / rm_scale,
        "grad_max": float(np.max(grad)),
        "phi_min": float(np.min(phi)),
        "phi_max": phi_scale,
        "dphi_max": float(np.max(np.abs(dphi))),
        "lam": float(lam),
    }
    tip = phi[0] <= th.shape * phi_scale
    if tip:
        # smooth tip over a fiber with Einstein constant lam: phi'(0)^2 lam / (n - 2) = 1
        ev["tip_smoothness"] = float(abs(dphi[0] ** 2 * lam / (n - 2) - 1.0)) if n > 2 else None
        ev["phi_behavior"] = "vanishes_at_endpoint"
    elif ev["dphi_max"] <= th.shape * max(phi_scale, 1.0):
        ev["phi_behavior"] = "constant"
    else:
        ev["phi_behavior"] = "nonconstant_positive"
    return ev


def _profile_d_norm(profile, fiber, points=6):
    """max relative |D| on the assembled chart at a few radii (None without a usable fiber)."""
    from .warped import canonical_fiber, profile_to_chart

    if fiber is None or fiber.chart is None:
        try:
            fiber = canonical_fiber(profile.n - 1, profile.lam)
        except ProfileError:
            return None
    chart, F = profile_to_chart(profile, fiber)
    s = SolitonChart.steady(chart, F)
    lo, hi = chart.domain.sampling_bounds(chart.margin)
    r_lo = max(profile.r_min, 1e-2) if profile.r_min <= 0 else profile.r_min
    radii = np.geomspace(max(r_lo, lo[0]), hi[0], points) if r_lo > 0 else np.linspace(lo[0], hi[0], points)
    mid = 0.5 * (lo[1:] + hi[1:])
    worst = 0.0
    for r in radii:
        geo = s.geometry(np.concatenate([[r], mid]), 3)
        worst = max(worst, geo.norm(geo.d_via_weyl.value) / (1.0 + geo.riemann_scale))
    return worst


def _profile_branch(ev, profile, fiber, th, notes):
    tag = ev["phi_behavior"]
    if tag == "vanishes_at_endpoint":
        smooth = ev.get("tip_smoothness")
        if smooth is None or smooth > th.shape ** 0.5:
            notes.append("warping function vanishes but the tip is not smooth")
            return "inconclusive"
        if fiber is not None and fiber.chart is not None:
            if not fiber.round:
                notes.append("tip is smooth but the fiber is not a round sphere")
                return "inconclusive"
            notes.append("round fiber verified from fiber data")
        else:
            notes.append("fiber roundness assumed (no fiber data); unverified")
        return "bryant"
    if tag == "constant":
        if abs(ev["lam"]) <= th.shape:
            return "product_ricci_flat_fiber"
        notes.append("constant warping over a fiber with nonzero Einstein constant")
        return "inconclusive"
    notes.append("warping function positive and nonconstant on the whole interval")
    return "inconclusive"


# ---------------------------------------------------------------- entry point


def _classify_profile(profile, th, fiber=None):
    notes = []
    ev = _profile_evidence(profile, th, fiber)
    if ev["soliton_residual_max"] > th.soliton:
        return "not_a_soliton", ev, notes
    if profile.n >= 3:
        ev["d_norm_max"] = _profile_d_norm(profile, fiber)
        if ev["d_norm_max"] is None:
            notes.append("no fiber with this Einstein constant is available; D not evaluated")
        elif ev["d_norm_max"] > th.d_tensor:
            return "not_d_flat", ev, notes
    if ev["grad_max"] <= th.gradient:
        return "ricci_flat_constant_potential", ev, notes
    return _profile_branch(ev, profile, fiber, th, notes), ev, notes


def _classify_chart(s, th, samples, seed):
    notes = []
    points = s.chart.sample(np.random.default_rng(seed), samples)
    ev = _chart_evidence(s, points)
    if ev["soliton_residual_max"] > th.soliton:
        return "not_a_soliton", ev, notes
    if s.dim < 3:
        notes.append("D-tensor undefined for n = 2; no branch decision beyond the soliton gate")
        return "inconclusive", ev, notes
    if ev["d_norm_max"] > th.d_tensor:
        return "not_d_flat", ev, notes
    if ev["grad_max"] <= th.gradient:
        if ev["ricci_max"] > th.soliton:
            notes.append("potential constant but Ricci tensor does not vanish")
            return "inconclusive", ev, notes
        return "ricci_flat_constant_potential", ev, notes
    fib = s.chart.fibration
    if fib is not None and fib.profile is not None:
        pev = _profile_evidence(fib.profile, th, fib.fiber)
        ev.update({k: v for k, v in pev.items() if k not in ev})
        return _profile_branch(pev, fib.profile, fib.fiber, th, notes), ev, notes
    if ev["ricci_max"] <= th.soliton:
        # Ric = 0 and Hess F = 0 with grad F != 0: a parallel gradient splits off a line
        notes.append("pointwise rule: Ricci-flat with parallel nonzero gradient")
        return "product_ricci_flat_fiber", ev, notes
    notes.append("no fibration declared; pointwise level-set diagnostics only")
    return "inconclusive", ev, notes


def classify(source, thresholds=None, samples=24, seed=0, fiber=None):
    """Classify a steady :class:`SolitonChart` or :class:`WarpedProfile`."""
    from .warped import WarpedProfile

    th = thresholds or Thresholds()
    if isinstance(source, WarpedProfile):
        if source.r.size == 0:
            raise EmptySampleError("empty profile")
        branch, ev, notes = _classify_profile(source, th, fiber)
        n = source.n
    elif isinstance(source, SolitonChart):
        if not source.is_steady:
            raise NonzeroRhoError("the classifier handles steady solitons (rho = 0) only")
        if samples < 1:
            raise EmptySampleError("classification needs at least one sample point")
        branch, ev, notes = _classify_chart(source, th, samples, seed)
        n = source.dim
    else:
        raise TypeError(f"cannot classify {type(source).__name__}")
    notes.append("open-set vanishing of grad F replaced by a global maximum over samples")
    return ClassificationReport(branch, ev, th, notes, _statement(n))

