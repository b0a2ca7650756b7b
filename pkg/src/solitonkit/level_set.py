"""Extrinsic geometry of the level sets of a soliton potential."""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EmptySampleError, FibrationError
from .geometry import frame_components, gram_schmidt

EIGEN_GAP = 1e-4


@dataclass(frozen=True)
class LevelSetReport:
    point: tuple
    unit_normal: np.ndarray  # coordinate components of e1
    frame: np.ndarray  # rows e1..en
    h: np.ndarray  # second fundamental form in the tangential frame e2..en
    H: float
    umbilicity_deficit: float
    normal_ricci_mix: float
    normal_ricci: float  # Ric(e1, e1)
    ricci_eigs: tuple  # ((value, multiplicity), ...) ascending, all eigenvalues of Ric
    tangential_ricci_eigs: tuple  # same clustering, restricted to the level set
    grad_norm: float
    scalar: float

    @property
    def multiplicity_pattern(self):
        """(1, multiplicities of the tangential clusters)."""
        return (1,) + tuple(m for _, m in self.tangential_ricci_eigs)


def cluster_eigenvalues(values, gap=EIGEN_GAP):
    """Group sorted eigenvalues whose consecutive gaps are below ``gap`` times the spectral scale."""
    vals = np.sort(np.asarray(values, dtype=float))
    if vals.size == 0:
        return ()
    scale = max(float(np.max(np.abs(vals))), 1e-12)
    groups = [[vals[0]]]
    for v in vals[1:]:
        if v - groups[-1][-1] <= gap * scale:
            groups[-1].append(v)
        else:
            groups.append([v])
    return tuple((float(np.mean(g)), len(g)) for g in groups)


def level_diagnostics(s, point, gap=EIGEN_GAP):
    """Second fundamental form, mean curvature and Ricci structure of the level set through ``point``.

    The unit normal points along the gradient of the potential the soliton was built
    from (grad F for steady input), and h_ab = Hess(e_a, e_b) / |grad| with the same
    potential, so round level spheres of an increasing potential have h > 0.
    """
    geo = s.geometry(point, 2)
    geo.check_regular()
    v = s.orientation * geo.grad_f.value
    E = gram_schmidt(geo.metric, v)
    n = geo.n
    hess = s.orientation * frame_components(geo.hess_f.value, E)
    h = hess[1:, 1:] / geo.grad_norm
    H = float(np.trace(h))
    deficit = float(np.linalg.norm(h - H / (n - 1) * np.eye(n - 1))) if n > 1 else 0.0
    ric = frame_components(geo.ricci.value, E)
    ric = 0.5 * (ric + ric.T)
    mix = float(np.max(np.abs(ric[0, 1:]))) if n > 1 else 0.0
    return LevelSetReport(
        point=tuple(geo.point.tolist()),
        unit_normal=E[0],
        frame=E,
        h=h,
        H=H,
        umbilicity_deficit=deficit,
        normal_ricci_mix=mix,
        normal_ricci=float(ric[0, 0]),
        ricci_eigs=cluster_eigenvalues(np.linalg.eigvalsh(ric), gap),
        tangential_ricci_eigs=cluster_eigenvalues(np.linalg.eigvalsh(ric[1:, 1:]), gap),
        grad_norm=geo.grad_norm,
        scalar=float(geo.scalar.value),
    )


@dataclass(frozen=True)
class ConstancyScan:
    level: float
    samples: int
    scalar_spread: float
    grad_sq_spread: float
    mean_curvature_spread: float

    def as_tuple(self):
        return (self.scalar_spread, self.grad_sq_spread, self.mean_curvature_spread)


def constancy_scan(s, level, samples=32, seed=0):
    """Spreads of R, |grad f|^2 and H over the slice {x_base = level} of a declared fibration."""
    fib = s.chart.fibration
    if fib is None:
        raise FibrationError(f"chart {s.chart.label!r} declares no fibration; level sets cannot be located")
    if samples < 2:
        raise EmptySampleError("constancy scan needs at least two samples")
    axis = fib.base_axis
    if not s.chart.domain.lower[axis] < level < s.chart.domain.upper[axis]:
        raise DomainError(f"level {level} outside the base range of chart {s.chart.label!r}")
    pts = s.chart.sample(np.random.default_rng(seed), samples)
    pts[:, axis] = level
    R, G, H = [], [], []
    for x in pts:
        rep = level_diagnostics(s, x)
        R.append(rep.scalar)
        G.append(rep.grad_norm**2)
        H.append(rep.H)
    spread = lambda a: float(np.ptp(a))  # noqa: E731
    return ConstancyScan(float(level), samples, spread(R), spread(G), spread(H))
