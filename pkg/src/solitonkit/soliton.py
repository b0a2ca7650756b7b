"""Gradient Ricci solitons Ric + Hess f = rho g and the identities they satisfy.

Internally every soliton is stored with the potential ``f`` of that equation.  Steady
solitons written as Ric = Hess F are built with :meth:`SolitonChart.steady`, which
stores f = -F; with this single convention D = C + W(., ., ., grad f) and
D = C - W(., ., ., grad F) are the same computation.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .charts import NegatedField
from .errors import CriticalPointError, DimensionError, NonzeroRhoError, NotASolitonError
from .geometry import PointGeometry, covariant_derivative, frame_components, gram_schmidt
from .jets import Jet, contract

SOLITON_GATE = 1e-4
CRITICAL_GRADIENT = 1e-7


class SolitonChart:
    def __init__(self, chart, potential, rho=0.0, orientation=1, label=None, hamilton_constant=None):
        self.chart = chart
        self.potential = potential
        self.rho = float(rho)
        # +1: level-set normal along grad f; -1: along grad F = -grad f (steady input)
        self.orientation = orientation
        self.label = label or chart.label
        self.hamilton_constant = hamilton_constant

    @classmethod
    def steady(cls, chart, F, label=None, hamilton_constant=None):
        """Steady soliton Ric = Hess F."""
        return cls(chart, NegatedField(F), 0.0, -1, label, hamilton_constant)

    @property
    def dim(self):
        return self.chart.dim

    @property
    def is_steady(self):
        return self.rho == 0.0

    def geometry(self, point, order=2):
        return SolitonGeometry(self, point, order)

    def sample(self, rng, count):
        return self.chart.sample(rng, count)

    def __repr__(self):
        return f"SolitonChart({self.label!r}, n={self.dim}, rho={self.rho:g})"


class SolitonGeometry(PointGeometry):
    """Curvature jets plus potential jets at one point."""

    def __init__(self, soliton, point, order=2):
        super().__init__(soliton.chart, point, order)
        self.soliton = soliton
        self.rho = soliton.rho
        self.f = Jet(soliton.potential.jets(self.point, order), self.n)

    @cached_property
    def df(self):
        """Covector jet d_i f."""
        return self.f.d()

    @cached_property
    def grad_f(self):
        """Vector jet f^i = g^{ij} d_j f."""
        return contract("ij,j->i", self.ginv.truncate(self.df.order), self.df)

    @cached_property
    def hess_f(self):
        return covariant_derivative(self.df, self.christoffel)

    @cached_property
    def grad_norm(self):
        return float(np.sqrt(max(self.df.value @ self.grad_f.value, 0.0)))

    def check_regular(self):
        threshold = CRITICAL_GRADIENT * (1.0 + abs(float(self.f.value)))
        if self.grad_norm < threshold:
            raise CriticalPointError(f"|grad f| = {self.grad_norm:.3g} below critical threshold {threshold:.3g}")

    @cached_property
    def soliton_tensor(self):
        """Ric + Hess f - rho g."""
        return self.ricci + self.hess_f - self.rho * self.g

    @cached_property
    def riemann_scale(self):
        return self.norm(self.riemann.value)

    @cached_property
    def d_direct(self):
        """D from Schouten and Einstein tensors (valid form on solitons)."""
        self._need_dim(3, "D-tensor")
        n = self.n
        A, E, g, df, v = self.schouten, self.einstein, self.g, self.df, self.grad_f
        Ev = contract("il,l->i", E, v)
        return (1.0 / (n - 2)) * (contract("jk,i->ijk", A, df) - contract("ik,j->ijk", A, df)) + (
            1.0 / ((n - 1) * (n - 2))
        ) * (contract("jk,i->ijk", g, Ev) - contract("ik,j->ijk", g, Ev))

    @cached_property
    def weyl_grad(self):
        """W_ijkl f^l."""
        return contract("ijkl,l->ijk", self.weyl, self.grad_f)

    @cached_property
    def d_via_weyl(self):
        """D = C + W(., ., ., grad f)."""
        self._need_dim(3, "D-tensor")
        return self.cotton + self.weyl_grad


def _geometry(s, point, order):
    return s.geometry(point, order)


def soliton_residual(s, point):
    """|| Ric + Hess f - rho g || in the g-norm."""
    geo = _geometry(s, point, 2)
    return geo.norm(geo.soliton_tensor.value)


def relative_soliton_residual(s, point):
    geo = _geometry(s, point, 2)
    return geo.norm(geo.soliton_tensor.value) / (1.0 + geo.riemann_scale)


def hamilton_identities(s, point):
    """(|| dR + 2 Ric(grad F) ||, R + |grad F|^2) for a steady soliton, F = -f."""
    if not s.is_steady:
        raise NonzeroRhoError("Hamilton's identities are stated for steady solitons only")
    geo = _geometry(s, point, 3)
    dR = geo.scalar.d().value
    ric_gradF = -geo.ricci.value @ geo.grad_f.value
    grad_res = geo.norm(dR + 2.0 * ric_gradF)
    energy = float(geo.scalar.value) + geo.grad_norm**2
    return grad_res, energy


def d_tensor(s, point, method="direct"):
    if s.dim < 3:
        raise DimensionError(f"the D-tensor needs dimension >= 3, got {s.dim}")
    if method == "direct":
        return _geometry(s, point, 2).d_direct.value
    if method == "via_weyl":
        return _geometry(s, point, 3).d_via_weyl.value
    raise ValueError(f"unknown method {method!r}; use 'direct' or 'via_weyl'")


@dataclass(frozen=True)
class BachResiduals:
    residual_24: float
    residual_rmk25: float


def bach_from_d(geo):
    """-(nabla_k D_ikj + (n-3)/(n-2) C_jli f^l) / (n-2), with f^l = grad f."""
    n = geo.n
    nD = covariant_derivative(geo.d_direct, geo.christoffel)  # [k, i, k', j] = nabla_k D_{i k' j}
    div = np.einsum("ab,aibj->ij", geo.ginv.value, nD.value)
    cf = np.einsum("jli,l->ij", geo.cotton.value, geo.grad_f.value)
    return -(1.0 / (n - 2)) * (div + (n - 3) / (n - 2) * cf)


def bach_consistency(s, point):
    if s.dim < 4:
        raise DimensionError(f"the Bach tensor needs dimension >= 4, got {s.dim}")
    geo = _geometry(s, point, 4)
    b24 = geo.bach.value
    return BachResiduals(geo.norm(b24 - geo.bach_from_weyl.value), geo.norm(b24 - bach_from_d(geo)))


def _frame(geo):
    """Orthonormal frame with e_1 along the (oriented) gradient of the potential."""
    geo.check_regular()
    v = geo.soliton.orientation * geo.grad_f.value
    return gram_schmidt(geo.metric, v)


@dataclass(frozen=True)
class DFlatResiduals:
    a: float  # ||D||
    b: float  # ||C|| + ||W(e1, ., ., .)||
    c: float  # ||C(grad f, ., .)|| + ||W(e1, ea, e1, eb)||
    d: float  # |div B . grad f| + ||W(e1, ea, e1, eb)||

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d)


def prop23_report(s, point, with_bach=True):
    """The four conditions equivalent to D = 0 for n >= 5, as residual norms."""
    if s.dim < 3:
        raise DimensionError(f"needs dimension >= 3, got {s.dim}")
    order = 5 if with_bach and s.dim >= 4 else 3
    geo = _geometry(s, point, order)
    E = _frame(geo)
    Wf = frame_components(geo.weyl.value, E)
    w1 = float(np.linalg.norm(Wf[0]))
    w1a1b = float(np.linalg.norm(Wf[0, 1:, 0, 1:]))
    a = geo.norm(geo.d_via_weyl.value)
    b = geo.norm(geo.cotton.value) + w1
    c = geo.norm(np.einsum("ijk,i->jk", geo.cotton.value, geo.grad_f.value)) + w1a1b
    d = float("nan")
    if order == 5:
        divb = geo.bach_divergence.value
        d = abs(float(divb @ geo.grad_f.value)) + w1a1b
    return DFlatResiduals(a, b, c, d)


@dataclass(frozen=True)
class NormIdentity:
    lhs: float
    rhs: float
    residual: float


def d_norm_identity(s, point, gate=SOLITON_GATE):
    """|D|^2 against its level-set expression (umbilicity deficit and tangential dR)."""
    n = s.dim
    if n < 3:
        raise DimensionError(f"the D-norm identity needs dimension >= 3, got {n}")
    geo = _geometry(s, point, 3)
    rel = geo.norm(geo.soliton_tensor.value) / (1.0 + geo.riemann_scale)
    if rel > gate:
        raise NotASolitonError(f"soliton residual {rel:.3g} exceeds {gate:g}; identity not asserted")
    E = _frame(geo)
    hess = frame_components(geo.hess_f.value, E)
    gn = geo.grad_norm
    h = hess[1:, 1:] / gn
    H = float(np.trace(h))
    deficit2 = float(np.sum((h - H / (n - 1) * np.eye(n - 1)) ** 2))
    dR = E @ geo.scalar.d().value
    tangential2 = float(dR[1:] @ dR[1:])
    lhs = geo.norm(geo.d_direct.value) ** 2
    rhs = 2.0 * gn**4 / (n - 2) ** 2 * deficit2 + tangential2 / (2.0 * (n - 1) * (n - 2))
    return NormIdentity(lhs, rhs, abs(lhs - rhs))


@dataclass(frozen=True)
class DSymmetry:
    skew: float  # ||D_ijk + D_jik||
    trace_12: float  # ||g^{ij} D_ijk||
    trace_13: float  # ||g^{ik} D_ijk||
    contraction: float  # ||D_ijk f^k - C_ijk f^k||
    methods: float  # ||D_direct - D_via_weyl||


def d_symmetry_report(s, point):
    if s.dim < 3:
        raise DimensionError(f"the D-tensor needs dimension >= 3, got {s.dim}")
    return _d_symmetry(_geometry(s, point, 3))


def _d_symmetry(geo):
    D = geo.d_direct.value
    ginv = geo.ginv.value
    v = geo.grad_f.value
    return DSymmetry(
        skew=geo.norm(D + np.transpose(D, (1, 0, 2))),
        trace_12=geo.norm(np.einsum("ij,ijk->k", ginv, D)),
        trace_13=geo.norm(np.einsum("ik,ijk->j", ginv, D)),
        contraction=geo.norm(np.einsum("ijk,k->ij", D - geo.cotton.value, v)),
        methods=geo.norm(D - geo.d_via_weyl.value),
    )


@dataclass
class SolitonPointReport:
    point: tuple
    soliton_residual: float
    relative_soliton_residual: float
    grad_f: tuple
    grad_norm: float
    scalar: float
    d_direct: np.ndarray | None = None
    d_via_weyl: np.ndarray | None = None
    d_norm: float | None = None
    d_symmetry: DSymmetry | None = None
    hamilton_grad_residual: float | None = None
    hamilton_energy: float | None = None
    weyl_divergence_residual: float | None = None
    bach_residuals: BachResiduals | None = None
    prop23: DFlatResiduals | None = None
    norm_identity: NormIdentity | None = None
    skipped: dict | None = None


def point_report(s, point, with_bach=True, with_prop23=True):
    """Every applicable soliton identity at one point; inapplicable ones are listed in ``skipped``."""
    n = s.dim
    skipped = {}
    order = 2
    if n >= 3:
        order = 3
    if n >= 4 and with_bach:
        order = 4
    geo = _geometry(s, point, order)
    rep = SolitonPointReport(
        point=tuple(geo.point.tolist()),
        soliton_residual=geo.norm(geo.soliton_tensor.value),
        relative_soliton_residual=geo.norm(geo.soliton_tensor.value) / (1.0 + geo.riemann_scale),
        grad_f=tuple(geo.grad_f.value.tolist()),
        grad_norm=geo.grad_norm,
        scalar=float(geo.scalar.value),
    )
    if s.is_steady:
        geo3 = geo if order >= 3 else _geometry(s, point, 3)
        rep.hamilton_grad_residual = geo3.norm(geo3.scalar.d().value - 2.0 * geo3.ricci.value @ geo3.grad_f.value)
        rep.hamilton_energy = float(geo3.scalar.value) + geo3.grad_norm**2
    else:
        skipped["hamilton"] = "nonzero rho"
    if n < 3:
        skipped["d_tensor"] = "dimension-too-small"
        rep.skipped = skipped
        return rep
    rep.d_direct = geo.d_direct.value
    rep.d_via_weyl = geo.d_via_weyl.value
    rep.d_norm = geo.norm(rep.d_via_weyl)
    rep.d_symmetry = _d_symmetry(geo)
    if n >= 4:
        rep.weyl_divergence_residual = geo.norm(geo.cotton.value + (n - 2) / (n - 3) * geo.weyl_divergence.value)
        if with_bach:
            b24 = geo.bach.value
            rep.bach_residuals = BachResiduals(geo.norm(b24 - geo.bach_from_weyl.value), geo.norm(b24 - bach_from_d(geo)))
    else:
        skipped["weyl_divergence"] = skipped["bach"] = "dimension-too-small"
    try:
        geo.check_regular()
    except CriticalPointError:
        skipped["norm_identity"] = skipped["prop23"] = "critical-point"
    else:
        try:
            rep.norm_identity = d_norm_identity(s, point)
        except NotASolitonError:
            skipped["norm_identity"] = "not-a-soliton"
        if with_prop23:
            rep.prop23 = prop23_report(s, point, with_bach=with_bach and n >= 4)
    rep.skipped = skipped or None
    return rep
