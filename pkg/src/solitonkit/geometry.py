"""Pointwise curvature and conformal tensors of a coordinate chart.

All tensors are fully covariant arrays in chart coordinates.  Derivative slots of
covariant derivatives come first, matching the usual index notation:
``nabla_T[k, i, j] = nabla_k T_ij``.

Sign convention: R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb} + ..., lowered on the
first slot, so the unit sphere has R_ijkl = g_ik g_jl - g_il g_jk and Ric_jl = g^{ik} R_ijkl.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import DimensionError, ZeroVectorError
from .jets import Jet, contract, inverse

_IDX = "abcdefgh"


def covariant_derivative(T, gamma):
    """Jet of nabla T for a fully covariant tensor jet T; derivative slot first."""
    r = T.rank
    base = _IDX[:r]
    out = T.d().relabel(f"{base}z->z{base}")
    for s in range(r):
        tsub = base[:s] + "y" + base[s + 1 :]
        out = out - contract(f"yz{base[s]},{tsub}->z{base}", gamma, T)
    return out


def orthonormal_rows(g):
    """Rows form a g-orthonormal basis (inverse Cholesky factor)."""
    L = np.linalg.cholesky(g)
    return np.linalg.inv(L)


def frame_components(T, frame):
    """Components T(e_a, e_b, ...) for a covariant tensor and frame rows e_a."""
    out = np.asarray(T)
    for _ in range(out.ndim):
        # contract the leading slot and rotate it to the back
        out = np.tensordot(out, frame, axes=([0], [1]))
    return out


def tensor_norm(T, g):
    """g-norm of a covariant tensor (Frobenius norm in an orthonormal frame)."""
    T = np.asarray(T)
    if T.ndim == 0:
        return float(abs(T))
    return float(np.linalg.norm(frame_components(T, orthonormal_rows(g))))


class PointGeometry:
    """Curvature jets of ``chart`` at ``point`` from a metric jet of order ``order``.

    Quantities are computed lazily; each carries as many derivatives as the metric
    order allows (Christoffel: order-1, Riemann: order-2, Cotton: order-3, Bach: order-4).
    """

    def __init__(self, chart, point, order=2):
        self.chart = chart
        self.point = np.asarray(point, dtype=float)
        self.n = chart.dim
        self.order = order
        self.g = chart.metric_jet(self.point, order)

    @classmethod
    def from_jet(cls, g):
        obj = cls.__new__(cls)
        obj.chart = None
        obj.point = None
        obj.n = g.dim
        obj.order = g.order
        obj.g = g
        return obj

    def _need(self, k, what):
        if self.order < k:
            from .errors import DerivativeOrderError

            raise DerivativeOrderError(f"{what} needs metric derivatives of order {k}, geometry built with {self.order}")

    def _need_dim(self, k, what):
        if self.n < k:
            raise DimensionError(f"{what} requires dimension >= {k}, got {self.n}")

    @cached_property
    def metric(self):
        return self.g.value

    @cached_property
    def ginv(self):
        return inverse(self.g)

    @cached_property
    def frame(self):
        return orthonormal_rows(self.metric)

    def norm(self, T):
        T = np.asarray(T)
        if T.ndim == 0:
            return float(abs(T))
        return float(np.linalg.norm(frame_components(T, self.frame)))

    # -- Levi-Civita connection and curvature

    @cached_property
    def christoffel(self):
        """Gamma^k_ij, indexed [k, i, j]."""
        self._need(1, "Christoffel symbols")
        dg = self.g.d()  # dg[a, b, c] = d_c g_ab
        first = 0.5 * (dg.relabel("bca->cab") + dg.relabel("acb->cab") - dg.relabel("abc->cab"))
        return contract("kc,cij->kij", self.ginv.truncate(first.order), first)

    @cached_property
    def riemann_up(self):
        """R^a_bcd."""
        self._need(2, "Riemann tensor")
        gam = self.christoffel
        dgam = gam.d()  # dgam[a, d, b, c] = d_c Gamma^a_db
        lin = dgam.relabel("adbc->abcd") - dgam.relabel("acbd->abcd")
        g2 = gam.truncate(dgam.order)
        quad = contract("ace,edb->abcd", g2, g2) - contract("ade,ecb->abcd", g2, g2)
        return lin + quad

    @cached_property
    def riemann(self):
        """Fully covariant R_abcd."""
        return contract("ae,ebcd->abcd", self.g, self.riemann_up)

    @cached_property
    def ricci(self):
        return contract("bd,abcd->ac", self.ginv, self.riemann)

    @cached_property
    def scalar(self):
        return contract("ac,ac->", self.ginv, self.ricci)

    @cached_property
    def schouten(self):
        n = self.n
        return self.ricci - (1.0 / (2 * (n - 1))) * contract(",ab->ab", self.scalar, self.g)

    @cached_property
    def einstein(self):
        return self.ricci - 0.5 * contract(",ab->ab", self.scalar, self.g)

    @cached_property
    def weyl(self):
        self._need_dim(3, "Weyl tensor")
        n = self.n
        A, g = self.schouten, self.g
        kn = (
            contract("ik,jl->ijkl", g, A)
            - contract("il,jk->ijkl", g, A)
            - contract("jk,il->ijkl", g, A)
            + contract("jl,ik->ijkl", g, A)
        )
        return self.riemann - (1.0 / (n - 2)) * kn

    # -- third and fourth order quantities

    @cached_property
    def nabla_schouten(self):
        self._need(3, "Cotton tensor")
        return covariant_derivative(self.schouten, self.christoffel)

    @cached_property
    def cotton(self):
        """C_ijk = nabla_i A_jk - nabla_j A_ik."""
        self._need_dim(3, "Cotton tensor")
        nA = self.nabla_schouten
        return nA - nA.relabel("jik->ijk")

    @cached_property
    def nabla_weyl(self):
        self._need(3, "divergence of Weyl")
        return covariant_derivative(self.weyl, self.christoffel)

    @cached_property
    def weyl_divergence(self):
        """nabla^l W_ijkl."""
        return contract("ml,mijkl->ijk", self.ginv, self.nabla_weyl)

    @cached_property
    def nabla_cotton(self):
        self._need(4, "Bach tensor")
        return covariant_derivative(self.cotton, self.christoffel)

    @cached_property
    def ricci_weyl(self):
        """R_kl W_i^k_j^l."""
        Wup = contract("ka,iajl->ikjl", self.ginv, self.weyl)
        Wup = contract("lb,ikjb->ikjl", self.ginv, Wup)
        return contract("kl,ikjl->ij", self.ricci, Wup)

    @cached_property
    def bach(self):
        """B_ij = (nabla_k C_kij + R_kl W_i^k_j^l) / (n-2)."""
        self._need_dim(4, "Bach tensor")
        div_c = contract("ab,abij->ij", self.ginv, self.nabla_cotton)
        return (1.0 / (self.n - 2)) * (div_c + self.ricci_weyl)

    @cached_property
    def bach_from_weyl(self):
        """B_ij = nabla^k nabla^l W_ikjl / (n-3) + R_kl W_i^k_j^l / (n-2)."""
        self._need_dim(4, "Bach tensor")
        self._need(4, "Bach tensor")
        nnW = covariant_derivative(self.nabla_weyl, self.christoffel)  # [a, b, i, k, j, l]
        t = contract("ak,abikjl->bijl", self.ginv, nnW)
        t = contract("bl,bijl->ij", self.ginv, t)
        n = self.n
        return (1.0 / (n - 3)) * t + (1.0 / (n - 2)) * self.ricci_weyl

    @cached_property
    def bach_divergence(self):
        """nabla^i B_ij."""
        self._need(5, "divergence of Bach")
        nB = covariant_derivative(self.bach, self.christoffel)
        return contract("ai,aij->j", self.ginv, nB)


# ---------------------------------------------------------------- bundles


@dataclass(frozen=True)
class CurvatureBundle:
    point: tuple
    metric: np.ndarray
    gamma: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float


@dataclass(frozen=True)
class ConformalBundle:
    schouten: np.ndarray
    einstein: np.ndarray
    weyl: np.ndarray
    cotton: np.ndarray
    bach: Optional[np.ndarray] = None


def curvature_bundle(chart, point):
    geo = PointGeometry(chart, point, order=2)
    return CurvatureBundle(
        point=tuple(geo.point.tolist()),
        metric=geo.metric,
        gamma=geo.christoffel.value,
        riemann=geo.riemann.value,
        ricci=geo.ricci.value,
        scalar=float(geo.scalar.value),
    )


def conformal_bundle(chart, point):
    if chart.dim < 3:
        raise DimensionError(f"conformal tensors need dimension >= 3, got {chart.dim}")
    with_bach = chart.dim >= 4 and chart.order >= 4
    geo = PointGeometry(chart, point, order=4 if with_bach else 3)
    return ConformalBundle(
        schouten=geo.schouten.value,
        einstein=geo.einstein.value,
        weyl=geo.weyl.value,
        cotton=geo.cotton.value,
        bach=geo.bach.value if with_bach else None,
    )


def weyl_divergence_check(chart, point):
    """|| C_ijk + (n-2)/(n-3) nabla^l W_ijkl ||, an identity for every metric with n >= 4."""
    n = chart.dim
    if n < 4:
        raise DimensionError(f"Weyl divergence identity needs dimension >= 4, got {n}")
    geo = PointGeometry(chart, point, order=3)
    res = geo.cotton.value + ((n - 2) / (n - 3)) * geo.weyl_divergence.value
    return geo.norm(res)


def gram_schmidt(g, v, tol=1e-8):
    """g-orthonormal frame (rows) whose first vector is v/|v|.

    The frame is completed with the coordinate axes in order, skipping any candidate
    whose remainder after projection is below ``tol`` relative to its length.
    """
    g = np.asarray(g, dtype=float)
    v = np.asarray(v, dtype=float)
    vnorm = np.sqrt(v @ g @ v)
    if not np.isfinite(vnorm) or vnorm <= 0.0:
        raise ZeroVectorError("cannot build a frame from the zero vector")
    frame = [v / vnorm]
    n = g.shape[0]
    for axis in range(n):
        if len(frame) == n:
            break
        c = np.zeros(n)
        c[axis] = 1.0
        cnorm = np.sqrt(c @ g @ c)
        w = c.copy()
        for _ in range(2):  # re-orthogonalize once for stability
            for e in frame:
                w = w - (e @ g @ w) * e
        wnorm = np.sqrt(max(w @ g @ w, 0.0))
        if wnorm <= tol * cnorm:
            continue
        frame.append(w / wnorm)
    return np.array(frame)


def adapted_frame(chart, point, v):
    """Orthonormal frame at ``point`` with e_1 along the coordinate vector ``v``."""
    g = chart.metric_at(point)
    return gram_schmidt(g, v)
