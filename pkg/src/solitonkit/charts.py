"""Coordinate charts and the field evaluators that supply their derivative jets.

Three derivative backends exist:

* :class:`JaxField` differentiates a ``jax.numpy`` function with nested forward-mode
  autodiff (exact to rounding, any order);
* :class:`FiniteDifferenceField` applies nested central differences with one
  Richardson halving to a plain numpy function;
* warped charts (see :mod:`solitonkit.warped`) build their jets from profile data.
"""

from dataclasses import dataclass, field
from itertools import combinations_with_replacement, product, permutations
from typing import Optional

import numpy as np
import jax

jax.config.update("jax_enable_x64", True)
import jax.numpy as jnp  # noqa: E402

from .errors import DerivativeOrderError, DomainError, NotPositiveDefiniteError  # noqa: E402
from .jets import Jet  # noqa: E402

# Per-order multipliers of the base step 1e-4 (1 + |x_i|); larger steps for higher
# derivatives keep roundoff (~eps / h^m) below the Richardson-extrapolated truncation error.
FD_STEP_FACTORS = {1: 3.0, 2: 30.0, 3: 150.0, 4: 400.0}
FD_BASE_STEP = 1e-4
FD_RICHARDSON_LEVELS = 3


class JaxField:
    """Field given by a jax-traceable function of the coordinates."""

    def __init__(self, fn, max_order=5):
        self.fn = fn
        self.max_order = max_order
        self._compiled = {}
        self._value = jax.jit(fn)

    def __call__(self, x):
        return np.asarray(self._value(jnp.asarray(x, dtype=float)))

    def _jet_fn(self, order):
        for k in sorted(self._compiled):
            if k >= order:
                return self._compiled[k]
        fns = [self.fn]
        for _ in range(order):
            fns.append(jax.jacfwd(fns[-1]))
        compiled = jax.jit(lambda x: tuple(f(x) for f in fns))
        self._compiled[order] = compiled
        return compiled

    def jets(self, x, order):
        if order > self.max_order:
            raise DerivativeOrderError(f"field supplies derivatives up to order {self.max_order}, {order} requested")
        parts = self._jet_fn(order)(jnp.asarray(x, dtype=float))
        return [np.asarray(p) for p in parts[: order + 1]]


class FiniteDifferenceField:
    """Field known only through values; derivatives by nested central differences.

    Each derivative order m uses a per-axis step h_i = base * factor_m * (1 + |x_i|),
    shrunk when needed so the stencil stays inside ``domain``, followed by
    ``levels`` Richardson halvings.
    """

    def __init__(self, fn, max_order=4, base_step=FD_BASE_STEP, domain=None, levels=FD_RICHARDSON_LEVELS):
        self.fn = fn
        self.max_order = max_order
        self.base_step = base_step
        self.domain = domain
        self.levels = levels

    def __call__(self, x):
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)

    def _nested(self, x, m, h):
        n = x.size
        cache = {}

        def value(offset):
            if offset not in cache:
                cache[offset] = self(x + h * np.asarray(offset, dtype=float))
            return cache[offset]

        sample = self(x)
        out = np.zeros(sample.shape + (n,) * m)
        for idx in combinations_with_replacement(range(n), m):
            acc = np.zeros(sample.shape)
            for signs in product((1, -1), repeat=m):
                offset = [0] * n
                for i, s in zip(idx, signs):
                    offset[i] += s
                acc = acc + np.prod(signs) * value(tuple(offset))
            acc = acc / np.prod([2.0 * h[i] for i in idx])
            for perm in set(permutations(idx)):
                out[(Ellipsis,) + perm] = acc
        return out

    def steps(self, x, m):
        h = self.base_step * FD_STEP_FACTORS[m] * (1.0 + np.abs(x))
        if self.domain is not None:
            room = np.minimum(x - np.asarray(self.domain.lower), np.asarray(self.domain.upper) - x)
            h = np.minimum(h, 0.5 * room / m)
        return h

    def jets(self, x, order):
        if order > self.max_order:
            raise DerivativeOrderError(f"finite-difference field limited to order {self.max_order}, {order} requested")
        x = np.asarray(x, dtype=float)
        parts = [self(x)]
        for m in range(1, order + 1):
            h = self.steps(x, m)
            seq = [self._nested(x, m, h / 2**k) for k in range(self.levels + 1)]
            for level in range(1, self.levels + 1):
                c = 4.0**level
                seq = [(c * fine - coarse) / (c - 1.0) for coarse, fine in zip(seq, seq[1:])]
            parts.append(seq[0])
        return parts


class NegatedField:
    """``-F`` for a field ``F``; used to store the steady potential as f = -F."""

    def __init__(self, base):
        self.base = base
        self.max_order = base.max_order

    def __call__(self, x):
        return -self.base(x)

    def jets(self, x, order):
        return [-p for p in self.base.jets(x, order)]


class ScaledField:
    def __init__(self, base, factor):
        self.base = base
        self.factor = factor
        self.max_order = base.max_order

    def __call__(self, x):
        return self.factor * self.base(x)

    def jets(self, x, order):
        return [self.factor * p for p in self.base.jets(x, order)]


@dataclass(frozen=True)
class Box:
    """Open coordinate box.  Infinite bounds are allowed; samplers use ``window``."""

    lower: tuple
    upper: tuple
    window: Optional[tuple] = None  # (lower, upper) finite sampling window

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x > np.asarray(self.lower)) and np.all(x < np.asarray(self.upper)))

    def sampling_bounds(self, margin):
        lo = np.asarray(self.lower, dtype=float) + margin
        hi = np.asarray(self.upper, dtype=float) - margin
        if self.window is not None:
            lo = np.maximum(lo, np.asarray(self.window[0], dtype=float))
            hi = np.minimum(hi, np.asarray(self.window[1], dtype=float))
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise DomainError("sampling window is unbounded; give the box a finite window")
        return lo, hi


class CoordinateChart:
    """A Riemannian metric on an open coordinate box."""

    def __init__(self, dim, metric, domain, label="", margin=1e-2, fibration=None):
        self.dim = int(dim)
        self.metric = metric
        self.domain = domain
        self.label = label
        self.margin = margin
        self.fibration = fibration

    @property
    def order(self):
        return self.metric.max_order

    @property
    def derivative_mode(self):
        if isinstance(self.metric, FiniteDifferenceField):
            return "finite-difference"
        return f"analytic-to-order-{self.order}"

    def check_point(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DomainError(f"expected a point with {self.dim} coordinates, got shape {x.shape}")
        if not self.domain.contains(x):
            raise DomainError(f"point {x.tolist()} is outside the domain of chart {self.label!r}")
        return x

    def metric_at(self, x):
        x = self.check_point(x)
        g = self.metric(x)
        _cholesky(g, x)
        return g

    def metric_jet(self, x, order):
        x = self.check_point(x)
        if order > self.order:
            raise DerivativeOrderError(
                f"chart {self.label!r} supplies metric derivatives to order {self.order}, {order} requested"
            )
        parts = self.metric.jets(x, order)
        _cholesky(parts[0], x)
        return Jet(parts, self.dim)

    def sample(self, rng, count, margin=None):
        """Uniform points in the sampling window, at least ``margin`` (default: the chart's) inside the box."""
        lo, hi = self.domain.sampling_bounds(self.margin if margin is None else max(margin, self.margin))
        return rng.uniform(lo, hi, size=(count, self.dim))

    def with_finite_differences(self, max_order=4, base_step=FD_BASE_STEP):
        """Same metric, derivatives recomputed from metric values only."""
        fd = FiniteDifferenceField(self.metric, max_order=max_order, base_step=base_step, domain=self.domain)
        return CoordinateChart(self.dim, fd, self.domain, self.label + " [fd]", self.margin, self.fibration)

    def __repr__(self):
        return f"CoordinateChart({self.label!r}, dim={self.dim}, mode={self.derivative_mode})"


def _cholesky(g, x):
    g = np.asarray(g)
    if not np.allclose(g, g.T, rtol=1e-12, atol=1e-12):
        raise NotPositiveDefiniteError(f"metric not symmetric at {np.asarray(x).tolist()}")
    try:
        return np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(f"metric not positive definite at {np.asarray(x).tolist()}") from None


def analytic_chart(dim, metric_fn, lower, upper, label, window=None, margin=1e-2, max_order=5):
    """Chart whose metric is a ``jax.numpy`` function of the coordinate vector."""
    box = Box(tuple(float(v) for v in lower), tuple(float(v) for v in upper), window)
    return CoordinateChart(dim, JaxField(metric_fn, max_order), box, label, margin)


# ---------------------------------------------------------------- standard charts


def flat_chart(n, half_width=5.0):
    """Euclidean R^n in Cartesian coordinates."""

    def metric(x):
        return jnp.eye(n) + 0.0 * x[0]

    inf = [np.inf] * n
    window = ([-half_width] * n, [half_width] * n)
    return analytic_chart(n, metric, [-np.inf] * n, inf, f"flat R^{n}", window=window)


def sphere_chart(n, radius=1.0, margin=0.05):
    """Round S^n of the given radius in hyperspherical coordinates.

    g = a^2 (dth1^2 + sin^2 th1 dth2^2 + ... ); the last angle is periodic.
    """
    a2 = float(radius) ** 2

    def metric(x):
        s2 = jnp.sin(x) ** 2
        diag = [jnp.ones_like(x[0])]
        acc = jnp.ones_like(x[0])
        for i in range(n - 1):
            acc = acc * s2[i]
            diag.append(acc)
        return a2 * jnp.diag(jnp.stack(diag))

    lower = [0.0] * n
    upper = [np.pi] * (n - 1) + [2 * np.pi]
    if n == 1:
        upper = [2 * np.pi]
    return analytic_chart(n, metric, lower, upper, f"round S^{n} (radius {radius:g})", margin=margin)


def cigar_chart(half_width=6.0):
    def metric(x):
        return jnp.eye(2) / (1.0 + x[0] ** 2 + x[1] ** 2)

    window = ([-half_width] * 2, [half_width] * 2)
    return analytic_chart(2, metric, [-np.inf] * 2, [np.inf] * 2, "cigar", window=window)


def euclidean_schwarzschild_chart(mass=1.0, outer=10.0, margin=0.05):
    """(1-2m/rho) dtau^2 + (1-2m/rho)^{-1} drho^2 + rho^2 dOmega^2, coordinates (tau, rho, theta, phi)."""
    m = float(mass)

    def metric(x):
        _, rho, th, _ = x
        a = 1.0 - 2.0 * m / rho
        return jnp.diag(jnp.stack([a, 1.0 / a, rho**2, rho**2 * jnp.sin(th) ** 2]))

    period = 8.0 * np.pi * m
    lower = [0.0, 2.0 * m, 0.0, 0.0]
    upper = [period, np.inf, np.pi, 2 * np.pi]
    window = ([0.0, 2.0 * m, 0.0, 0.0], [period, outer * m, np.pi, 2 * np.pi])
    chart = analytic_chart(4, metric, lower, upper, f"euclidean schwarzschild (m={m:g})", window=window, margin=margin)
    return chart


def product_field(*parts):
    """Block-diagonal metric function from metric functions of consecutive coordinate blocks."""
    sizes = [n for n, _ in parts]

    def metric(x):
        blocks = []
        start = 0
        for n, fn in parts:
            blocks.append(fn(x[start : start + n]))
            start += n
        return jax.scipy.linalg.block_diag(*blocks)

    return sum(sizes), metric


@dataclass(frozen=True)
class Fibration:
    """Declares that coordinate ``base_axis`` parametrizes the level sets of the potential."""

    base_axis: int = 0
    profile: object = None
    fiber: object = None
    extras: dict = field(default_factory=dict)

