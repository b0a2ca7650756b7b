"""Truncated jets of tensor fields.

A jet of order ``K`` at a point stores a tensor together with all of its partial
derivatives up to order ``K``: ``parts[m]`` has shape ``base + (dim,) * m`` and the
trailing ``m`` slots are the (symmetric) derivative directions.  Contractions of jets
use the multivariate Leibniz rule, so every quantity assembled from a metric jet keeps
exactly the derivative information the metric provided; nothing is differenced.
"""

from itertools import combinations
from math import factorial

import numpy as np

_DERIV = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


class Jet:
    __slots__ = ("parts", "dim")

    def __init__(self, parts, dim):
        self.parts = tuple(np.asarray(p, dtype=float) for p in parts)
        self.dim = int(dim)

    @classmethod
    def constant(cls, value, dim, order):
        value = np.asarray(value, dtype=float)
        parts = [value] + [np.zeros(value.shape + (dim,) * m) for m in range(1, order + 1)]
        return cls(parts, dim)

    @property
    def order(self):
        return len(self.parts) - 1

    @property
    def value(self):
        return self.parts[0]

    @property
    def rank(self):
        return self.parts[0].ndim

    def truncate(self, order):
        if order > self.order:
            raise ValueError(f"jet has order {self.order}, cannot truncate to {order}")
        return Jet(self.parts[: order + 1], self.dim)

    def d(self):
        """Jet of the partial gradient; the new slot is the last base index."""
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        return Jet(self.parts[1:], self.dim)

    def relabel(self, spec):
        """Permute base indices, e.g. ``jet.relabel("abc->cab")``."""
        src, dst = spec.split("->")
        return Jet(
            [np.einsum(f"{src}{_DERIV[:m]}->{dst}{_DERIV[:m]}", p) for m, p in enumerate(self.parts)],
            self.dim,
        )

    def _pair(self, other):
        k = min(self.order, other.order)
        return self.parts[: k + 1], other.parts[: k + 1]

    def __add__(self, other):
        if not isinstance(other, Jet):
            return NotImplemented
        a, b = self._pair(other)
        return Jet([x + y for x, y in zip(a, b)], self.dim)

    def __sub__(self, other):
        if not isinstance(other, Jet):
            return NotImplemented
        a, b = self._pair(other)
        return Jet([x - y for x, y in zip(a, b)], self.dim)

    def __neg__(self):
        return Jet([-p for p in self.parts], self.dim)

    def __mul__(self, c):
        if isinstance(c, Jet):
            return NotImplemented
        return Jet([c * p for p in self.parts], self.dim)

    __rmul__ = __mul__

    def __repr__(self):
        return f"Jet(shape={self.value.shape}, dim={self.dim}, order={self.order})"


def _leibniz_group(sa, pa, sb, pb, so, k, m):
    """Sum over all size-``k`` subsets S of m derivative slots of d_S a * d_{S^c} b."""
    dl = _DERIV[:m]
    rep = np.einsum(f"{sa}{dl[:k]},{sb}{dl[k:]}->{so}{dl}", pa, pb)
    if k == 0 or k == m:
        return rep
    nb = len(so)
    out = np.zeros_like(rep)
    for subset in combinations(range(m), k):
        rest = [i for i in range(m) if i not in subset]
        # slot subset[j] of the output takes rep slot j; slot rest[j] takes rep slot k+j
        perm = [0] * m
        for j, s in enumerate(subset):
            perm[s] = j
        for j, s in enumerate(rest):
            perm[s] = k + j
        out += np.transpose(rep, list(range(nb)) + [nb + p for p in perm])
    return out


def contract(spec, a, b):
    """Leibniz-rule contraction of two jets (or a jet and a constant array).

    ``spec`` is an einsum string over base indices only, e.g. ``"ij,jk->ik"``.
    """
    lhs, so = spec.split("->")
    sa, sb = lhs.split(",")
    if not isinstance(a, Jet):
        return Jet([np.einsum(f"{sa},{sb}{_DERIV[:m]}->{so}{_DERIV[:m]}", a, p) for m, p in enumerate(b.parts)], b.dim)
    if not isinstance(b, Jet):
        return Jet([np.einsum(f"{sa}{_DERIV[:m]},{sb}->{so}{_DERIV[:m]}", p, b) for m, p in enumerate(a.parts)], a.dim)
    order = min(a.order, b.order)
    parts = []
    for m in range(order + 1):
        total = None
        for k in range(m + 1):
            term = _leibniz_group(sa, a.parts[k], sb, b.parts[m - k], so, k, m)
            total = term if total is None else total + term
        parts.append(total)
    return Jet(parts, a.dim)


def inverse(g):
    """Jet of the inverse of a matrix-valued jet, from g * g^{-1} = I order by order."""
    inv0 = np.linalg.inv(g.parts[0])
    parts = [inv0]
    for m in range(1, g.order + 1):
        acc = None
        for k in range(1, m + 1):
            term = _leibniz_group("ab", g.parts[k], "bc", parts[m - k], "ac", k, m)
            acc = term if acc is None else acc + term
        parts.append(-np.einsum(f"ab,bc{_DERIV[:m]}->ac{_DERIV[:m]}", inv0, acc))
    return Jet(parts, g.dim)


def embed(jet, index_map, dim):
    """Re-express a jet in a larger coordinate system.

    ``index_map[i]`` is the position of the jet's i-th coordinate among ``dim`` coordinates;
    derivatives along the remaining coordinates are zero.  Base indices are untouched.
    """
    idx = np.asarray(index_map)
    parts = []
    for m, p in enumerate(jet.parts):
        out = np.zeros(p.shape[: p.ndim - m] + (dim,) * m)
        if m == 0:
            out[...] = p
        else:
            out[(Ellipsis,) + np.ix_(*([idx] * m))] = p
        parts.append(out)
    return Jet(parts, dim)


def univariate(derivs, axis, dim):
    """Scalar jet of a function of the single coordinate ``axis``.

    ``derivs[m]`` is the m-th derivative with respect to that coordinate.
    """
    parts = []
    for m, v in enumerate(derivs):
        p = np.zeros((dim,) * m)
        p[(axis,) * m] = v
        parts.append(p)
    return Jet(parts, dim)


def taylor_to_derivs(coeffs):
    """Convert Taylor coefficients c_k to derivatives k! c_k."""
    return [c * factorial(k) for k, c in enumerate(coeffs)]


__all__ = ["Jet", "contract", "inverse", "embed", "univariate", "taylor_to_derivs"]
