"""Copula products and the operators built on them.

All operators act on derivative profiles.  Step profiles are transformed
exactly, so the returned grids carry the exact profiles of the result and
repeated application incurs no discretization drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import ndtr, ndtri

from . import _steps
from .errors import NotStochasticallyIncreasing, ResolutionMismatch
from .grid import (
    INTERNAL_TOL,
    CopulaGrid,
    DerivativeField,
    grid_from_vertex,
    proportional_fit,
    si_violation,
)


def _check_same_n(d: DerivativeField, e: DerivativeField) -> None:
    if d.n != e.n:
        raise ResolutionMismatch(f"resolutions differ: {d.n} vs {e.n}")


def _common_refinement(d: DerivativeField, e: DerivativeField):
    """Both fields on one set of breaks: (lengths, hd (n, Q), he (n, Q))."""
    if d.is_regular and e.is_regular:
        n = d.n
        return np.full(n, 1.0 / n), d.values, e.values
    b = np.unique(np.concatenate([d.breaks.ravel(), e.breaks.ravel()]))
    mid = 0.5 * (b[:-1] + b[1:])
    hd = np.array([_steps.evaluate(bk, yk, mid) for bk, yk in d.rows()])
    he = np.array([_steps.evaluate(bk, yk, mid) for bk, yk in e.rows()])
    return np.diff(b), hd, he


def _product(d: DerivativeField, e: DerivativeField, op, label: str) -> CopulaGrid:
    _check_same_n(d, e)
    lengths, hd, he = _common_refinement(d, e)
    n = d.n
    V = np.zeros((n + 1, n + 1))
    for k in range(n):
        V[k + 1, 1:] = op(hd[k][None, :], he) @ lengths
    return grid_from_vertex(V, label)


def upper_product(d: DerivativeField, e: DerivativeField) -> CopulaGrid:
    """Conditionally comonotone coupling: ``(D v E)(k/n, l/n) = int min(h_D,k, h_E,l)``."""
    return _product(d, e, np.minimum, "upper product")


def markov_product(d: DerivativeField, e: DerivativeField) -> CopulaGrid:
    """Conditionally independent coupling: ``(D * E)(k/n, l/n) = int h_D,k h_E,l``."""
    return _product(d, e, np.multiply, "markov product")


def upper_transform_field(c: DerivativeField) -> DerivativeField:
    """Exact profiles of ``C v Pi``: row ``k`` is ``u -> lambda{t : h_k(t) > u}``."""
    return DerivativeField.from_rows(_steps.survival(b, y) for b, y in c.rows())


def upper_transform(c: DerivativeField) -> CopulaGrid:
    """Upper product with the independence copula.  The result is SI."""
    return upper_transform_field(c).to_grid("upper transform")


def rearranged_field(c: DerivativeField) -> DerivativeField:
    return DerivativeField.from_rows(_steps.rearrange(b, y) for b, y in c.rows())


def increasing_rearrangement(c: DerivativeField) -> CopulaGrid:
    """Copula whose profiles are the decreasing rearrangements of those of ``c``."""
    if c.is_regular:
        h = -np.sort(-c.values, axis=1, kind="stable")
        return DerivativeField.from_matrix(h).to_grid("increasing rearrangement")
    return rearranged_field(c).to_grid("increasing rearrangement")


def reflection_field(c: DerivativeField, tol: float = INTERNAL_TOL) -> DerivativeField:
    row, worst = si_violation(c)
    if worst > tol:
        raise NotStochasticallyIncreasing(
            f"profile {row} increases by {worst:.3g}; reflection needs an SI copula",
            row,
            worst,
        )
    rows = []
    for b, y in c.rows():
        # flatten violations below tol so the profile is exactly nonincreasing
        rows.append(_steps.decreasing_inverse(b, np.minimum.accumulate(y)))
    return DerivativeField.from_rows(rows)


def reflection(c: DerivativeField, tol: float = INTERNAL_TOL) -> CopulaGrid:
    """Mirror every (nonincreasing) profile at the diagonal."""
    return reflection_field(c, tol).to_grid("reflection")


# -- fixed points by convolution ---------------------------------------------


class Marginal(Enum):
    NORMAL = "normal"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class MarginalSpec:
    """A continuous law ``F`` with closed-form self-convolution ``G = F * F``."""

    kind: Marginal

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind is Marginal.NORMAL:
            return ndtr(x)
        return np.clip(x, 0.0, 1.0)

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        if self.kind is Marginal.NORMAL:
            return ndtri(p)
        return p

    def conv_cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind is Marginal.NORMAL:
            return ndtr(x / math.sqrt(2.0))
        x = np.clip(x, 0.0, 2.0)
        return np.where(x <= 1.0, 0.5 * x**2, 1.0 - 0.5 * (2.0 - x) ** 2)

    def conv_quantile(self, p):
        p = np.asarray(p, dtype=float)
        if self.kind is Marginal.NORMAL:
            return math.sqrt(2.0) * ndtri(p)
        return np.where(p <= 0.5, np.sqrt(2.0 * p), 2.0 - np.sqrt(2.0 * (1.0 - p)))

    def kernel(self, v, t):
        """``F(G^{-1}(v) - F^{-1}(t))``: decreasing in ``t`` and an involution
        in ``t`` for every fixed ``v``."""
        return self.cdf(self.conv_quantile(v) - self.quantile(t))


def convolution_fixed_point(m: MarginalSpec, n: int) -> CopulaGrid:
    """Grid of the SI copula whose profiles are ``m.kernel(v, .)``.

    The kernel is evaluated at bin midpoints; the resulting cell masses are
    proportionally fitted so the marginals are exactly uniform.
    """
    if n < 2:
        raise ValueError("resolution must be at least 2")
    v = np.arange(1, n) / n
    t = (np.arange(n) + 0.5) / n
    h = np.vstack([np.zeros(n), m.kernel(v[:, None], t[None, :]), np.ones(n)])
    mass = proportional_fit(np.diff(h, axis=0) / n)
    return CopulaGrid(mass, f"convolution fixed point ({m.kind.value})")


def involution_defect(c: DerivativeField, points=None, rows=(0.1, 0.9)) -> float:
    """Sampled deviation of the profiles from being involutions.

    A nonincreasing profile is an involution exactly when it equals its own
    inverse, so this returns ``max |h_v(t) - h_v^{-1}(t)|`` over rows with
    ``v`` in ``rows`` and the sample ``points``.  Profiles are read as the
    piecewise-linear interpolants through their bin midpoints; rows that
    increase somewhere are replaced by their running minimum before
    inversion.
    """
    n = c.n
    if points is None:
        points = np.linspace(0.1, 0.9, 17)
    points = np.asarray(points, dtype=float)
    mid = (np.arange(n) + 0.5) / n
    h = c.h
    worst = 0.0
    for k in range(n - 1):
        v = (k + 1) / n
        if not rows[0] <= v <= rows[1]:
            continue
        f = np.interp(points, mid, h[k])
        mono = np.minimum.accumulate(h[k])
        finv = np.interp(points, mono[::-1], mid[::-1])
        worst = max(worst, float(np.abs(f - finv).max()))
    return worst
