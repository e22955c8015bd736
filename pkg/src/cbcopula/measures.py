"""Dependence measures and functionals of checkerboard copulas.

Integrals over the first coordinate ``v`` use composite Simpson weights on the
vertex rows ``v = k/n`` (see :func:`row_weights`); integrals over the
conditioning coordinate are exact integrals of the step profiles.  Using one
rule everywhere makes the algebraic identities between the measures hold to
rounding error, and the rule is exact for the quadratic row functions that
arise for ``M`` and ``Pi``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import DegenerateFunctional, ParamOutOfRange
from .grid import CopulaGrid, DerivativeField
from .transforms import markov_product, upper_transform, upper_transform_field


def row_weights(n: int) -> np.ndarray:
    """Quadrature weights for ``int_0^1 g(v) dv`` from ``g(k/n)``, ``k = 0..n``.

    Composite Simpson for even ``n``; for odd ``n >= 3`` the last three
    intervals use the 3/8 rule.  ``n = 1`` falls back to the trapezoid.
    """
    if n < 1:
        raise ValueError("n must be positive")
    w = np.zeros(n + 1)
    if n == 1:
        w[:] = 0.5
        return w
    even = n if n % 2 == 0 else n - 3
    for a in range(0, even, 2):
        w[a : a + 3] += np.array([1.0, 4.0, 1.0]) / 3.0
    if n % 2:
        w[even : even + 4] += np.array([3.0, 9.0, 9.0, 3.0]) / 8.0
    return w / n


def _row_integral(g_rows: np.ndarray) -> float:
    """Integrate row values ``g((k + 1)/n)``, ``k = 0..n-1``, with ``g(0) = 0``."""
    n = g_rows.size
    return float(row_weights(n)[1:] @ g_rows)


def _row_levels(field: DerivativeField) -> np.ndarray:
    return (np.arange(field.n) + 1.0) / field.n


def _per_row(field: DerivativeField, fn) -> np.ndarray:
    """Exact ``int_0^1 fn(profile_k(t), v_k) dt`` for every row."""
    lengths = np.diff(field.breaks, axis=1)
    v = _row_levels(field)[:, None]
    return np.sum(lengths * fn(field.values, v), axis=1)


# -- cost and convex-function descriptors ----------------------------------------


class CostKind(Enum):
    ABSOLUTE = "abs"
    SQUARE = "square"
    POWER = "power"


@dataclass(frozen=True)
class CostSpec:
    """Convex ``h`` with ``h(0) = 0``, used as ``c(y, y') = h(y' - y)``."""

    kind: CostKind = CostKind.ABSOLUTE
    p: float = 1.0

    def __post_init__(self):
        if self.kind is CostKind.POWER and not self.p >= 1.0:
            raise ParamOutOfRange(f"power cost needs p >= 1, got {self.p}")

    @property
    def exponent(self) -> float:
        return {CostKind.ABSOLUTE: 1.0, CostKind.SQUARE: 2.0}.get(self.kind, self.p)

    def __call__(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        match self.kind:
            case CostKind.ABSOLUTE:
                return x
            case CostKind.SQUARE:
                return x * x
        return x**self.p

    def uniform_mean(self) -> float:
        """``int int h(u - u') du du'`` in closed form."""
        p = self.exponent
        return 2.0 / ((p + 1.0) * (p + 2.0))

    @classmethod
    def parse(cls, text: str) -> CostSpec:
        name, _, arg = text.partition(":")
        match name:
            case "abs":
                return cls(CostKind.ABSOLUTE)
            case "square":
                return cls(CostKind.SQUARE)
            case "power":
                try:
                    return cls(CostKind.POWER, float(arg))
                except ValueError:
                    raise ParamOutOfRange(f"bad power exponent {arg!r}") from None
        raise ParamOutOfRange(f"unknown convex function {text!r}")


ABSOLUTE = CostSpec(CostKind.ABSOLUTE)
SQUARE = CostSpec(CostKind.SQUARE)


# -- concordance-type functionals ----------------------------------------------


@dataclass(frozen=True)
class SpearmanRho:
    pass


@dataclass(frozen=True)
class KendallTau:
    pass


@dataclass(frozen=True)
class Footrule:
    pass


@dataclass(frozen=True)
class LinearSupermodular:
    """``mu(C) = int f dC`` normalized between ``Pi`` and ``M``.

    ``f(x, y)`` is vectorized; ``x`` is the conditioning coordinate and ``y``
    the first coordinate.
    """

    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    name: str = "f"


MeasureKind = SpearmanRho | KendallTau | Footrule | LinearSupermodular


def _midpoints(n: int) -> np.ndarray:
    return (np.arange(n) + 0.5) / n


def check_supermodular(f, n: int, tol: float = 1e-12) -> None:
    """Raise unless every grid rectangle has a nonnegative mixed difference."""
    g = np.arange(n + 1) / n
    F = np.asarray(f(g[None, :], g[:, None]), dtype=float)
    mixed = F[1:, 1:] + F[:-1, :-1] - F[1:, :-1] - F[:-1, 1:]
    worst = float(mixed.min())
    if worst < -tol:
        raise ParamOutOfRange(f"function is not supermodular (mixed difference {worst:.3g})")


def _midpoint_integral(mass: np.ndarray, f) -> float:
    x = _midpoints(mass.shape[0])
    return float(np.sum(mass * f(x[None, :], x[:, None])))


def _linear_functional(grid: CopulaGrid, f) -> float:
    n = grid.n
    base = _midpoint_integral(np.full((n, n), 1.0 / n**2), f)
    top = _midpoint_integral(np.eye(n) / n, f)
    if abs(top - base) < 1e-15:
        raise DegenerateFunctional("functional does not separate M from Pi")
    return (_midpoint_integral(grid.mass, f) - base) / (top - base)


def _product(x, y):
    return x * y


def footrule(grid: CopulaGrid) -> float:
    """``6 int C(t, t) dt - 2`` from the diagonal vertex values."""
    diag = np.diagonal(grid.vertex)
    return 6.0 * float(row_weights(grid.n) @ diag) - 2.0


def _kendall_raw(grid: CopulaGrid) -> float:
    """``4 int C dC - 1`` for the checkerboard, exact cell by cell."""
    m = grid.mass
    V = grid.vertex
    below_left = V[:-1, :-1]
    row_left = V[1:, :-1] - V[:-1, :-1]
    col_below = V[:-1, 1:] - V[:-1, :-1]
    inner = below_left + 0.5 * row_left + 0.5 * col_below + 0.25 * m
    return 4.0 * float(np.sum(m * inner)) - 1.0


def concordance(grid: CopulaGrid, kind: MeasureKind) -> float:
    """Concordance-type functional, normalized so that ``M`` gives 1.

    Spearman's rho and Kendall's tau are divided by their value at the
    checkerboard of ``M`` at the same resolution, which equals ``1 - 1/n**2``
    and ``1 - 1/n`` respectively; this keeps the Frechet bounds exact.
    """
    match kind:
        case SpearmanRho():
            return _linear_functional(grid, _product)
        case KendallTau():
            return _kendall_raw(grid) / (1.0 - 1.0 / grid.n)
        case Footrule():
            return footrule(grid)
        case LinearSupermodular(f):
            check_supermodular(f, grid.n)
            return _linear_functional(grid, f)
    raise TypeError(f"unsupported measure kind {kind!r}")


# -- measures of functional dependence ---------------------------------------------


class XiMethod(Enum):
    DIRECT = "direct"
    VIA_MARKOV = "via-markov"


def chatterjee_xi(field: DerivativeField, method: XiMethod = XiMethod.DIRECT) -> float:
    """``6 int int (d/dt C(v, t))^2 dt dv - 2``.

    ``VIA_MARKOV`` evaluates the footrule of ``C * C`` instead; its diagonal
    holds exactly the same row integrals.
    """
    if method is XiMethod.VIA_MARKOV:
        return footrule(markov_product(field, field))
    return 6.0 * _row_integral(_per_row(field, lambda h, v: h * h)) - 2.0


def zeta1(field: DerivativeField) -> float:
    """``3 int int |d/dt C(v, t) - v| dt dv``."""
    return 3.0 * _row_integral(_per_row(field, lambda h, v: np.abs(h - v)))


def wasserstein_correlation(field: DerivativeField, cost: CostSpec = ABSOLUTE) -> float:
    """Normalized transport cost between the conditional laws and the marginal.

    The cost is integrated against the cell masses of the upper transform at
    cell midpoints and divided by the same midpoint sum for ``Pi``, so that
    ``Pi`` and ``M`` map to 0 and 1 exactly.
    """
    n = field.n
    t = upper_transform(field)
    c = lambda x, y: cost(x - y)
    num = _midpoint_integral(t.mass, c)
    den = _midpoint_integral(np.full((n, n), 1.0 / n**2), c)
    return num / den


def rearranged_measure(field: DerivativeField, kind: MeasureKind) -> float:
    """Base functional applied to the twice upper-transformed copula."""
    twice = upper_transform_field(upper_transform_field(field)).to_grid("rearranged")
    return concordance(twice, kind)


def phi_rank_functional(field: DerivativeField, phi: CostSpec) -> float:
    """Raw ``int int phi(d/dt C(v, t) - v) dt dv``."""
    return _row_integral(_per_row(field, lambda h, v: phi(h - v)))


def phi_sensitivity_functional(field: DerivativeField, phi: CostSpec) -> float:
    """Raw ``mean_k int int phi(h_k(s) - h_k(t)) ds dt`` over rows ``k = 1..n``."""
    lengths = np.diff(field.breaks, axis=1)
    total = 0.0
    for L, y in zip(lengths, field.values):
        total += float(L @ phi(y[:, None] - y[None, :]) @ L)
    return total / field.n


# -- reports ---------------------------------------------------------------------


@dataclass(frozen=True)
class MeasureReport:
    name: str
    value: float
    grid_n: int
    copula_label: str
    method: str


def negated_cost(cost: CostSpec) -> LinearSupermodular:
    """``f(x, y) = -c(x, y)``, supermodular for every convex cost."""
    return LinearSupermodular(lambda x, y: -cost(x - y), f"-{cost.kind.value}")


MEASURE_NAMES = (
    "xi",
    "zeta1",
    "w1",
    "w2",
    "r-rho",
    "r-tau",
    "r-footrule",
    "footrule",
    "rho",
    "tau",
    "phi-rank:abs",
    "phi-rank:square",
    "phi-sens:abs",
    "phi-sens:square",
)


def compute_measure(name: str, grid: CopulaGrid, field: DerivativeField) -> MeasureReport:
    """Evaluate a measure by its CLI name."""
    match name:
        case "xi":
            value, method = chatterjee_xi(field), "squared profiles, row simpson"
        case "zeta1":
            value, method = zeta1(field), "absolute deviation, row simpson"
        case "w1":
            value, method = wasserstein_correlation(field, ABSOLUTE), "upper transform, midpoints"
        case "w2":
            value, method = wasserstein_correlation(field, SQUARE), "upper transform, midpoints"
        case "r-rho":
            value, method = rearranged_measure(field, SpearmanRho()), "rearranged, midpoints"
        case "r-tau":
            value, method = rearranged_measure(field, KendallTau()), "rearranged, exact cells"
        case "r-footrule":
            value, method = rearranged_measure(field, Footrule()), "rearranged, diagonal simpson"
        case "footrule":
            value, method = footrule(grid), "diagonal simpson"
        case "rho":
            value, method = concordance(grid, SpearmanRho()), "midpoints"
        case "tau":
            value, method = concordance(grid, KendallTau()), "exact cells"
        case _ if name.startswith("phi-rank:"):
            phi = CostSpec.parse(name.partition(":")[2])
            value, method = phi_rank_functional(field, phi), "raw, row simpson"
        case _ if name.startswith("phi-sens:"):
            phi = CostSpec.parse(name.partition(":")[2])
            value, method = phi_sensitivity_functional(field, phi), "raw, row mean"
        case _:
            raise ParamOutOfRange(f"unknown measure {name!r}")
    return MeasureReport(name, float(value), grid.n, grid.label, method)
