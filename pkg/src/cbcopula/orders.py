"""Distances between derivative fields and the two dependence orders.

Both orders are decided on exact piecewise-linear objects: the pointwise
order compares cumulative functions at the union of their knots (or at the
grid vertices when no exact profiles are attached), and the Schur order
compares the prefix integrals of the decreasingly rearranged profiles.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _steps
from .errors import ParamOutOfRange, ResolutionMismatch
from .grid import CopulaGrid, DerivativeField

DEFAULT_TOL = 1e-10


def _check_n(a, b) -> None:
    if a.n != b.n:
        raise ResolutionMismatch(f"resolutions differ: {a.n} vs {b.n}")


def dp_distance(d: DerivativeField, e: DerivativeField, p: float = 1.0) -> float:
    """``(mean_k int_0^1 |h_D,k - h_E,k|^p)^(1/p)`` over the rows ``k = 1..n``."""
    _check_n(d, e)
    if p < 1:
        raise ParamOutOfRange(f"p must be at least 1, got {p}")
    if d.is_regular and e.is_regular:
        total = float(np.mean(np.abs(d.values - e.values) ** p))
    else:
        total = float(
            np.mean([_steps.lp_distance(b1, y1, b2, y2, p) for (b1, y1), (b2, y2) in zip(d.rows(), e.rows())])
        )
    return total ** (1.0 / p)


def field_norm(d: DerivativeField, p: float = 1.0) -> float:
    """``(mean_k int_0^1 |h_k|^p)^(1/p)``."""
    lengths = np.diff(d.breaks, axis=1)
    return float(np.mean(np.sum(lengths * np.abs(d.values) ** p, axis=1))) ** (1.0 / p)


class Relation(Enum):
    LESS = "Less"
    GREATER = "Greater"
    EQUAL = "Equal"
    INCOMPARABLE = "Incomparable"


@dataclass(frozen=True)
class Witness:
    """Location where the left object exceeds the right one.

    ``row`` is the 1-based row ``k`` (``v = k/n``), ``at`` the position in the
    second coordinate.
    """

    row: int
    at: float
    magnitude: float


@dataclass(frozen=True)
class OrderVerdict:
    relation: Relation
    witness: Witness | None = None
    excess: float = 0.0  # max of left - right
    deficit: float = 0.0  # max of right - left

    def robust(self, tol: float = DEFAULT_TOL, factor: float = 10.0) -> bool:
        """False when a decisive difference lies in ``(tol, factor * tol]``."""
        return not any(tol < x <= factor * tol for x in (self.excess, self.deficit))


def _verdict(diff_rows, tol: float) -> OrderVerdict:
    """Aggregate row-wise ``(points, left - right)`` pairs into a verdict."""
    excess, deficit = -np.inf, -np.inf
    witness = None
    for k, (pts, diff) in enumerate(diff_rows, start=1):
        if diff.size == 0:
            continue
        i = int(np.argmax(diff))
        if diff[i] > excess:
            excess = float(diff[i])
            witness = Witness(k, float(pts[i]), excess)
        deficit = max(deficit, float(np.max(-diff)))
    excess, deficit = max(excess, 0.0), max(deficit, 0.0)
    if excess <= tol and deficit <= tol:
        rel = Relation.EQUAL
    elif excess <= tol:
        rel = Relation.LESS
    elif deficit <= tol:
        rel = Relation.GREATER
    else:
        return OrderVerdict(Relation.INCOMPARABLE, witness, excess, deficit)
    return OrderVerdict(rel, None, excess, deficit)


def _lo_rows(a: CopulaGrid, b: CopulaGrid):
    fa, fb = a.exact_field, b.exact_field
    if fa is None or fb is None or (fa.is_regular and fb.is_regular):
        u = np.arange(a.n + 1) / a.n
        diff = a.vertex - b.vertex
        for k in range(1, a.n + 1):
            yield u, diff[k]
        return
    for (b1, y1), (b2, y2) in zip(fa.rows(), fb.rows()):
        pts = np.union1d(b1, b2)
        yield pts, _steps.integral_at(b1, y1, pts) - _steps.integral_at(b2, y2, pts)


def lo_compare(a: CopulaGrid, b: CopulaGrid, tol: float = DEFAULT_TOL) -> OrderVerdict:
    """Pointwise (lower orthant) order of two copulas."""
    _check_n(a, b)
    return _verdict(_lo_rows(a, b), tol)


def _schur_rows(d: DerivativeField, e: DerivativeField):
    if d.is_regular and e.is_regular:
        n = d.n
        u = np.arange(n + 1) / n
        zero = np.zeros((n, 1))
        pd = np.hstack([zero, np.cumsum(-np.sort(-d.values, axis=1), axis=1) / n])
        pe = np.hstack([zero, np.cumsum(-np.sort(-e.values, axis=1), axis=1) / n])
        for k in range(n):
            yield u, pd[k] - pe[k]
        return
    for (b1, y1), (b2, y2) in zip(d.rows(), e.rows()):
        s1, c1 = _steps.rearranged_prefix_knots(b1, y1)
        s2, c2 = _steps.rearranged_prefix_knots(b2, y2)
        pts = np.union1d(s1, s2)
        yield pts, np.interp(pts, s1, c1) - np.interp(pts, s2, c2)


def schur_compare(d: DerivativeField, e: DerivativeField, tol: float = DEFAULT_TOL) -> OrderVerdict:
    """Row-wise majorization of the derivative profiles.

    ``Less`` means every prefix integral of the rearranged ``d`` rows is below
    that of ``e``: the profiles of ``d`` are less spread out.
    """
    _check_n(d, e)
    return _verdict(_schur_rows(d, e), tol)


def sup_distance(a: CopulaGrid, b: CopulaGrid) -> float:
    """Largest absolute difference of the two copulas over the grid vertices."""
    _check_n(a, b)
    return float(np.max(np.abs(a.vertex - b.vertex)))
