"""Right-continuous step functions on [0, 1).

A step function is a pair ``(breaks, values)`` with ``breaks`` nondecreasing,
``breaks[0] == 0`` and ``breaks[-1] == 1``; it takes ``values[p]`` on
``[breaks[p], breaks[p + 1])``.  Zero-length pieces are allowed and carry no
weight.  All routines here are exact up to floating point: nothing is sampled.
"""

from __future__ import annotations

import numpy as np

_ZERO_LEN = 1e-15


def regular(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Step function that is constant on the ``len(values)`` equal bins."""
    values = np.asarray(values, dtype=float)
    return np.linspace(0.0, 1.0, values.size + 1), values


def compact(breaks: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Drop zero-length pieces and merge neighbours with equal values."""
    lengths = np.diff(breaks)
    keep = lengths > _ZERO_LEN
    if not keep.any():
        return np.array([0.0, 1.0]), np.array([values[0]])
    b = np.concatenate(([breaks[0]], breaks[1:][keep]))
    y = values[keep]
    # merge runs of equal values
    new_run = np.concatenate(([True], y[1:] != y[:-1]))
    idx = np.flatnonzero(new_run)
    b = np.concatenate((b[idx], [1.0]))
    b[0] = 0.0
    return b, y[idx]


def integral_at(breaks: np.ndarray, values: np.ndarray, u) -> np.ndarray:
    """``u -> int_0^u f``, piecewise linear and exact."""
    cum = np.concatenate(([0.0], np.cumsum(values * np.diff(breaks))))
    return np.interp(u, breaks, cum)


def evaluate(breaks: np.ndarray, values: np.ndarray, t) -> np.ndarray:
    """Right-continuous evaluation; ``t == 1`` maps to the last piece."""
    t = np.asarray(t, dtype=float)
    idx = np.searchsorted(breaks, t, side="right") - 1
    return values[np.clip(idx, 0, values.size - 1)]


def survival(breaks: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Level-set measure ``u -> lambda({t : f(t) > u})`` on [0, 1).

    Values of ``f`` are assumed to lie in [0, 1].
    """
    lengths = np.diff(breaks)
    order = np.argsort(-values, kind="stable")
    w = np.clip(values[order], 0.0, 1.0)
    cum = np.cumsum(lengths[order])
    # on [w[q+1], w[q]) the level set has measure cum[q]
    b = np.concatenate(([0.0], w[::-1], [1.0]))
    y = np.concatenate((cum[::-1], [0.0]))
    return compact(b, np.clip(y, 0.0, 1.0))


def decreasing_inverse(
    breaks: np.ndarray, values: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Generalized inverse ``w -> inf{t : f(t) <= w}`` of a nonincreasing ``f``.

    The graph of ``f`` is mirrored at the diagonal: jump locations of ``f``
    become the values of the inverse and vice versa.
    """
    b, y = compact(breaks, values)
    y = np.clip(y, 0.0, 1.0)
    # f^{-1}(w) = b[q] for w in [y[q], y[q-1]), with y[-1] := 1 and y[P] := 0
    wb = np.concatenate(([0.0], y[::-1], [1.0]))
    wy = b[::-1].copy()
    return compact(wb, wy)


def rearrange(breaks: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Decreasing rearrangement: the nonincreasing step function with the same
    distribution of values."""
    lengths = np.diff(breaks)
    order = np.argsort(-values, kind="stable")
    b = np.concatenate(([0.0], np.cumsum(lengths[order])))
    b[-1] = 1.0
    return compact(b, values[order])


def merge(
    b1: np.ndarray, y1: np.ndarray, b2: np.ndarray, y2: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Common refinement of two step functions: (lengths, f-values, g-values)."""
    b = np.union1d(b1, b2)
    mid = 0.5 * (b[:-1] + b[1:])
    return np.diff(b), evaluate(b1, y1, mid), evaluate(b2, y2, mid)


def lp_distance(b1, y1, b2, y2, p: float) -> float:
    """``int_0^1 |f - g|^p``."""
    lengths, f, g = merge(b1, y1, b2, y2)
    return float(np.sum(lengths * np.abs(f - g) ** p))


def rearranged_prefix_knots(breaks, values) -> tuple[np.ndarray, np.ndarray]:
    """Knots ``(s, int_0^s f*)`` of the concave prefix integral of ``f*``."""
    b, y = rearrange(breaks, values)
    return b, integral_at(b, y, b)


def pad(rows: list[tuple[np.ndarray, np.ndarray]]) -> tuple[np.ndarray, np.ndarray]:
    """Stack step functions into rectangular arrays, padding with zero-length
    pieces at t = 1."""
    size = max(y.size for _, y in rows)
    breaks = np.ones((len(rows), size + 1))
    values = np.zeros((len(rows), size))
    for k, (b, y) in enumerate(rows):
        breaks[k, : b.size] = b
        values[k, : y.size] = y
        if y.size < size:
            values[k, y.size :] = y[-1]
    return breaks, values
