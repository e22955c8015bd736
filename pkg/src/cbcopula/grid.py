"""Checkerboard copulas and their conditional-derivative view.

Orientation is fixed throughout the package: for a mass matrix ``mass[i, j]``
the row index ``i`` is the first copula coordinate ``v`` and the column index
``j`` is the second, conditioning coordinate ``t``.  The derivative field row
``k`` (0-based) holds the conditional distribution function
``t -> d/dt C((k + 1) / n, t)`` as a right-continuous step function.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from . import _steps
from .errors import (
    DegenerateRanks,
    DomainError,
    GridFormatError,
    MarginalViolation,
    NegativeMass,
    NonSquare,
    TooFewSamples,
)

INPUT_TOL = 1e-9
INTERNAL_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DerivativeField:
    """Per-row step profiles of ``t -> d/dt C(k/n, t)`` for ``k = 1..n``.

    ``breaks`` has shape ``(n, P + 1)`` and ``values`` shape ``(n, P)``.  For a
    field read off a checkerboard, ``P == n`` and the breaks are the lattice
    ``j / n``; fields produced by the transforms may carry arbitrary breaks.
    """

    breaks: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "breaks", _frozen(self.breaks))
        object.__setattr__(self, "values", _frozen(self.values))

    @classmethod
    def from_matrix(cls, h) -> DerivativeField:
        h = np.asarray(h, dtype=float)
        n = h.shape[0]
        return cls(np.tile(np.linspace(0.0, 1.0, n + 1), (n, 1)), h)

    @classmethod
    def from_rows(cls, rows) -> DerivativeField:
        rows = list(rows)
        n = len(rows)
        lattice = np.linspace(0.0, 1.0, n + 1)
        if all(b.size == n + 1 and np.allclose(b, lattice, atol=1e-13) for b, _ in rows):
            return cls.from_matrix(np.array([y for _, y in rows]))
        return cls(*_steps.pad(rows))

    @property
    def n(self) -> int:
        return self.breaks.shape[0]

    @cached_property
    def is_regular(self) -> bool:
        n = self.n
        return self.values.shape[1] == n and bool(
            np.all(self.breaks == np.linspace(0.0, 1.0, n + 1))
        )

    def row(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        return self.breaks[k], self.values[k]

    def rows(self):
        for k in range(self.n):
            yield self.breaks[k], self.values[k]

    @cached_property
    def h(self) -> np.ndarray:
        """``n x n`` matrix of bin averages; the profiles themselves when regular."""
        if self.is_regular:
            return self.values
        return _frozen(self.n * np.diff(self.vertex_values[1:], axis=1))

    @cached_property
    def vertex_values(self) -> np.ndarray:
        """``V[k, l] = int_0^{l/n} profile_k``; row and column 0 are zero."""
        n = self.n
        V = np.zeros((n + 1, n + 1))
        if self.is_regular:
            V[1:, 1:] = np.cumsum(self.values, axis=1) / n
        else:
            u = np.arange(n + 1) / n
            for k, (b, y) in enumerate(self.rows()):
                V[k + 1] = _steps.integral_at(b, y, u)
        return _frozen(V)

    def to_grid(self, label: str = "") -> CopulaGrid:
        return grid_from_vertex(self.vertex_values, label, exact_field=self)


@dataclass(frozen=True, eq=False)
class CopulaGrid:
    """Checkerboard copula given by an ``n x n`` cell-mass matrix.

    ``exact_field`` optionally records the exact derivative profiles of the
    copula the grid was cut from (the grid agrees with it at every vertex).
    It is dropped on serialization.
    """

    mass: np.ndarray
    label: str = ""
    exact_field: DerivativeField | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "mass", _frozen(self.mass))

    @property
    def n(self) -> int:
        return self.mass.shape[0]

    @cached_property
    def vertex(self) -> np.ndarray:
        """Copula values at the vertices ``(k/n, l/n)``, shape ``(n+1, n+1)``."""
        V = np.zeros((self.n + 1, self.n + 1))
        V[1:, 1:] = self.mass.cumsum(axis=0).cumsum(axis=1)
        return _frozen(V)

    def relabel(self, label: str) -> CopulaGrid:
        return CopulaGrid(self.mass, label, self.exact_field)


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Observed pairs.  ``x`` is the conditioning variable, ``y`` the response;
    estimated grids put ``y`` on the first coordinate."""

    x: np.ndarray
    y: np.ndarray
    pseudo: bool = False

    def __post_init__(self):
        x = _frozen(np.ravel(self.x))
        y = _frozen(np.ravel(self.y))
        if x.size != y.size:
            raise DomainError("x and y must have the same length")
        if x.size < 2:
            raise TooFewSamples(f"need at least 2 pairs, got {x.size}")
        if self.pseudo and (np.any(x <= 0) or np.any(x >= 1) or np.any(y <= 0) or np.any(y >= 1)):
            raise DomainError("pseudo-observations must lie strictly inside (0, 1)")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.x.size


def _marginal_deviation(mass: np.ndarray) -> tuple[str, int, float]:
    n = mass.shape[0]
    rows = np.abs(mass.sum(axis=1) - 1.0 / n)
    cols = np.abs(mass.sum(axis=0) - 1.0 / n)
    if rows.max() >= cols.max():
        return "row", int(rows.argmax()), float(rows.max())
    return "column", int(cols.argmax()), float(cols.max())


def proportional_fit(mass, tol: float = 1e-14, sweeps: int = 500, newton_steps: int = 60) -> np.ndarray:
    """Rescale rows and columns until every marginal sum is ``1/n``.

    Alternating (Sinkhorn) scaling is run first; if it stalls, which happens
    for nearly decomposable matrices, Newton steps on the logarithms of the
    row and column scalings finish the job.
    """
    m = np.array(mass, dtype=float)
    n = m.shape[0]
    target = 1.0 / n
    if np.any(m.sum(axis=1) <= 0) or np.any(m.sum(axis=0) <= 0):
        raise DegenerateRanks("empty row or column: marginals cannot be made uniform")

    def sweep(m):
        m *= (target / m.sum(axis=1))[:, None]
        m *= (target / m.sum(axis=0))[None, :]
        return float(np.abs(m.sum(axis=1) - target).max())

    for _ in range(sweeps):
        if sweep(m) <= tol:
            return m
    for _ in range(newton_steps):
        r, c = m.sum(axis=1), m.sum(axis=0)
        jac = np.block([[np.diag(r), m], [m.T, np.diag(c)]])
        step = np.linalg.lstsq(jac, -np.concatenate([r - target, c - target]), rcond=None)[0]
        step = np.clip(step, -2.0, 2.0)
        m = m * np.exp(step[:n])[:, None] * np.exp(step[n:])[None, :]
        if sweep(m) <= tol:
            return m
    raise DegenerateRanks("proportional fitting did not converge; the zero pattern admits no uniform marginals")


def grid_from_mass(matrix, label: str = "", tol: float = INPUT_TOL) -> CopulaGrid:
    """Validate a mass matrix and return it as a :class:`CopulaGrid`.

    Marginal sums off by less than ``tol`` are accepted and then restored to
    ``1/n`` by proportional fitting so the internal invariants hold to 1e-12.
    """
    m = np.array(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise NonSquare(f"mass matrix must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise GridFormatError("mass matrix contains non-finite entries")
    if np.any(m < 0):
        i, j = np.unravel_index(np.argmin(m), m.shape)
        raise NegativeMass(f"negative mass {m[i, j]:.3g} at cell ({i}, {j})")
    axis, idx, dev = _marginal_deviation(m)
    if dev > tol:
        raise MarginalViolation(
            f"{axis} {idx} sums to {1.0 / m.shape[0] + dev:.12g} or "
            f"{1.0 / m.shape[0] - dev:.12g}, expected {1.0 / m.shape[0]:.12g}",
            axis,
            idx,
            dev,
        )
    if dev > INTERNAL_TOL / 10:
        m = proportional_fit(m)
    return CopulaGrid(m, label)


def grid_from_vertex(V, label: str = "", exact_field: DerivativeField | None = None) -> CopulaGrid:
    """Checkerboard with the given vertex values (second differences)."""
    V = np.asarray(V, dtype=float)
    m = V[1:, 1:] - V[:-1, 1:] - V[1:, :-1] + V[:-1, :-1]
    if m.min() < -1e-10:
        raise NegativeMass(f"vertex values are not 2-increasing (min cell {m.min():.3g})")
    m = np.maximum(m, 0.0)
    return CopulaGrid(m, label, exact_field)


def derivative_field(grid: CopulaGrid) -> DerivativeField:
    """Conditional distribution profiles ``h[k, j] = n * sum_{i <= k} mass[i, j]``."""
    if grid.exact_field is not None:
        return grid.exact_field
    n = grid.n
    h = n * np.cumsum(grid.mass, axis=0)
    h[-1] = 1.0
    return DerivativeField.from_matrix(np.clip(h, 0.0, 1.0))


def mass_from_field(f: DerivativeField) -> np.ndarray:
    """Inverse of :func:`derivative_field` for regular fields."""
    h = f.h
    return np.diff(np.vstack([np.zeros(f.n), h]), axis=0) / f.n


def field_violations(f: DerivativeField) -> dict[str, float]:
    """Worst violation of each field invariant (all zero for a valid field)."""
    h = f.h
    n = f.n
    k = np.arange(1, n + 1) / n
    row_means = np.array([_steps.integral_at(b, y, 1.0) for b, y in f.rows()])
    return {
        "range": float(max(0.0, -f.values.min(), f.values.max() - 1.0)),
        "monotone_in_v": float(max(0.0, -np.diff(h, axis=0).min(initial=0.0))),
        "row_mean": float(np.abs(row_means - k).max()),
        "last_row": float(np.abs(h[-1] - 1.0).max()),
    }


def cdf_eval(grid: CopulaGrid, u: float, v: float) -> float:
    """Piecewise-bilinear checkerboard copula at ``(u, v)``; ``u`` is the first
    coordinate."""
    if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
        raise DomainError(f"({u}, {v}) lies outside the unit square")
    n = grid.n
    a = min(int(math.floor(u * n)), n - 1)
    b = min(int(math.floor(v * n)), n - 1)
    alpha = u * n - a
    beta = v * n - b
    V = grid.vertex
    cell = grid.mass[a, b]
    row = V[a + 1, b] - V[a, b]
    col = V[a, b + 1] - V[a, b]
    return float(V[a, b] + alpha * row + beta * col + alpha * beta * cell)


def is_si(f: DerivativeField, tol: float = INTERNAL_TOL) -> bool:
    """True iff every profile is nonincreasing in the conditioning variable."""
    return si_violation(f)[1] <= tol


def si_violation(f: DerivativeField) -> tuple[int, float]:
    """(row, magnitude) of the largest increase along any profile."""
    worst_row, worst = 0, 0.0
    for k, (b, y) in enumerate(f.rows()):
        live = np.diff(b) > 0
        yk = y[live]
        if yk.size > 1:
            inc = float(np.max(np.diff(yk)))
            if inc > worst:
                worst_row, worst = k, inc
    return worst_row, worst


def sample_from_grid(grid: CopulaGrid, count: int, seed: int) -> SampleSet:
    """Draw ``count`` points: a cell with probability equal to its mass, then a
    uniform point inside the cell."""
    if count < 1:
        raise ValueError("count must be positive")
    rng = np.random.default_rng(seed)
    n = grid.n
    p = grid.mass.ravel()
    cells = rng.choice(p.size, size=count, p=p / p.sum())
    i, j = np.divmod(cells, n)
    eps = np.finfo(float).eps
    jitter = np.clip(rng.random((2, count)), eps, 1.0 - eps)
    y = (i + jitter[0]) / n
    x = (j + jitter[1]) / n
    return SampleSet(x, y, pseudo=True)


DEFAULT_EXPONENT = 0.45


def empirical_checkerboard(samples: SampleSet, exponent: float = DEFAULT_EXPONENT) -> CopulaGrid:
    """Empirical checkerboard copula at resolution ``floor(count ** exponent)``.

    Raw samples are converted to ranks first (ties broken by index order).
    Cell frequencies are then proportionally fitted to exact uniform marginals.
    """
    if not 0.0 < exponent < 0.5:
        raise DomainError(f"exponent must lie in (0, 0.5), got {exponent}")
    count = len(samples)
    if count < 4:
        raise TooFewSamples(f"need at least 4 samples, got {count}")
    if np.ptp(samples.x) == 0 or np.ptp(samples.y) == 0:
        raise DegenerateRanks("all x or all y values are equal")
    N = max(1, int(math.floor(count**exponent)))
    if samples.pseudo:
        bx = np.minimum((samples.x * N).astype(int), N - 1)
        by = np.minimum((samples.y * N).astype(int), N - 1)
    else:
        rx = rankdata(samples.x, method="ordinal") - 1
        ry = rankdata(samples.y, method="ordinal") - 1
        bx = rx * N // count
        by = ry * N // count
    counts = np.zeros((N, N))
    np.add.at(counts, (by, bx), 1.0)
    mass = proportional_fit(counts / count)
    return CopulaGrid(mass, f"empirical(count={count}, N={N})")


# -- files ------------------------------------------------------------------


def format_number(x: float) -> str:
    return format(float(x), ".12g")


def write_grid(grid: CopulaGrid, path) -> None:
    lines = [f"N={grid.n}"]
    lines += [",".join(format_number(x) for x in row) for row in grid.mass]
    Path(path).write_text("\n".join(lines) + "\n")


def read_grid(path, label: str | None = None) -> CopulaGrid:
    text = Path(path).read_text().strip().splitlines()
    if not text or not text[0].startswith("N="):
        raise GridFormatError(f"{path}: first line must be 'N=<int>'")
    try:
        n = int(text[0][2:])
        rows = [[float(x) for x in line.split(",")] for line in text[1:]]
    except ValueError as exc:
        raise GridFormatError(f"{path}: {exc}") from None
    if len(rows) != n or any(len(r) != n for r in rows):
        raise GridFormatError(f"{path}: expected {n} rows of {n} values")
    return grid_from_mass(rows, label if label is not None else Path(path).stem)


def write_samples(samples: SampleSet, target) -> None:
    """Write ``x,y`` rows to a path or an open text stream."""

    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y"])
        for x, y in zip(samples.x, samples.y):
            w.writerow([format_number(x), format_number(y)])

    if hasattr(target, "write"):
        emit(target)
    else:
        with open(target, "w", newline="") as fh:
            emit(fh)


def read_samples(path, pseudo: bool = False) -> SampleSet:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["x", "y"]:
            raise GridFormatError(f"{path}: header must be 'x,y'")
        try:
            pairs = [(float(a), float(b)) for a, b in reader]
        except ValueError as exc:
            raise GridFormatError(f"{path}: {exc}") from None
    if len(pairs) < 2:
        raise TooFewSamples(f"need at least 2 pairs, got {len(pairs)}")
    xy = np.array(pairs)
    return SampleSet(xy[:, 0], xy[:, 1], pseudo=pseudo)
