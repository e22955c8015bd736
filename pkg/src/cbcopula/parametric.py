"""Named copula families materialized as checkerboard grids."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import ndtr, ndtri, owens_t

from .errors import ParamOutOfRange, ResolutionMismatch
from .grid import CopulaGrid, grid_from_vertex

# |rho| at or beyond this is treated as exact comonotone/countermonotone
RHO_EDGE = 1.0 - 1e-12


@dataclass(frozen=True)
class Gaussian:
    rho: float

    def __post_init__(self):
        if not -1.0 <= self.rho <= 1.0:
            raise ParamOutOfRange(f"Gaussian rho must lie in [-1, 1], got {self.rho}")


@dataclass(frozen=True)
class EFGM:
    theta: float = 1.0

    def __post_init__(self):
        if not -1.0 <= self.theta <= 1.0:
            raise ParamOutOfRange(f"EFGM theta must lie in [-1, 1], got {self.theta}")


@dataclass(frozen=True)
class FrechetM:
    pass


@dataclass(frozen=True)
class FrechetW:
    pass


@dataclass(frozen=True)
class Independence:
    pass


@dataclass(frozen=True)
class ShuffleOfMin:
    """Stripe ``a`` (1-based) of the conditioning coordinate is mapped
    increasingly onto stripe ``sigma[a - 1]`` of the first coordinate."""

    sigma: tuple[int, ...]

    def __post_init__(self):
        sigma = tuple(int(s) for s in self.sigma)
        if sorted(sigma) != list(range(1, len(sigma) + 1)):
            raise ParamOutOfRange(f"not a permutation of 1..{len(sigma)}: {sigma}")
        object.__setattr__(self, "sigma", sigma)

    @property
    def m(self) -> int:
        return len(self.sigma)


ParametricCopula = Gaussian | EFGM | FrechetM | FrechetW | Independence | ShuffleOfMin


def bivariate_normal_cdf(h, k, rho: float) -> np.ndarray:
    """``P(X <= h, Y <= k)`` for standard normals with correlation ``rho``.

    Uses Owen's T function; ``|rho| < 1`` and finite arguments are required.
    """
    h, k = np.broadcast_arrays(np.asarray(h, dtype=float), np.asarray(k, dtype=float))
    s = math.sqrt((1.0 - rho) * (1.0 + rho))
    out = np.empty(h.shape)
    both = (h == 0) & (k == 0)
    out[both] = 0.25 + math.asin(rho) / (2 * math.pi)
    rest = ~both
    hh, kk = h[rest], k[rest]

    def owen(x, y):
        # T(x, (y - rho x) / (x s)), with the x = 0 limit atan(+-inf) / (2 pi)
        res = np.empty(x.shape)
        zero = x == 0
        res[zero] = np.sign(y[zero]) * 0.25
        nz = ~zero
        res[nz] = owens_t(x[nz], (y[nz] - rho * x[nz]) / (x[nz] * s))
        return res

    beta = np.where((hh * kk > 0) | ((hh * kk == 0) & (hh + kk >= 0)), 0.0, 0.5)
    out[rest] = 0.5 * ndtr(hh) + 0.5 * ndtr(kk) - owen(hh, kk) - owen(kk, hh) - beta
    return np.clip(out, 0.0, 1.0)


def _lattice(n: int) -> np.ndarray:
    return np.arange(n + 1) / n


def _vertex_values(spec: ParametricCopula, n: int) -> np.ndarray:
    g = _lattice(n)
    V_ = g[:, None]
    U_ = g[None, :]
    match spec:
        case Independence():
            return V_ * U_
        case FrechetM():
            return np.minimum(V_, U_)
        case FrechetW():
            return np.maximum(V_ + U_ - 1.0, 0.0)
        case EFGM(theta):
            return V_ * U_ * (1.0 + theta * (1.0 - V_) * (1.0 - U_))
        case Gaussian(rho):
            if rho >= RHO_EDGE:
                return np.minimum(V_, U_)
            if rho <= -RHO_EDGE:
                return np.maximum(V_ + U_ - 1.0, 0.0)
            V = np.zeros((n + 1, n + 1))
            V[n, :] = g
            V[:, n] = g
            x = ndtri(g[1:n])
            V[1:n, 1:n] = bivariate_normal_cdf(x[:, None], x[None, :], rho)
            return V
    raise TypeError(f"unsupported family {spec!r}")


def materialize(spec: ParametricCopula, n: int) -> CopulaGrid:
    """Cell masses of ``spec`` on the ``n x n`` grid by inclusion-exclusion of
    the copula at the cell corners."""
    if n < 2:
        raise ParamOutOfRange(f"resolution must be at least 2, got {n}")
    if isinstance(spec, ShuffleOfMin):
        m = spec.m
        if n % m:
            raise ResolutionMismatch(f"resolution {n} is not a multiple of {m} stripes")
        r = n // m
        mass = np.zeros((n, n))
        for a, s in enumerate(spec.sigma):
            idx = np.arange(r)
            mass[(s - 1) * r + idx, a * r + idx] = 1.0 / n
        return CopulaGrid(mass, describe(spec))
    return grid_from_vertex(_vertex_values(spec, n), describe(spec))


def transpose_shuffle(m: int) -> ShuffleOfMin:
    """Shuffle on ``m**2`` stripes sending stripe ``a*m + b`` to ``b*m + a``.

    Materialized at ``n = m**2`` its vertex-sup distance to the independence
    copula is ``O(1/m)``, although it is a complete-dependence copula.
    """
    if m < 2:
        raise ParamOutOfRange(f"m must be at least 2, got {m}")
    return ShuffleOfMin(tuple(b * m + a + 1 for a in range(m) for b in range(m)))


def efgm_conditional_quantile(theta: float, t, w):
    """Inverse in ``v`` of ``v -> v + theta v (1 - v)(1 - 2t)``.

    Written in the rationalized form, which has no singularity at ``t = 1/2``.
    """
    a = theta * (1.0 - 2.0 * np.asarray(t, dtype=float))
    return 2.0 * w / ((1.0 + a) + np.sqrt((1.0 + a) ** 2 - 4.0 * a * w))


def efgm_inverse_first_integral(theta: float, v: float) -> float:
    """``int_0^1 F_t^{-1}(v) dt`` for the EFGM conditional quantiles.

    For a copula the integral would equal ``v``; for ``theta != 0`` it does
    not, so inverting the derivative in the first argument breaks the
    marginal condition.
    """
    if not -1.0 <= theta <= 1.0:
        raise ParamOutOfRange(f"theta must lie in [-1, 1], got {theta}")
    if not 0.0 < v < 1.0:
        raise ParamOutOfRange(f"v must lie in (0, 1), got {v}")
    value, _ = integrate.quad(
        lambda t: efgm_conditional_quantile(theta, t, v), 0.0, 1.0, epsabs=1e-12, epsrel=1e-12
    )
    return float(value)


# -- descriptor strings -------------------------------------------------------


def parse_family(text: str) -> ParametricCopula:
    """Parse ``gaussian:<rho>``, ``efgm:<theta>``, ``m``, ``w``, ``pi``,
    ``shuffle:<perm>`` or ``tshuffle:<m>``."""
    name, _, arg = text.strip().partition(":")
    name = name.lower()
    try:
        match name:
            case "gaussian":
                return Gaussian(float(arg))
            case "efgm":
                return EFGM(float(arg) if arg else 1.0)
            case "m" if not arg:
                return FrechetM()
            case "w" if not arg:
                return FrechetW()
            case "pi" if not arg:
                return Independence()
            case "shuffle":
                return ShuffleOfMin(tuple(int(s) for s in arg.split(",")))
            case "tshuffle":
                return transpose_shuffle(int(arg))
    except ValueError as exc:
        if isinstance(exc, ParamOutOfRange):
            raise
        raise ParamOutOfRange(f"bad parameter in {text!r}: {exc}") from None
    raise ParamOutOfRange(f"unknown family descriptor {text!r}")


def describe(spec: ParametricCopula) -> str:
    match spec:
        case Gaussian(rho):
            return f"gaussian:{rho:g}"
        case EFGM(theta):
            return f"efgm:{theta:g}"
        case FrechetM():
            return "m"
        case FrechetW():
            return "w"
        case Independence():
            return "pi"
        case ShuffleOfMin(sigma):
            return "shuffle:" + ",".join(map(str, sigma))
    raise TypeError(f"unsupported family {spec!r}")
