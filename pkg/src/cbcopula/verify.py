"""Numerical verification suite for the operator laws of the package.

Every check compares an observed quantity with a bound and carries an anchor
naming the property it exercises.  The suite is deterministic for a fixed
``(n, seed)``; checks are reported in manifest order.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _steps
from .errors import ParamOutOfRange
from .grid import (
    CopulaGrid,
    DerivativeField,
    derivative_field,
    is_si,
    proportional_fit,
    si_violation,
)
from .measures import (
    ABSOLUTE,
    SQUARE,
    Footrule,
    KendallTau,
    SpearmanRho,
    XiMethod,
    chatterjee_xi,
    footrule,
    negated_cost,
    rearranged_measure,
    wasserstein_correlation,
    zeta1,
)
from .orders import Relation, dp_distance, field_norm, lo_compare, schur_compare, sup_distance
from .parametric import (
    EFGM,
    FrechetM,
    FrechetW,
    Gaussian,
    Independence,
    ShuffleOfMin,
    efgm_inverse_first_integral,
    materialize,
    transpose_shuffle,
)
from .transforms import (
    Marginal,
    MarginalSpec,
    convolution_fixed_point,
    increasing_rearrangement,
    involution_defect,
    markov_product,
    reflection,
    reflection_field,
    upper_product,
    upper_transform,
    upper_transform_field,
)

MIN_N = 16
EXACT = 1e-12

# anchors every run must report, in order of first appearance
REQUIRED_ANCHORS = (
    "upper-product-properties",
    "rearrangement-upper-product-duality",
    "si-characterization",
    "reflection-involution",
    "projection-reflection-laws",
    "transform-equals-reflection-on-si",
    "metric-properties",
    "fixed-point-measure-identity",
    "convolution-fixed-points",
    "pointwise-ordering",
    "continuity",
    "shuffle-discontinuity",
    "gaussian-reflection",
    "efgm-non-copula",
)


@dataclass(frozen=True)
class Check:
    name: str
    anchor: str
    passed: bool
    observed: float
    bound: float

    @property
    def status(self) -> str:
        return "Pass" if self.passed else "Fail"


@dataclass
class SuiteReport:
    seed: int
    grid_n: int
    checks: list[Check] = field(default_factory=list)
    elapsed_ms: int = 0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def status(self) -> str:
        return "Pass" if self.passed else "Fail"

    def anchors(self) -> list[str]:
        return list(dict.fromkeys(c.anchor for c in self.checks))

    def to_dict(self) -> dict:
        def num(x: float):
            x = float(x)
            return float(format(x, ".12g")) if math.isfinite(x) else None

        return {
            "status": self.status,
            "seed": self.seed,
            "grid_n": self.grid_n,
            "elapsed_ms": self.elapsed_ms,
            "checks": [
                {
                    "name": c.name,
                    "paper_anchor": c.anchor,
                    "status": c.status,
                    "observed": num(c.observed),
                    "bound": num(c.bound),
                }
                for c in self.checks
            ],
        }


class _Suite:
    """Builds the test set lazily and records checks."""

    def __init__(self, n: int, seed: int):
        self.n = n
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.checks: list[Check] = []
        self.coarse = max(0.02, 2.0 / n)

    def at_most(self, name: str, anchor: str, observed: float, bound: float) -> None:
        self.checks.append(Check(name, anchor, bool(observed <= bound), float(observed), float(bound)))

    def at_least(self, name: str, anchor: str, observed: float, bound: float) -> None:
        self.checks.append(Check(name, anchor, bool(observed >= bound), float(observed), float(bound)))

    # -- test set ------------------------------------------------------------

    def random_grid(self, n: int | None = None) -> CopulaGrid:
        n = n or self.n
        return CopulaGrid(proportional_fit(self.rng.random((n, n)) ** 3), "random")

    @property
    def grids(self) -> dict[str, CopulaGrid]:
        if not hasattr(self, "_grids"):
            n = self.n
            g = {
                "pi": materialize(Independence(), n),
                "m": materialize(FrechetM(), n),
                "w": materialize(FrechetW(), n),
                "gaussian:0": materialize(Gaussian(0.0), n),
                "gaussian:0.3": materialize(Gaussian(0.3), n),
                "gaussian:0.6": materialize(Gaussian(0.6), n),
                "gaussian:0.9": materialize(Gaussian(0.9), n),
                "gaussian:-0.5": materialize(Gaussian(-0.5), n),
                "efgm:1": materialize(EFGM(1.0), n),
            }
            if n % 4 == 0:
                g["shuffle:2,4,1,3"] = materialize(ShuffleOfMin((2, 4, 1, 3)), n)
            for i in range(2):
                g[f"random-{i}"] = self.random_grid()
            self._grids = g
        return self._grids

    def field(self, key: str) -> DerivativeField:
        return self._cached("field", key, lambda: derivative_field(self.grids[key]))

    def T(self, key: str) -> CopulaGrid:
        return self._cached("T", key, lambda: upper_transform(self.field(key)))

    def Tf(self, key: str) -> DerivativeField:
        return derivative_field(self.T(key))

    def _cached(self, kind: str, key: str, make):
        store = self.__dict__.setdefault("_" + kind, {})
        if key not in store:
            store[key] = make()
        return store[key]

    def si_keys(self) -> list[str]:
        return [k for k in self.grids if is_si(self.field(k))]


def _worst(values) -> float:
    return max((float(v) for v in values), default=0.0)


def _upper_product_checks(s: _Suite) -> None:
    a = "upper-product-properties"
    m = s.field("m")
    pi = s.field("pi")
    s.at_most("C v M = C", a, _worst(sup_distance(upper_product(s.field(k), m), g) for k, g in s.grids.items()), EXACT)
    s.at_most("C v C = M", a, _worst(sup_distance(upper_product(s.field(k), s.field(k)), s.grids["m"]) for k in s.grids), EXACT)
    s.at_most(
        "C v Pi agrees with the upper transform",
        a,
        _worst(sup_distance(upper_product(s.field(k), pi), s.T(k)) for k in s.grids),
        EXACT,
    )
    s.at_most("T(Pi) = M and T(M) = Pi", a, max(sup_distance(s.T("pi"), s.grids["m"]), sup_distance(s.T("m"), s.grids["pi"])), EXACT)
    s.at_most(
        "C * M = C and C * Pi = Pi",
        "markov-product-identities",
        _worst(
            max(sup_distance(markov_product(s.field(k), m), g), sup_distance(markov_product(s.field(k), pi), s.grids["pi"]))
            for k, g in s.grids.items()
        ),
        EXACT,
    )
    n = s.n
    diag = np.arange(n + 1) / n
    worst = 0.0
    for k in s.grids:
        d = np.diagonal(markov_product(s.field(k), s.field(k)).vertex)
        worst = max(worst, float(np.max(diag**2 - d)), float(np.max(d - diag)))
    s.at_most("v^2 <= (C * C)(v, v) <= v", "markov-product-identities", worst, EXACT)
    s.at_most(
        "Gaussian 0.6 v Gaussian 0.8 is Gaussian 0.96",
        a,
        sup_distance(upper_product(s.field("gaussian:0.6"), derivative_field(materialize(Gaussian(0.8), n))), materialize(Gaussian(0.96), n)),
        s.coarse,
    )


def _duality_checks(s: _Suite) -> None:
    a = "rearrangement-upper-product-duality"
    s.at_most(
        "S(C v Pi) = C rearranged",
        a,
        _worst(sup_distance(reflection(s.Tf(k)), increasing_rearrangement(s.field(k))) for k in s.grids),
        EXACT,
    )
    s.at_most(
        "S(C rearranged) = C v Pi",
        a,
        _worst(sup_distance(reflection(derivative_field(increasing_rearrangement(s.field(k)))), s.T(k)) for k in s.grids),
        EXACT,
    )
    a = "si-characterization"
    s.at_most(
        "upper transforms and rearrangements are SI",
        a,
        _worst(
            max(si_violation(s.Tf(k))[1], si_violation(derivative_field(increasing_rearrangement(s.field(k))))[1])
            for k in s.grids
        ),
        EXACT,
    )
    s.at_most(
        "SI copulas equal their rearrangement",
        a,
        _worst(sup_distance(increasing_rearrangement(s.field(k)), s.grids[k]) for k in s.si_keys()),
        EXACT,
    )
    non_si = [k for k in s.grids if k not in s.si_keys()]
    s.at_least(
        "non-SI copulas differ from their rearrangement",
        a,
        min(sup_distance(increasing_rearrangement(s.field(k)), s.grids[k]) for k in non_si),
        1e-6,
    )


def _reflection_checks(s: _Suite) -> None:
    s.at_most(
        "S(S(D)) = D on SI copulas",
        "reflection-involution",
        _worst(sup_distance(reflection(reflection_field(s.field(k))), s.grids[k]) for k in s.si_keys()),
        EXACT,
    )
    a = "projection-reflection-laws"
    s.at_most(
        "T^2(C) = C rearranged",
        a,
        _worst(sup_distance(upper_transform(s.Tf(k)), increasing_rearrangement(s.field(k))) for k in s.grids),
        EXACT,
    )
    s.at_most(
        "T^3(C) = T(C)",
        a,
        _worst(sup_distance(upper_transform(upper_transform_field(s.Tf(k))), s.T(k)) for k in s.grids),
        EXACT,
    )
    worst = 0.0
    for k in s.grids:
        d = s.field(k)
        worst = max(worst, abs(field_norm(s.Tf(k), 1) - field_norm(d, 1)))
        twice = upper_transform_field(s.Tf(k))
        for p in (1, 2, 3):
            worst = max(worst, abs(field_norm(twice, p) - field_norm(d, p)))
    s.at_most("derivative norms are preserved", a, worst, EXACT)
    s.at_most(
        "T(D) = S(D) on SI copulas",
        "transform-equals-reflection-on-si",
        _worst(sup_distance(s.T(k), reflection(s.field(k))) for k in s.si_keys()),
        EXACT,
    )


def _decreasing_step(rng, pieces: int):
    b = np.sort(np.concatenate(([0.0, 1.0], rng.random(pieces - 1))))
    y = np.sort(rng.random(pieces))[::-1]
    return b, y


def _metric_checks(s: _Suite) -> None:
    a = "metric-properties"
    random_pairs = [(s.random_grid(), s.random_grid()) for _ in range(4)]
    keys = list(s.grids)
    named_pairs = [(s.grids[x], s.grids[y]) for x, y in zip(keys, keys[1:])]
    once, twice, rand2, isometry = 0.0, 0.0, 0.0, 0.0
    for D, E in random_pairs + named_pairs:
        fd, fe = derivative_field(D), derivative_field(E)
        td, te = upper_transform_field(fd), upper_transform_field(fe)
        ttd, tte = upper_transform_field(td), upper_transform_field(te)
        once = max(once, dp_distance(td, te, 1) - dp_distance(fd, fe, 1))
        for p in (1, 2):
            twice = max(twice, dp_distance(ttd, tte, p) - dp_distance(fd, fe, p))
        if (D, E) in random_pairs:
            rand2 = max(rand2, dp_distance(td, te, 2) - dp_distance(fd, fe, 2))
        rd = derivative_field(increasing_rearrangement(fd))
        re = derivative_field(increasing_rearrangement(fe))
        d1 = dp_distance(td, te, 1)
        isometry = max(isometry, abs(d1 - dp_distance(rd, re, 1)), abs(d1 - dp_distance(ttd, tte, 1)))
    s.at_most("d_1(T D, T E) <= d_1(D, E)", a, once, EXACT)
    s.at_most("d_p(T^2 D, T^2 E) <= d_p(D, E) for p = 1, 2", a, twice, EXACT)
    s.at_most("d_2(T D, T E) <= d_2(D, E) on random pairs", a, rand2, EXACT)
    # for p > 1 a single application of T can expand distances
    pi, g = s.field("pi"), s.field("gaussian:0.3")
    expansion = dp_distance(upper_transform_field(pi), upper_transform_field(g), 2) - dp_distance(pi, g, 2)
    s.at_least("d_2 expands under T for Pi vs Gaussian 0.3", a, expansion, 0.04)
    s.at_most("d_1(T D, T E) = d_1(D rearranged, E rearranged)", a, isometry, 1e-10)
    worst = 0.0
    for _ in range(50):
        f = _decreasing_step(s.rng, int(s.rng.integers(1, 12)))
        g = _decreasing_step(s.rng, int(s.rng.integers(1, 12)))
        direct = _steps.lp_distance(*f, *g, 1)
        mirrored = _steps.lp_distance(*_steps.decreasing_inverse(*f), *_steps.decreasing_inverse(*g), 1)
        worst = max(worst, abs(direct - mirrored))
    s.at_most("L1 distance of decreasing steps equals that of their inverses", "step-inverse-l1-identity", worst, EXACT)


def _measure_checks(s: _Suite) -> None:
    a = "measure-identities"
    worst_xi, worst_dual = 0.0, 0.0
    for k in s.grids:
        f = s.field(k)
        worst_xi = max(worst_xi, abs(chatterjee_xi(f) - chatterjee_xi(f, XiMethod.VIA_MARKOV)))
        worst_dual = max(worst_dual, abs(zeta1(f) + footrule(s.T(k)) - 1.0))
    s.at_most("xi directly and through the Markov square", a, worst_xi, 1e-10)
    s.at_most("zeta_1 + footrule(T C) = 1", a, worst_dual, 1e-10)
    g = s.field("gaussian:0.3")
    s.at_most("zeta_1 = 1-Wasserstein correlation", a, abs(zeta1(g) - wasserstein_correlation(g, ABSOLUTE)), 2e-3)
    measures = (
        chatterjee_xi,
        zeta1,
        lambda f: wasserstein_correlation(f, ABSOLUTE),
        lambda f: wasserstein_correlation(f, SQUARE),
        lambda f: rearranged_measure(f, SpearmanRho()),
        lambda f: rearranged_measure(f, KendallTau()),
        lambda f: rearranged_measure(f, Footrule()),
    )
    worst = 0.0
    for mu in measures:
        worst = max(worst, abs(mu(s.field("pi"))), abs(mu(s.field("m")) - 1.0))
    s.at_most("measures vanish at Pi and equal one at M", "dependence-axioms", worst, 1e-9)


def _fixed_point_checks(s: _Suite) -> None:
    n = s.n
    a = "convolution-fixed-points"
    normal = convolution_fixed_point(MarginalSpec(Marginal.NORMAL), n)
    uniform = convolution_fixed_point(MarginalSpec(Marginal.UNIFORM), n)
    fn = derivative_field(normal)
    s.at_most("normal fixed point is Gaussian 1/sqrt(2)", a, sup_distance(normal, materialize(Gaussian(2**-0.5), n)), s.coarse)
    defect = sup_distance(upper_transform(fn), normal)
    s.at_most("T fixes the normal construction", a, defect, s.coarse)
    s.at_most("T fixes the uniform construction", a, sup_distance(upper_transform(derivative_field(uniform)), uniform), s.coarse)
    fine = convolution_fixed_point(MarginalSpec(Marginal.NORMAL), 2 * n)
    fine_defect = sup_distance(upper_transform(derivative_field(fine)), fine)
    s.at_most("fixed-point defect shrinks with resolution", a, fine_defect / defect, 0.75)
    s.at_most("profiles of the fixed point are involutions", a, involution_defect(fn), 2.0 / n)
    s.at_least(
        "non-fixed Gaussian fails the involution test",
        a,
        involution_defect(s.field("gaussian:0.3")),
        2.0 / n,
    )
    both = rearranged_measure(fn, negated_cost(ABSOLUTE)) + wasserstein_correlation(fn, ABSOLUTE)
    s.at_most("R_{-c} + W_c = 1 at a fixed point", "fixed-point-measure-identity", abs(both - 1.0), 5e-3)


def _order_checks(s: _Suite) -> None:
    a = "pointwise-ordering"
    keys = [k for k in s.grids if not k.startswith("shuffle")]
    T2 = {k: upper_transform(s.Tf(k)) for k in keys}
    mismatches, robust = 0, 0
    for x, y in itertools.permutations(keys, 2):
        sv = schur_compare(s.field(x), s.field(y))
        l1 = lo_compare(s.T(x), s.T(y))
        l2 = lo_compare(T2[x], T2[y])
        if not (sv.robust() and l1.robust() and l2.robust()):
            continue
        robust += 1
        flags = {sv.relation is Relation.LESS, l1.relation is Relation.GREATER, l2.relation is Relation.LESS}
        mismatches += len(flags) > 1
    s.at_most("Schur order matches the pointwise order of transforms", a, mismatches, 0)
    s.at_least("robust pairs compared", a, robust, 20)
    verdicts = [
        lo_compare(s.grids["w"], s.grids["pi"]).relation is Relation.LESS,
        schur_compare(s.field("pi"), s.field("w")).relation is Relation.LESS,
        lo_compare(s.grids["gaussian:0.3"], s.grids["gaussian:0.6"]).relation is Relation.LESS,
    ]
    s.at_most("W below Pi pointwise but above it in Schur order", a, verdicts.count(False), 0)
    worst = 0.0
    for x, y in itertools.permutations(keys, 2):
        if schur_compare(s.field(x), s.field(y)).relation is Relation.LESS:
            fx, fy = s.field(x), s.field(y)
            for mu in (
                lambda f: wasserstein_correlation(f, ABSOLUTE),
                lambda f: rearranged_measure(f, SpearmanRho()),
            ):
                worst = max(worst, mu(fx) - mu(fy))
    s.at_most("Schur-smaller copulas have smaller measures", "schur-monotone-measures", worst, 1e-9)


def _continuity_checks(s: _Suite) -> None:
    a = "continuity"
    n = s.n
    target = derivative_field(materialize(Gaussian(0.6), n))
    target_t = upper_transform_field(target)
    d_fields, d_trans = [], []
    for m in range(7):
        f = derivative_field(materialize(Gaussian(0.6 + 0.3 * 2.0**-m), n))
        d_fields.append(dp_distance(f, target))
        d_trans.append(dp_distance(upper_transform_field(f), target_t))
    s.at_most("d_1 of fields decreases along the sequence", a, float(np.max(np.diff(d_fields))), 0.0)
    s.at_most("d_1 of transformed fields decreases along the sequence", a, float(np.max(np.diff(d_trans))), 0.0)
    s.at_most("last transformed distance is small", a, d_trans[-1], 0.01)

    a = "shuffle-discontinuity"
    sups, exact, gap = [], 0.0, 0.0
    for m in (4, 8, 16):
        grid = materialize(transpose_shuffle(m), m * m)
        pi = materialize(Independence(), m * m)
        sups.append(sup_distance(grid, pi))
        t = upper_transform(derivative_field(grid))
        exact = max(exact, sup_distance(t, pi))
        gap = max(gap, abs(sup_distance(t, upper_transform(derivative_field(pi))) - 0.25))
    s.at_most("transpose shuffles approach Pi", a, float(np.max(np.diff(sups))), 0.0)
    s.at_most("T of a shuffle is exactly Pi", a, exact, EXACT)
    s.at_most("T of the shuffles stays 1/4 away from T(Pi)", a, gap, EXACT)


def _gaussian_checks(s: _Suite) -> None:
    a = "gaussian-reflection"
    n = s.n
    g = derivative_field(materialize(Gaussian(0.352), n))
    target = materialize(Gaussian(0.936), n)
    s.at_most("S(Gaussian 0.352) = Gaussian 0.936", a, sup_distance(reflection(g), target), s.coarse)
    s.at_most("T(Gaussian 0.352) = Gaussian 0.936", a, sup_distance(upper_transform(g), target), s.coarse)
    s.at_most("parameter map sqrt(1 - rho^2)", a, abs(math.sqrt(1 - 0.352**2) - 0.936), 5e-4)


def _efgm_checks(s: _Suite) -> None:
    a = "efgm-non-copula"
    s.at_most(
        "integral of the EFGM conditional quantile at v = 0.2",
        a,
        abs(efgm_inverse_first_integral(1.0, 0.2) - 0.228),
        1e-3,
    )
    s.at_least("marginal condition fails at v = 0.25", a, abs(efgm_inverse_first_integral(1.0, 0.25) - 0.25), 0.01)
    s.at_most("marginal condition holds for theta = 0", a, abs(efgm_inverse_first_integral(0.0, 0.25) - 0.25), 1e-9)


SECTIONS = (
    _upper_product_checks,
    _duality_checks,
    _reflection_checks,
    _metric_checks,
    _measure_checks,
    _fixed_point_checks,
    _order_checks,
    _continuity_checks,
    _gaussian_checks,
    _efgm_checks,
)


def run_suite(n: int = 128, seed: int = 7) -> SuiteReport:
    """Run every check at resolution ``n``; ``n`` must be at least 16."""
    if n < MIN_N:
        raise ParamOutOfRange(f"verification needs n >= {MIN_N}, got {n}")
    start = time.perf_counter()
    suite = _Suite(n, seed)
    for section in SECTIONS:
        section(suite)
    report = SuiteReport(seed, n, suite.checks)
    report.elapsed_ms = int(round(1000 * (time.perf_counter() - start)))
    return report
