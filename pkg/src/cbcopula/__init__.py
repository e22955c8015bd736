"""Checkerboard copula calculus: upper products, rearrangements, reflections,
derivative metrics and orders, and the dependence measures built on them."""

from .errors import CopulaError
from .grid import (
    CopulaGrid,
    DerivativeField,
    SampleSet,
    cdf_eval,
    derivative_field,
    empirical_checkerboard,
    grid_from_mass,
    is_si,
    sample_from_grid,
)
from .measures import (
    CostSpec,
    chatterjee_xi,
    concordance,
    footrule,
    rearranged_measure,
    wasserstein_correlation,
    zeta1,
)
from .orders import dp_distance, lo_compare, schur_compare
from .parametric import materialize, parse_family
from .transforms import (
    increasing_rearrangement,
    markov_product,
    reflection,
    upper_product,
    upper_transform,
)

__version__ = "0.1.0"

__all__ = [
    "CopulaError",
    "CopulaGrid",
    "CostSpec",
    "DerivativeField",
    "SampleSet",
    "cdf_eval",
    "chatterjee_xi",
    "concordance",
    "derivative_field",
    "dp_distance",
    "empirical_checkerboard",
    "footrule",
    "grid_from_mass",
    "increasing_rearrangement",
    "is_si",
    "lo_compare",
    "markov_product",
    "materialize",
    "parse_family",
    "rearranged_measure",
    "reflection",
    "sample_from_grid",
    "schur_compare",
    "upper_product",
    "upper_transform",
    "wasserstein_correlation",
    "zeta1",
]
