"""Exact Wiener-chaos and Malliavin calculus on finite Gaussian spaces."""

__version__ = "0.1.0"

from .polynomials import (
    ChaosExpansion,
    DegreeLimitError,
    MultiIndex,
    PolyFunctional,
    chaos_to_poly,
    expectation_exact,
    l2_inner,
    l2_inner_chaos,
    poly_to_chaos,
    project_chaos,
)
from .gaussian import (
    gaussian_moment,
    isonormal_map,
    isserlis_moment,
    isserlis_moment_recursive,
    pair_partitions,
)
from .hermite import generating_partial_sum, hermite_eval, hermite_monomial_coeffs

__all__ = [
    "ChaosExpansion",
    "DegreeLimitError",
    "MultiIndex",
    "PolyFunctional",
    "chaos_to_poly",
    "expectation_exact",
    "gaussian_moment",
    "generating_partial_sum",
    "hermite_eval",
    "hermite_monomial_coeffs",
    "isonormal_map",
    "isserlis_moment",
    "isserlis_moment_recursive",
    "l2_inner",
    "l2_inner_chaos",
    "pair_partitions",
    "poly_to_chaos",
    "project_chaos",
]
