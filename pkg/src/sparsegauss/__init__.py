"""Sparse-grid Gaussian convolution approximation of periodic functions.

Computes the combination-technique error coefficients in arbitrary
precision, verifies the underlying rational identities exactly, and
reproduces the convergence behaviour of the full- and sparse-grid
Gaussian convolution operators.
"""

from .numerics import (
    BigRational,
    PrecisionContext,
    binomial,
    default_bits,
    exp_real,
    format_paper_sci,
    make_context,
)
from .fourier_model import (
    PeriodicFunction,
    ScaleVector,
    axis_multiplier,
    evaluate,
    gaussian_hat,
    load_function_json,
    make_test_function,
    sobolev_norm,
)
from .grids import (
    SignedGridTerm,
    combination_terms,
    compositions,
    grid_nodes,
    signed_multiplicity,
    sparse_union_nodes,
)
from .fullgrid import (
    ConvolutionApproximant,
    QuasiInterpolant,
    convolve,
    error_coeff_full,
    order_study,
    quasi_interpolant_eval,
    sample_quasi_interpolant,
    sup_error,
)
from .sparse_combination import (
    ErrorCoefficientResult,
    SparseApproximant,
    asymptotic_coeff,
    comb_coeff,
    reproduce_table,
    sparse_convolve,
    sparse_error_coeff,
)
from .sigma_oracle import (
    OracleDisagreement,
    forward_difference,
    geom_polys,
    leading_term_check,
    lemma41_check,
    sigma1_residual_check,
    sigma_bruteforce,
    sigma_closed_d2,
    sigma_recurrence,
    weighted_geom,
)

__version__ = "0.1.0"
