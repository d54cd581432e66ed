"""Combination-technique convolution on sparse grids and its error multiplier.

The error coefficient at wave vector k is

    1 - (-1)^(d-1) * sum_q (-1)^q C(d-1,q) * sum_{|l|_1 = n+q} prod_i a_i(l_i)

with per-axis factors a_i(l) = exp(-2 pi^2 k_i^2 / 2^(2l)).  Only d*(n+d-1)
distinct exponentials occur across every composition, so they are cached per
axis and each composition costs d-1 multiplications.  Summation order is
fixed (ascending q, lexicographic compositions, left-to-right accumulation)
so a result is bit-reproducible at a given precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .fourier_model import PeriodicFunction
from .numerics import (
    PrecisionContext,
    binomial,
    default_bits,
    format_paper_sci,
    make_context,
)

__all__ = [
    "ErrorCoefficientResult",
    "PrecisionPolicyError",
    "SparseApproximant",
    "TableCell",
    "asymptotic_coeff",
    "axis_factor_table",
    "comb_coeff",
    "layer_sum",
    "reproduce_table",
    "sparse_convolve",
    "sparse_error_coeff",
]


class PrecisionPolicyError(ValueError):
    """Precision below the default rule was requested without --force."""


def _check_args(n, d, k):
    if d < 2:
        raise ValueError("the combination technique needs d >= 2")
    if n < 1:
        raise ValueError("level must be >= 1")
    k = tuple(int(c) for c in k)
    if len(k) != d:
        raise ValueError("wave vector dimension must equal d")
    return k


def axis_factor_table(n: int, d: int, k, ctx: PrecisionContext) -> list:
    """Cached per-axis factors a_i(l) = exp(-2 pi^2 k_i^2 / 4^l), l = 1..max.

    The largest single level inside any layer |l|_1 = n+q (q <= d-1) is n,
    but the table is padded to n+d-1 so callers may reuse it across layers.
    """
    k = _check_args(n, d, k)
    two_pi_sq = ctx.two_pi_squared()
    four = ctx.real(4)
    max_level = n + (d - 1)
    table = []
    for ki in k:
        ksq = ki * ki
        column = [None]  # level 0 unused
        for level in range(1, max_level + 1):
            column.append(ctx.mp.exp(-two_pi_sq * ksq / four ** level))
        table.append(column)
    return table


def layer_sum(m: int, factors: list, ctx: PrecisionContext):
    """Sum of prod_i factors[i][l_i] over compositions |l|_1 = m (lex order).

    Terms are accumulated in lexicographic composition order with the
    left-to-right product tree; prefix products shared between consecutive
    compositions are reused, which changes no rounding (identical operation
    tree) but avoids re-multiplying common heads.
    """
    d = len(factors)
    if m < d:
        return ctx.zero
    if d == 1:
        return factors[0][m]
    total = ctx.zero
    last_axis = d - 1
    last_col = factors[last_axis]

    def descend(axis, remaining, prefix):
        nonlocal total
        if axis == last_axis:
            total = total + prefix * last_col[remaining]
            return
        col = factors[axis]
        for level in range(1, remaining - (last_axis - axis) + 1):
            descend(axis + 1, remaining - level, prefix * col[level])

    head = factors[0]
    for level in range(1, m - (d - 1) + 1):
        descend(1, m - level, head[level])
    return total


def comb_coeff(n: int, d: int, k, ctx: PrecisionContext):
    """Fourier multiplier of the combination-technique convolution operator."""
    k = _check_args(n, d, k)
    factors = axis_factor_table(n, d, k, ctx)
    sign = (-1) ** (d - 1)
    total = ctx.zero
    for q in range(d):
        weight = sign * (-1) ** q * binomial(d - 1, q)
        total = total + weight * layer_sum(n + q, factors, ctx)
    return total


def asymptotic_coeff(n: int, d: int, k, ctx: PrecisionContext):
    """Leading-order error coefficient:
    (2 pi^(2d) k_1^2...k_d^2 / (d-1)!) (3/2)^(d-1) n^(d-1) / 2^(2n)."""
    k = _check_args(n, d, k)
    prod = 1
    for ki in k:
        prod *= ki * ki
    if prod == 0:
        return ctx.zero
    value = 2 * ctx.pi ** (2 * d) * prod / math.factorial(d - 1)
    value = value * ctx.real(Fraction(3, 2)) ** (d - 1)
    value = value * ctx.real(n) ** (d - 1) / ctx.real(2) ** (2 * n)
    return value


@dataclass(frozen=True)
class ErrorCoefficientResult:
    """Computed error coefficient with its precision provenance."""

    n: int
    d: int
    k: tuple
    value: object
    bits: int
    asymptotic: object
    ratio: object
    reliable: bool = True

    def value_str(self) -> str:
        return format_paper_sci(self.value)

    def asymptotic_str(self) -> str:
        return format_paper_sci(self.asymptotic)


def sparse_error_coeff(
    n: int,
    d: int,
    k,
    ctx: PrecisionContext | None = None,
    force: bool = False,
) -> ErrorCoefficientResult:
    """Error coefficient 1 - comb_coeff, guarded by the default-precision rule.

    A context below default_bits(n, d) is rejected unless ``force`` is set,
    in which case the result is flagged unreliable.
    """
    k = _check_args(n, d, k)
    needed = default_bits(n, d)
    if ctx is None:
        ctx = make_context(needed)
    reliable = ctx.bits >= needed
    if not reliable and not force:
        raise PrecisionPolicyError(
            f"{ctx.bits} bits is below the default rule ({needed}); pass force"
        )
    value = 1 - comb_coeff(n, d, k, ctx)
    asymptotic = asymptotic_coeff(n, d, k, ctx)
    ratio = value / asymptotic if asymptotic != 0 else None
    return ErrorCoefficientResult(n, d, k, value, ctx.bits, asymptotic, ratio, reliable)


@dataclass(frozen=True)
class SparseApproximant:
    """Combination-technique approximant at level n."""

    base: PeriodicFunction
    level: int
    function: PeriodicFunction

    @property
    def dimension(self):
        return self.base.dimension


def sparse_convolve(f: PeriodicFunction, n: int, ctx: PrecisionContext) -> SparseApproximant:
    """Multiply every stored coefficient by the combination multiplier.

    The multiplier depends on k only through the multiset of squared
    components, so it is cached on that key across the support.
    """
    if f.dimension < 2:
        raise ValueError("sparse convolution needs dimension >= 2")
    cache = {}
    coeffs = {}
    for k in sorted(f.coefficients):
        key = tuple(sorted(abs(c) for c in k))
        mult = cache.get(key)
        if mult is None:
            mult = comb_coeff(n, f.dimension, k, ctx)
            cache[key] = mult
        coeffs[k] = ctx.mp.mpc(f.coefficients[k]) * mult
    return SparseApproximant(
        f, n, PeriodicFunction(f.dimension, coeffs, real_valued=f.real_valued)
    )


@dataclass(frozen=True)
class TableCell:
    n: int
    k: tuple
    result: ErrorCoefficientResult


def reproduce_table(d: int, k_list, n_list, bits=None, force=False) -> list:
    """Error-coefficient table rows (one cell per (n, k)).

    Precision follows the default rule per row unless ``bits`` overrides it
    (still subject to the policy check inside sparse_error_coeff).
    """
    cells = []
    for n in n_list:
        for k in k_list:
            ctx = make_context(bits) if bits is not None else None
            result = sparse_error_coeff(int(n), d, k, ctx, force=force)
            cells.append(TableCell(int(n), tuple(k), result))
    return cells
