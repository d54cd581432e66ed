from fractions import Fraction

import pytest

from helpers_oracle import mpf_to_fraction, reference_error_coeff, relative_difference
from sparsegauss.fourier_model import make_test_function, PeriodicFunction
from sparsegauss.fullgrid import sup_error
from sparsegauss.grids import compositions
from sparsegauss.numerics import default_bits, make_context
from sparsegauss.sparse_combination import (
    PrecisionPolicyError,
    asymptotic_coeff,
    comb_coeff,
    reproduce_table,
    sparse_convolve,
    sparse_error_coeff,
)


def test_comb_coeff_constant_mode_is_exact_one():
    # at k = 0 every factor is exp(0) = 1, so the layer sums are exact
    # integer composition counts and the binomial identity telescopes exactly
    for d, n in [(2, 1), (2, 7), (3, 5), (4, 6), (5, 9)]:
        ctx = make_context(default_bits(n, d))
        assert comb_coeff(n, d, (0,) * d, ctx) == 1


def test_comb_coeff_matches_uncached_recomputation():
    n, d, k = 4, 2, (1, 1)
    ctx = make_context(default_bits(n, d))
    cached = comb_coeff(n, d, k, ctx)
    # direct oracle: recompute each exponential inside the loop, no table
    sign = (-1) ** (d - 1)
    total = ctx.zero
    for q in range(d):
        layer = ctx.zero
        for ell in compositions(n + q, d):
            term = ctx.one
            for ki, li in zip(k, ell):
                term = term * ctx.mp.exp(
                    -ctx.two_pi_squared() * ki * ki / ctx.real(4) ** li
                )
            layer = layer + term
        total = total + sign * (-1) ** q * layer
    assert cached == total


def test_comb_coeff_depends_on_squared_multiset():
    ctx = make_context(256)
    tol = Fraction(2) ** (8 - ctx.bits)
    base = mpf_to_fraction(comb_coeff(6, 2, (1, 2), ctx))
    for k in ((2, 1), (-1, 2), (2, -1)):
        other = mpf_to_fraction(comb_coeff(6, 2, k, ctx))
        assert abs(other - base) <= tol * abs(base)
    base3 = mpf_to_fraction(comb_coeff(6, 3, (1, 2, 3), ctx))
    for k in ((3, 1, 2), (-2, 3, 1)):
        other = mpf_to_fraction(comb_coeff(6, 3, k, ctx))
        assert abs(other - base3) <= tol * abs(base3)


def test_sparse_error_coeff_zero_mode_exact():
    for d in (2, 3, 4):
        res = sparse_error_coeff(9, d, (0,) * d)
        assert res.value == 0
        assert res.asymptotic == 0 and res.ratio is None


def test_sparse_error_coeff_matches_independent_implementation():
    cases = [
        (12, 3, (1, 1, 1)),
        (40, 2, (1, 1)),
        (16, 2, (5, 7)),
        (80, 3, (500, 700, 900)),  # large-k cell with extreme exponents
    ]
    for (n, d, k) in cases:
        res = sparse_error_coeff(n, d, k)
        mine = mpf_to_fraction(res.value)
        reference = reference_error_coeff(n, d, k, 2 * res.bits)
        assert relative_difference(mine, reference) < 1e-30


def test_sparse_error_coeff_table_one_cell():
    res = sparse_error_coeff(40, 2, (1, 1))
    # exact value 8.695666...e-21 (dual-route verified); note the paper's
    # printed cell is 8.69 (-21), one final digit below the half-even render
    assert str(float(res.value)).startswith("8.695666")
    assert res.value_str() == "8.70 (-21)"
    assert res.asymptotic_str() == "9.67 (-21)"
    assert abs(float(res.ratio) - 0.89934) < 1e-4
    assert res.bits == default_bits(40, 2) == 219


def test_sparse_error_coeff_precision_policy():
    with pytest.raises(PrecisionPolicyError):
        sparse_error_coeff(40, 2, (1, 1), make_context(64))
    res = sparse_error_coeff(40, 2, (1, 1), make_context(64), force=True)
    assert not res.reliable


def test_sparse_error_coeff_d2_expansion_consistency():
    # independent route: 1 + L(n) - L(n+1) with plain per-layer sums
    n, k = 10, (1, 3)
    ctx = make_context(default_bits(n, 2))
    res = sparse_error_coeff(n, 2, k, ctx)

    def layer(m):
        total = ctx.zero
        for i in range(1, m):
            j = m - i
            total = total + ctx.mp.exp(
                -ctx.two_pi_squared() * (k[0] ** 2) / ctx.real(4) ** i
            ) * ctx.mp.exp(-ctx.two_pi_squared() * (k[1] ** 2) / ctx.real(4) ** j)
        return total

    direct = 1 + layer(n) - layer(n + 1)
    assert abs(mpf_to_fraction(direct) - mpf_to_fraction(res.value)) <= Fraction(
        2
    ) ** (8 - ctx.bits)


def test_error_coeff_matches_exact_sigma_series():
    # third route: expand every layer exponential into composition power
    # sums (exact rationals), difference them, and resum with the factorial
    # weights; ties the floating pipeline to the rational oracles
    from sparsegauss.sigma_oracle import forward_difference, sigma_bruteforce

    for n, d, k in [(16, 2, (1, 2)), (12, 3, (1, 1, 1))]:
        res = sparse_error_coeff(n, d, k)
        ctx = make_context(res.bits + 64)
        total = ctx.zero
        minus_two_pi_sq = -ctx.two_pi_squared()
        for p in range(1, 261):
            window = [sigma_bruteforce(d, p, n + q, k).value for q in range(d)]
            delta = forward_difference(window, d - 1)
            weight = -(minus_two_pi_sq ** p) / ctx.mp.factorial(p)
            term = weight * ctx.real(delta)
            total = total + term
            if p > 40 and abs(term) < abs(total) * ctx.real(2) ** (-res.bits - 48):
                break
        series = mpf_to_fraction(total)
        direct = mpf_to_fraction(res.value)
        # the comparison floor is the direct value's own accuracy: its bits
        # minus the cancellation it absorbs (terms of size O(1) collapsing
        # to the coefficient), so allow a generous cancellation budget
        assert abs((series - direct) / direct) < Fraction(2) ** (48 - res.bits)


def test_precision_doubling_stability():
    for (n, d, k) in [(16, 2, (1, 1)), (12, 3, (1, 2, 1))]:
        base_bits = default_bits(n, d)
        a = mpf_to_fraction(sparse_error_coeff(n, d, k).value)
        b = mpf_to_fraction(
            sparse_error_coeff(n, d, k, make_context(2 * base_bits)).value
        )
        assert abs((a - b) / b) <= Fraction(2) ** -(base_bits - 64)


def test_asymptotic_coeff_values():
    ctx = make_context(256)
    assert str(float(asymptotic_coeff(40, 2, (1, 1), ctx))).startswith("9.66898939")
    res = sparse_error_coeff(40, 3, (500, 700, 900))
    assert res.asymptotic_str() == "2.84 (-1)"
    assert asymptotic_coeff(11, 3, (3, 0, 2), ctx) == 0


def test_ratio_tends_to_one_small_levels():
    ratios = [
        float(sparse_error_coeff(n, 2, (1, 1)).ratio) for n in (10, 20, 40, 80)
    ]
    assert all(a < b for a, b in zip(ratios, ratios[1:]))
    assert all(0 < r < 1 for r in ratios)


def test_sparse_convolve_constant_nearly_unchanged():
    ctx = make_context(256)
    f = PeriodicFunction(2, {(0, 0): 1.0}, real_valued=True)
    approx = sparse_convolve(f, 6, ctx)
    assert approx.function.coefficients[(0, 0)] == 1  # exact at k = 0


def test_sparse_convolve_sup_error_is_error_coefficient():
    ctx = make_context(256)
    f = make_test_function("product_cosine", 2)
    approx = sparse_convolve(f, 6, ctx)
    sup = sup_error(f, approx, 32, ctx)
    expected = sparse_error_coeff(6, 2, (1, 1), ctx, force=(ctx.bits < default_bits(6, 2)))
    diff = abs(mpf_to_fraction(sup) - mpf_to_fraction(expected.value))
    assert diff <= abs(mpf_to_fraction(expected.value)) * Fraction(2) ** (16 - 256)


def test_sparse_rate_ratio_law():
    # Ehat(n+1)/Ehat(n) ~ ((n+1)/n)/4, within 2% from n = 20 on
    values = {
        n: mpf_to_fraction(sparse_error_coeff(n, 2, (1, 1)).value)
        for n in range(20, 25)
    }
    for n in range(20, 24):
        ratio = values[n + 1] / values[n]
        target = Fraction(n + 1, 4 * n)
        assert abs(ratio / target - 1) <= Fraction(2, 100)


def test_reproduce_table_small():
    cells = reproduce_table(2, [(1, 1)], [10, 20])
    assert len(cells) == 2
    ctx = make_context(256)
    for cell in cells:
        assert cell.result.asymptotic_str() == (
            sparse_error_coeff(cell.n, 2, (1, 1)).asymptotic_str()
        )
    assert cells[0].result.bits == default_bits(10, 2)


def test_comb_coeff_argument_validation():
    ctx = make_context(128)
    with pytest.raises(ValueError):
        comb_coeff(4, 1, (1,), ctx)
    with pytest.raises(ValueError):
        comb_coeff(4, 2, (1, 2, 3), ctx)
    with pytest.raises(ValueError):
        sparse_convolve(PeriodicFunction(1, {(1,): 1.0}), 4, ctx)
