"""Exact rational oracles for the composition power sums and their identities.

Everything here is ``Fraction`` arithmetic: each summand k_i^2 / 2^(2 l_i) is
a dyadic rational, so brute-force enumeration, the dimensional recurrence and
the two-dimensional closed form must agree exactly, with no tolerances.
Polynomial-degree claims are certified by forward-difference annihilation
rather than by fitting coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .grids import compositions
from .numerics import binomial

__all__ = [
    "BivariatePolynomial",
    "Lemma41Report",
    "LeadingTermReport",
    "OracleDisagreement",
    "ResidualReport",
    "SigmaValue",
    "forward_difference",
    "geom_polys",
    "leading_term_check",
    "lemma41_check",
    "sigma1_residual_check",
    "sigma_bruteforce",
    "sigma_closed_d2",
    "sigma_recurrence",
    "weighted_geom",
]


class OracleDisagreement(AssertionError):
    """Two exact routes to the same quantity produced different values."""


@dataclass(frozen=True)
class SigmaValue:
    d: int
    p: int
    m: int
    k: tuple
    value: Fraction


def _check_sigma_args(d, p, m, k):
    k = tuple(int(c) for c in k)
    if d < 1:
        raise ValueError("d must be >= 1")
    if p < 0:
        raise ValueError("p must be >= 0")
    if m < d:
        raise ValueError("m must be >= d")
    if len(k) < d:
        raise ValueError("k must supply at least d components")
    return k[:d]


def sigma_bruteforce(d: int, p: int, m: int, k) -> SigmaValue:
    """sum over |l|_1 = m of (sum_i k_i^2 / 2^(2 l_i))^p, by enumeration."""
    k = _check_sigma_args(d, p, m, k)
    if p == 0:
        return SigmaValue(d, p, m, k, Fraction(binomial(m - 1, d - 1)))
    total = Fraction(0)
    for ell in compositions(m, d):
        s = Fraction(0)
        for ki, li in zip(k, ell):
            s += Fraction(ki * ki, 4 ** li)
        total += s ** p
    return SigmaValue(d, p, m, k, total)


def sigma_recurrence(d: int, p: int, m: int, k) -> SigmaValue:
    """Same sum via the dimensional recurrence over the last axis.

    The inner level ranges over 1..m-(d-1): the last component of a
    composition of m into d positive parts can be anything up to m-(d-1),
    and the reduced sum argument must stay >= d-1.  (The narrower range
    1..m-d drops the boundary term and breaks exact agreement with the
    enumeration, as the cross-oracle tests demonstrate.)
    """
    k = _check_sigma_args(d, p, m, k)
    memo = {}

    def sigma(dd, pp, mm):
        if mm < dd:
            return Fraction(0)
        if dd == 1:
            if pp == 0:
                return Fraction(1)
            return Fraction(k[0] * k[0], 4 ** mm) ** pp
        if pp == 0:
            return Fraction(binomial(mm - 1, dd - 1))
        key = (dd, pp, mm)
        if key in memo:
            return memo[key]
        kd_sq = k[dd - 1] * k[dd - 1]
        total = Fraction(0)
        for r in range(pp + 1):
            weight = binomial(pp, r) * Fraction(kd_sq) ** r
            inner = Fraction(0)
            for ld in range(1, mm - (dd - 1) + 1):
                sub = sigma(dd - 1, pp - r, mm - ld)
                if sub:
                    inner += sub / Fraction(4) ** (ld * r)
            total += weight * inner
        memo[key] = total
        return total

    return SigmaValue(d, p, m, k, sigma(d, p, m))


def sigma_closed_d2(p: int, m: int, k) -> SigmaValue:
    """Two-dimensional closed form (binomial split plus geometric sums)."""
    k = _check_sigma_args(2, p, m, k)
    if p < 1:
        raise ValueError("closed form applies for p >= 1")
    k1sq, k2sq = k[0] * k[0], k[1] * k[1]
    total = Fraction(0)
    for r in range(p + 1):
        if 2 * r == p:
            continue
        sym = Fraction(k1sq) ** r * Fraction(k2sq) ** (p - r)
        sym += Fraction(k1sq) ** (p - r) * Fraction(k2sq) ** r
        denom = Fraction(2) ** (2 * (p - 2 * r)) - 1
        total += binomial(p, r) * sym / (Fraction(4) ** (m * r) * denom)
    if p % 2 == 0:
        half = p // 2
        peak = binomial(p, half) * Fraction(k1sq) ** half * Fraction(k2sq) ** half
        total += peak * (m - 1) / Fraction(2) ** (m * p)
    return SigmaValue(2, p, m, k, total)


def forward_difference(values, order: int) -> Fraction:
    """Signed binomial functional: sum_q (-1)^(order-q) C(order,q) values[q]."""
    if order < 0:
        raise ValueError("order must be >= 0")
    values = list(values)
    if len(values) < order + 1:
        raise ValueError("need at least order+1 values")
    total = Fraction(0)
    for q in range(order + 1):
        total += (-1) ** (order - q) * binomial(order, q) * Fraction(values[q])
    return total


@dataclass(frozen=True)
class ResidualReport:
    d: int
    k: tuple
    m_values: tuple
    residuals: tuple
    window_differences: tuple
    passed: bool


def sigma1_residual_check(d: int, m_range, k) -> ResidualReport:
    """Strip the exact 2^(-2m) tail off sigma_{d,1}/|k|^2; what remains must
    be a polynomial of degree d-2, certified by (d-1)-fold difference
    annihilation on every window of the range."""
    m_values = tuple(int(m) for m in m_range)
    if len(m_values) < d + 1:
        raise ValueError("range must contain at least d+1 points")
    if any(m < d for m in m_values):
        raise ValueError("every m must be >= d")
    if list(m_values) != sorted(m_values) or len(set(m_values)) != len(m_values):
        raise ValueError("m_range must be strictly ascending")
    k = _check_sigma_args(d, 1, m_values[0], k)
    norm_sq = sum(c * c for c in k)
    tail_coeff = Fraction(-4, 3) ** (d - 1)  # (-1)^(d-1) (4/3)^(d-1)
    residuals = []
    for m in m_values:
        sigma = sigma_bruteforce(d, 1, m, k).value
        residuals.append(sigma / norm_sq - tail_coeff / Fraction(4) ** m)
    diffs = []
    for start in range(len(m_values) - (d - 1)):
        window = residuals[start : start + d]
        diffs.append((m_values[start], forward_difference(window, d - 1)))
    passed = all(delta == 0 for _, delta in diffs)
    return ResidualReport(d, k, m_values, tuple(residuals), tuple(diffs), passed)


@dataclass(frozen=True)
class Lemma41Report:
    d: int
    m: int
    r: int
    lhs_values: tuple
    remainders: tuple
    difference: Fraction
    passed: bool


def lemma41_check(d: int, m: int, r: int) -> Lemma41Report:
    """Finite binomial-weighted geometric sum minus its exact tail term is a
    polynomial of degree d-2 in m (window of length d starting at ``m``)."""
    if d < 2 or r < 1:
        raise ValueError("need d >= 2 and r >= 1")
    if m <= d:
        raise ValueError("lemma requires m > d")
    tail_base = (Fraction(4) ** r / (1 - Fraction(4) ** r)) ** (d - 1)
    lhs_values = []
    remainders = []
    for mm in range(m, m + d):
        lhs = Fraction(0)
        for j in range(1, mm - (d - 1) + 1):
            lhs += Fraction(binomial(mm - j - 1, d - 2), 4 ** (j * r))
        lhs_values.append(lhs)
        remainders.append(lhs - tail_base / Fraction(4) ** (r * mm))
    delta = forward_difference(remainders, d - 1)
    return Lemma41Report(d, m, r, tuple(lhs_values), tuple(remainders), delta, delta == 0)


class BivariatePolynomial:
    """Exact polynomial in x and n with Fraction coefficients.

    Only the little algebra the recurrence polynomials need: addition,
    multiplication, d/dx, evaluation and degree queries.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = {
            key: Fraction(v) for key, v in coeffs.items() if v != 0
        }

    @classmethod
    def constant(cls, c):
        return cls({(0, 0): Fraction(c)})

    @classmethod
    def x(cls):
        return cls({(1, 0): Fraction(1)})

    @classmethod
    def n(cls):
        return cls({(0, 1): Fraction(1)})

    def __add__(self, other):
        other = _as_poly(other)
        out = dict(self.coeffs)
        for key, v in other.coeffs.items():
            out[key] = out.get(key, Fraction(0)) + v
        return BivariatePolynomial(out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1) * _as_poly(other)

    def __mul__(self, other):
        other = _as_poly(other)
        out = {}
        for (i1, j1), a in self.coeffs.items():
            for (i2, j2), b in other.coeffs.items():
                key = (i1 + i2, j1 + j2)
                out[key] = out.get(key, Fraction(0)) + a * b
        return BivariatePolynomial(out)

    __rmul__ = __mul__

    def dx(self):
        out = {}
        for (i, j), a in self.coeffs.items():
            if i:
                out[(i - 1, j)] = out.get((i - 1, j), Fraction(0)) + a * i
        return BivariatePolynomial(out)

    def degree_x(self) -> int:
        return max((i for i, _ in self.coeffs), default=0)

    def degree_n(self) -> int:
        return max((j for _, j in self.coeffs), default=0)

    def __call__(self, x, n=0) -> Fraction:
        x = Fraction(x)
        n = Fraction(n)
        total = Fraction(0)
        for (i, j), a in self.coeffs.items():
            total += a * x ** i * n ** j
        return total

    def __eq__(self, other):
        return isinstance(other, BivariatePolynomial) and self.coeffs == other.coeffs

    def __repr__(self):
        terms = " + ".join(
            f"{a}*x^{i}*n^{j}" for (i, j), a in sorted(self.coeffs.items())
        )
        return f"BivariatePolynomial({terms or '0'})"


def _as_poly(v):
    if isinstance(v, BivariatePolynomial):
        return v
    return BivariatePolynomial.constant(v)


def geom_polys(i: int):
    """Recurrence polynomials (q_{i-1}, p_i) for the weighted geometric sum.

    Anchored at q_0 = 1 and p_1 = 1 + n - n x; each step applies
    q_j = (1 + j x) q_{j-1} + x (1-x) q'_{j-1} and
    p_{j+1} = (1 + j x + n - n x) p_j + x (1-x) dp_j/dx.
    """
    if i < 1:
        raise ValueError("i must be >= 1")
    x = BivariatePolynomial.x()
    n = BivariatePolynomial.n()
    one = BivariatePolynomial.constant(1)
    q = one
    p = one + n - n * x
    for j in range(1, i):
        q = (one + j * x) * q + x * (one - x) * q.dx()
        p = (one + j * x + n - n * x) * p + x * (one - x) * p.dx()
    return q, p


def _weighted_geom_direct(i: int, n: int, x: Fraction) -> Fraction:
    total = Fraction(0)
    for j in range(1, n + 1):
        total += Fraction(j) ** i * x ** j
    return total


def _weighted_geom_closed(i: int, n: int, x: Fraction) -> Fraction:
    if x == 1:
        raise ValueError("closed form requires x != 1")
    if i == 0:
        return x * (1 - x ** n) / (1 - x)
    q, p = geom_polys(i)
    return x / (1 - x) ** (i + 1) * (q(x) - x ** n * p(x, n))


def weighted_geom(i: int, n: int, x) -> Fraction:
    """G_i^(n)(x) = sum_{j=1}^n j^i x^j, exact.

    For x != 1 the direct sum and the closed form are both evaluated and must
    agree; a mismatch raises :class:`OracleDisagreement`.
    """
    if i < 0 or n < 1:
        raise ValueError("need i >= 0 and n >= 1")
    x = Fraction(x)
    direct = _weighted_geom_direct(i, n, x)
    if x != 1:
        closed = _weighted_geom_closed(i, n, x)
        if closed != direct:
            raise OracleDisagreement(
                f"G_{i}^({n})({x}): direct {direct} != closed form {closed}"
            )
    return direct


@dataclass(frozen=True)
class LeadingTermReport:
    d: int
    p: int
    k: tuple
    n_values: tuple
    scaled: tuple            # s(n) * 2^(2n) / n^power with power per gate below
    power: int               # d-1 when p == d else d-2
    limit_estimate: Fraction
    expected_constant: Fraction | None
    cauchy_ok: bool


def leading_term_check(d: int, p: int, k, n_range) -> LeadingTermReport:
    """Forward-differenced sigma growth against its leading-term law.

    s(n) = Delta^(d-1) sigma_{d,p}(n + .) is computed exactly; the scaled
    sequence s(n) 2^(2n) / n^(d-1) must settle (p = d) at the signed constant
    d k_1^2...k_d^2 (-3/4)^(d-1) coming from the binomial identity at x = 1/4,
    while for p != d the gate quantity is s(n) 2^(2n) / n^(d-2).  Settling is
    asserted as a Cauchy condition: the last three scaled values must agree
    pairwise within 5% of the final one.
    """
    if p < 2:
        raise ValueError("leading-term structure applies for p >= 2")
    k = _check_sigma_args(d, p, max(n_range), k)
    if any(c == 0 for c in k):
        raise ValueError("k must have no zero component")
    n_values = tuple(int(n) for n in n_range)
    if list(n_values) != sorted(n_values) or len(n_values) < 3:
        raise ValueError("n_range must be ascending with at least 3 points")
    if n_values[0] < d:
        raise ValueError("min(n_range) must be >= d")
    power = d - 1 if p == d else d - 2
    scaled = []
    for n in n_values:
        window = [sigma_bruteforce(d, p, n + q, k).value for q in range(d)]
        s = forward_difference(window, d - 1)
        scaled.append(s * Fraction(4) ** n / Fraction(n) ** power)
    expected = None
    if p == d:
        prod = 1
        for c in k:
            prod *= c * c
        expected = d * prod * Fraction(-3, 4) ** (d - 1)
    elif d == 2:
        # paper's d=2 constant C(k,p,2), scaled by the Delta^1 factor -(3/4)
        num = p * (
            Fraction(k[0] * k[0]) ** (p - 1) * (k[1] * k[1])
            + (k[0] * k[0]) * Fraction(k[1] * k[1]) ** (p - 1)
        )
        c_kp2 = num / (Fraction(2) ** (2 * (p - 2)) - 1)
        expected = Fraction(-3, 4) * c_kp2
    last3 = scaled[-3:]
    ref = abs(last3[-1])
    cauchy_ok = ref > 0 and all(
        abs(a - b) <= Fraction(5, 100) * ref for a in last3 for b in last3
    )
    return LeadingTermReport(
        d, p, k, n_values, tuple(scaled), power, scaled[-1], expected, cauchy_ok
    )
