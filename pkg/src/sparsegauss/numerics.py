"""Arbitrary-precision real arithmetic, exact rationals and table formatting.

Real arithmetic is delegated to per-instance mpmath contexts so that two
computations at different precisions never interfere.  Exact rationals are
``fractions.Fraction`` (re-exported as ``BigRational``); they carry every
identity check in :mod:`sparsegauss.sigma_oracle` because all quantities
there are dyadic-rational combinations of integer data.
"""

from __future__ import annotations

import math
from fractions import Fraction

from mpmath.ctx_mp import MPContext

__all__ = [
    "BigRational",
    "MIN_BITS",
    "PrecisionContext",
    "binomial",
    "default_bits",
    "exp_real",
    "format_paper_sci",
    "make_context",
    "paper_sci_renderings",
]

BigRational = Fraction

#: Smallest accepted mantissa precision, in bits.
MIN_BITS = 64


class PrecisionContext:
    """A fixed binary precision (round-to-nearest-even) for real arithmetic.

    Instances are immutable after construction and safe to share between
    threads; every operation is a pure function of its inputs.  The wrapped
    mpmath context has an unbounded exponent range, which matters here:
    quantities such as exp(-2*pi^2*500^2/4) occur with |log2| of order 10^6.
    """

    __slots__ = ("bits", "mp")

    def __init__(self, bits: int):
        if bits < MIN_BITS:
            raise ValueError(f"precision must be >= {MIN_BITS} bits, got {bits}")
        object.__setattr__(self, "bits", int(bits))
        mp = MPContext()
        mp.prec = int(bits)
        object.__setattr__(self, "mp", mp)

    def __setattr__(self, name, value):
        raise AttributeError("PrecisionContext is immutable")

    def __repr__(self):
        return f"PrecisionContext(bits={self.bits})"

    # -- conversions ----------------------------------------------------

    def real(self, x):
        """Convert ``x`` (int, float, Fraction, str or mpf) to this context.

        mpf values from other contexts are transferred exactly and only
        rounded by subsequent operations.
        """
        if isinstance(x, Fraction):
            if x.denominator == 1:
                return self.mp.mpf(x.numerator)
            return self.mp.mpf(x.numerator) / self.mp.mpf(x.denominator)
        if hasattr(x, "_mpf_"):
            return self.mp.make_mpf(x._mpf_)
        return self.mp.mpf(x)

    # -- constants and primitives ----------------------------------------

    @property
    def pi(self):
        return self.mp.pi

    @property
    def zero(self):
        return self.mp.mpf(0)

    @property
    def one(self):
        return self.mp.mpf(1)

    def two_pi_squared(self):
        """2*pi^2, the constant in the Gaussian Fourier multiplier."""
        return 2 * self.mp.pi ** 2

    def exp(self, x):
        # exact arguments convert under guard bits so the result carries the
        # full context accuracy even for large |x| (conversion error would
        # otherwise be amplified by |x|)
        if isinstance(x, (int, Fraction)):
            with self.mp.workprec(self.bits + 64):
                high = self.mp.exp(self.real(x))
            return self.real(high)
        return self.mp.exp(self.real(x))

    def sqrt(self, x):
        return self.mp.sqrt(self.real(x))

    def power(self, base, exponent):
        return self.mp.power(self.real(base), self.real(exponent))


def make_context(bits: int) -> PrecisionContext:
    """Create an arithmetic context with ``bits`` of mantissa precision."""
    return PrecisionContext(bits)


def default_bits(n: int, d: int) -> int:
    """Working precision for the level-``n``, dimension-``d`` error coefficient.

    The coefficient of magnitude ~ n^(d-1) 2^(-2n) emerges from cancellation
    of O(n^(d-1)) terms of size O(1), so 2n bits are consumed by the
    cancellation itself; 128 guard bits plus a term-count allowance cover
    accumulated rounding.
    """
    return 2 * n + 128 + math.ceil(d * math.log2(n + d))


def exp_real(x, ctx: PrecisionContext):
    """exp(x) at context precision (relative error <= 2^(1-bits))."""
    return ctx.exp(x)


def binomial(n: int, r: int) -> int:
    """Exact binomial coefficient C(n, r); zero when r > n."""
    if n < 0 or r < 0:
        raise ValueError("binomial expects non-negative arguments")
    if r > n:
        return 0
    return math.comb(n, r)


# Formatting runs in its own wide context: the rounding decision for three
# significant figures needs only a few dozen extra bits beyond the decimal
# rescaling, and 512 covers every magnitude the tables produce.
_FMT = PrecisionContext(512)


def _scaled_mantissa(x):
    """Return (y, e, negative) with y = |x| * 10^(2-e) in [100, 1000)."""
    mp = _FMT.mp
    ax = abs(_FMT.real(x))
    e = int(mp.floor(mp.log10(ax)))
    y = ax * mp.mpf(10) ** (2 - e)
    while y >= 1000:
        y = y / 10
        e += 1
    while y < 100:
        y = y * 10
        e -= 1
    return y, e


def _render(scaled: int, e: int, negative: bool) -> str:
    if scaled >= 1000:
        scaled //= 10
        e += 1
    body = f"{scaled // 100}.{scaled % 100:02d} ({e})"
    return "-" + body if negative else body


def format_paper_sci(x) -> str:
    """Render ``x`` as ``m.mm (e)`` with 3 significant figures, half-even.

    Exact zero renders as ``"0"``.  The layout matches the error-coefficient
    tables, e.g. ``9.67 (-21)``.
    """
    v = _FMT.real(x)
    if v == 0:
        return "0"
    negative = v < 0
    y, e = _scaled_mantissa(v)
    mp = _FMT.mp
    u = int(mp.floor(y))
    f = y - u
    if f > mp.mpf(1) / 2:
        u += 1
    elif f == mp.mpf(1) / 2 and u % 2 == 1:
        u += 1
    return _render(u, e, negative)


def paper_sci_renderings(x, band=0.1):
    """Primary rendering plus the alternates admissible at a rounding boundary.

    When the fourth significant digit region sits within ``band`` of the
    half-way tie, both adjacent third-digit renderings are acceptable
    transcriptions and the pair is returned; otherwise only the half-even
    rendering is.  Returns ``(primary, alternates, at_boundary)``.
    """
    primary = format_paper_sci(x)
    v = _FMT.real(x)
    if v == 0:
        return primary, {primary}, False
    negative = v < 0
    y, e = _scaled_mantissa(v)
    mp = _FMT.mp
    u = int(mp.floor(y))
    f = y - u
    at_boundary = abs(f - mp.mpf(1) / 2) <= band
    if not at_boundary:
        return primary, {primary}, False
    return primary, {_render(u, e, negative), _render(u + 1, e, negative)}, True


def parse_paper_sci(text: str) -> Fraction:
    """Inverse of :func:`format_paper_sci` (exact, for round-trip checks)."""
    text = text.strip()
    if text == "0":
        return Fraction(0)
    sign = 1
    if text.startswith("-"):
        sign = -1
        text = text[1:]
    mantissa, exponent = text.split(" ")
    exponent = int(exponent.strip("()"))
    return sign * Fraction(mantissa) * Fraction(10) ** exponent
