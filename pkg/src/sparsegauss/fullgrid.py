"""Full-grid Gaussian convolution, the discrete quasi-interpolant, and
sup-norm convergence studies.

The convolution operator acts purely in Fourier space (coefficient-wise
multiplication); the quasi-interpolant is the genuinely discrete object,
summing sampled values against shifted normalized Gaussians.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .fourier_model import (
    PeriodicFunction,
    ScaleVector,
    axis_multiplier,
    evaluate_on_grid,
)
from .numerics import PrecisionContext, make_context

__all__ = [
    "ConvolutionApproximant",
    "OrderPoint",
    "QuasiInterpolant",
    "constant_reproduction_bound",
    "convolve",
    "error_coeff_full",
    "order_study",
    "quasi_interpolant_eval",
    "sample_quasi_interpolant",
    "sup_error",
    "truncation_radius",
]

#: Sampling grids finer than this are pointless for the trigonometric test
#: families and make high-precision scans intractable; order_study caps its
#: default 2^(n+3) rule here.
MAX_DEFAULT_RESOLUTION = 256


def error_coeff_full(h: ScaleVector, k, ctx: PrecisionContext):
    """Error multiplier of full-grid convolution: 1 - prod_i psi_hat(h_i k_i)."""
    return 1 - axis_multiplier(h, k, ctx)


@dataclass(frozen=True)
class ConvolutionApproximant:
    """Convolution approximant: base coefficients scaled by the Gaussian multiplier."""

    base: PeriodicFunction
    scale: ScaleVector
    function: PeriodicFunction

    @property
    def dimension(self):
        return self.base.dimension


def convolve(f: PeriodicFunction, h: ScaleVector, ctx: PrecisionContext) -> ConvolutionApproximant:
    """Multiply every stored coefficient by the kernel transform at h * k."""
    if h.dimension != f.dimension:
        raise ValueError("scale vector dimension mismatch")
    coeffs = {}
    for k in sorted(f.coefficients):
        mult = axis_multiplier(h, k, ctx)
        coeffs[k] = ctx.mp.mpc(f.coefficients[k]) * mult
    return ConvolutionApproximant(
        f, h, PeriodicFunction(f.dimension, coeffs, real_valued=f.real_valued)
    )


def truncation_radius(bits_out: int = 80) -> int:
    """Window radius keeping the discarded Gaussian tail below 2^-bits_out."""
    return math.ceil(math.sqrt(2 * math.log(2) * bits_out)) + 1


@dataclass(frozen=True)
class QuasiInterpolant:
    """Sampled data for Q_h with uniform h = 2^-n and window radius R."""

    dimension: int
    level: int
    samples: dict
    truncation_radius: int


def sample_quasi_interpolant(
    f: PeriodicFunction, n: int, ctx: PrecisionContext, bits_out: int = 80
) -> QuasiInterpolant:
    """Sample ``f`` over one period of the 2^-n lattice."""
    if n < 1:
        raise ValueError("level must be >= 1")
    size = 2 ** n
    values = evaluate_on_grid(f, size, ctx)
    samples = {
        idx: v
        for idx, v in values.items()
        if all(c < size for c in idx)
    }
    return QuasiInterpolant(f.dimension, n, samples, truncation_radius(bits_out))


_PSI_CACHE = {}
_SQRT_2PI = {}


def _psi1(t, ctx: PrecisionContext):
    """Normalized univariate Gaussian (2 pi)^(-1/2) exp(-t^2/2), cached."""
    key = (ctx.bits, t)
    val = _PSI_CACHE.get(key)
    if val is not None:
        return val
    root = _SQRT_2PI.get(ctx.bits)
    if root is None:
        root = ctx.sqrt(2 * ctx.pi)
        _SQRT_2PI[ctx.bits] = root
    tr = ctx.real(t)
    val = ctx.mp.exp(-tr * tr / 2) / root
    if isinstance(t, (int, Fraction)):
        _PSI_CACHE[key] = val
    return val


def quasi_interpolant_eval(q: QuasiInterpolant, x, ctx: PrecisionContext):
    """Q_h(f)(x): kernel-weighted sum over the lattice window around x/h.

    Window per axis: |x_i/h - j_i| <= R with sample indices wrapped one
    period; summation runs in lexicographic j order.
    """
    x = tuple(Fraction(c) for c in x)
    if len(x) != q.dimension:
        raise ValueError("dimension mismatch")
    size = 2 ** q.level
    R = q.truncation_radius
    axes = []
    for xi in x:
        t = xi * size
        center = round(t)
        entries = []
        for j in range(center - R, center + R + 1):
            if abs(t - j) <= R:
                entries.append((j % size, _psi1(t - j, ctx)))
        axes.append(entries)
    total = ctx.zero
    for combo in itertools.product(*axes):
        idx = tuple(c[0] for c in combo)
        w = combo[0][1]
        for c in combo[1:]:
            w = w * c[1]
        total = total + q.samples[idx] * w
    return total


def constant_reproduction_bound(R: int, d: int, ctx: PrecisionContext):
    """Documented bound on |Q_h(1)(x) - 1|.

    Two contributions: the periodization ripple of the Gaussian partition of
    unity (sum_j psi(t - j) = 1 + 2 sum_m exp(-2 pi^2 m^2) cos(...), an
    R-independent floor ~ 2d exp(-2 pi^2)) and the window truncation tail.
    """
    ripple_1d = 2 * (ctx.exp(-2 * ctx.pi ** 2) + ctx.exp(-8 * ctx.pi ** 2))
    ripple = (1 + ripple_1d) ** d - 1
    trunc = (2 * R + 3) ** d * ctx.exp(-ctx.real((R - 1) ** 2) / 2)
    trunc = trunc / _psi_norm(d, ctx)
    return ripple + trunc


def _psi_norm(d, ctx):
    return (2 * ctx.pi) ** (ctx.real(d) / 2)


def _grid_values(obj, resolution: int, ctx: PrecisionContext):
    if isinstance(getattr(obj, "function", None), PeriodicFunction):
        obj = obj.function
    if isinstance(obj, PeriodicFunction) or (
        hasattr(obj, "coefficients") and hasattr(obj, "dimension")
    ):
        return evaluate_on_grid(obj, resolution, ctx)
    # plain callable on exact grid points
    values = {}
    for idx in itertools.product(range(resolution + 1), repeat=_callable_dim(obj)):
        x = tuple(Fraction(i, resolution) for i in idx)
        values[idx] = obj(x)
    return values


def _callable_dim(obj):
    d = getattr(obj, "dimension", None)
    if d is None:
        raise ValueError("callable evaluators must expose a .dimension attribute")
    return d


def sup_error(a, b, resolution: int, ctx: PrecisionContext):
    """max |a(x) - b(x)| over the uniform grid with (resolution+1)^d points."""
    va = _grid_values(a, resolution, ctx)
    vb = _grid_values(b, resolution, ctx)
    if set(va) != set(vb):
        raise ValueError("evaluators disagree on dimension")
    best = ctx.zero
    for idx in sorted(va):
        diff = abs(va[idx] - vb[idx])
        if diff > best:
            best = diff
    return best


@dataclass(frozen=True)
class OrderPoint:
    n: int
    error: object
    log2_ratio: float | None


def default_resolution(n: int) -> int:
    return min(2 ** (n + 3), MAX_DEFAULT_RESOLUTION)


def order_study(
    f: PeriodicFunction,
    n_range,
    ctx: PrecisionContext | None = None,
    resolution: int | None = None,
) -> list:
    """Sup errors of full-grid convolution over ascending levels, with the
    observed log2 convergence ratios between consecutive levels."""
    if ctx is None:
        ctx = make_context(256)
    if not f.real_valued:
        raise ValueError("order studies expect a real-valued function")
    points = []
    previous = None
    for n in n_range:
        h = ScaleVector.uniform(f.dimension, Fraction(1, 2 ** n))
        approx = convolve(f, h, ctx)
        res = resolution if resolution is not None else default_resolution(n)
        err = sup_error(f, approx, res, ctx)
        ratio = None
        if previous is not None and err > 0 and previous > 0:
            ratio = float(ctx.mp.log(previous / err) / ctx.mp.log(2))
        points.append(OrderPoint(n, err, ratio))
        previous = err
    return points
