"""Finitely supported Fourier series on [0,1]^d and the Gaussian multiplier.

Wave vectors are plain integer tuples; coefficients are stored sparsely as a
mapping from wave vector to a complex value (Python ``complex`` or an mpmath
``mpc``; both embed exactly into any working precision).
"""

from __future__ import annotations

import cmath
import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .numerics import PrecisionContext, make_context

__all__ = [
    "PeriodicFunction",
    "ScaleVector",
    "axis_multiplier",
    "evaluate",
    "evaluate_on_grid",
    "gaussian_hat",
    "load_function_json",
    "make_test_function",
    "sobolev_norm",
]


def _as_wavevector(k) -> tuple:
    k = tuple(int(c) for c in k)
    if not k:
        raise ValueError("wave vector must have dimension >= 1")
    return k


@dataclass(frozen=True)
class ScaleVector:
    """Per-axis positive scales h_i, exact rationals."""

    scales: tuple

    def __post_init__(self):
        scales = tuple(Fraction(s) for s in self.scales)
        if not scales or any(s <= 0 for s in scales):
            raise ValueError("scales must be a non-empty vector of positive values")
        object.__setattr__(self, "scales", scales)

    @classmethod
    def from_levels(cls, levels) -> "ScaleVector":
        """h_i = 2^(-l_i) for a positive integer level vector."""
        levels = tuple(int(l) for l in levels)
        if any(l < 1 for l in levels):
            raise ValueError("levels must be >= 1")
        return cls(tuple(Fraction(1, 2 ** l) for l in levels))

    @classmethod
    def uniform(cls, d: int, h) -> "ScaleVector":
        return cls((Fraction(h),) * d)

    @property
    def dimension(self) -> int:
        return len(self.scales)

    def __iter__(self):
        return iter(self.scales)

    def __getitem__(self, i):
        return self.scales[i]


@dataclass(frozen=True)
class PeriodicFunction:
    """A [0,1]^d-periodic function given by finitely many Fourier coefficients.

    When ``real_valued`` is set, the stored support must be closed under
    negation with conjugate-symmetric coefficients; this is validated at
    construction so that downstream real evaluations are legitimate.
    """

    dimension: int
    coefficients: dict
    real_valued: bool = False

    def __post_init__(self):
        coeffs = {}
        for k, c in self.coefficients.items():
            k = _as_wavevector(k)
            if len(k) != self.dimension:
                raise ValueError(f"wave vector {k} has wrong dimension")
            coeffs[k] = c if hasattr(c, "conjugate") else complex(c)
        object.__setattr__(self, "coefficients", coeffs)
        if self.real_valued:
            for k, c in coeffs.items():
                neg = tuple(-ci for ci in k)
                if neg not in coeffs:
                    raise ValueError(f"real_valued needs -{k} in the support")
                if coeffs[neg] != _conj(c):
                    raise ValueError(f"coefficient at -{k} is not the conjugate")

    def support(self):
        return set(self.coefficients)

    def coefficient(self, k):
        return self.coefficients.get(_as_wavevector(k), 0)

    def abs_coefficient_sum(self) -> float:
        return sum(abs(c) for c in self.coefficients.values())


def _conj(c):
    return c.conjugate()


def gaussian_hat(z, ctx: PrecisionContext):
    """Fourier transform of the normalized univariate Gaussian: exp(-2 pi^2 z^2)."""
    zr = ctx.real(z)
    return ctx.mp.exp(-ctx.two_pi_squared() * zr * zr)


def axis_multiplier(h: ScaleVector, k, ctx: PrecisionContext):
    """Product of per-axis Gaussian transforms at arguments h_i * k_i."""
    k = _as_wavevector(k)
    if len(k) != h.dimension:
        raise ValueError("scale vector and wave vector dimensions differ")
    out = ctx.one
    for hi, ki in zip(h, k):
        out = out * gaussian_hat(hi * ki, ctx)
    return out


def _phase(k, x, ctx):
    """e_k(x) = exp(2 pi i k.x), with the argument kept exact when x is rational."""
    t = 0
    exact = True
    for ki, xi in zip(k, x):
        if isinstance(xi, (int, Fraction)):
            t += 2 * ki * Fraction(xi)
        else:
            exact = False
            break
    if exact:
        return ctx.mp.expjpi(ctx.real(t))
    acc = ctx.zero
    for ki, xi in zip(k, x):
        acc = acc + 2 * ki * ctx.real(xi)
    return ctx.mp.expjpi(acc)


def _series_sum(coefficients, x, ctx):
    total = ctx.mp.mpc(0)
    for k in sorted(coefficients):
        c = coefficients[k]
        total = total + ctx.mp.mpc(c) * _phase(k, x, ctx)
    return total


def evaluate(f: PeriodicFunction, x, ctx: PrecisionContext):
    """Evaluate the finite series at ``x``; real part alone when real_valued."""
    x = tuple(x)
    if len(x) != f.dimension:
        raise ValueError("evaluation point has wrong dimension")
    total = _series_sum(f.coefficients, x, ctx)
    if not f.real_valued:
        return total
    scale = sum(abs(c) for c in f.coefficients.values())
    if abs(total.imag) > ctx.real(scale) * ctx.mp.mpf(2) ** (8 - ctx.bits):
        raise ArithmeticError("imaginary residual exceeds the real-valued contract")
    return total.real


def evaluate_on_grid(f, resolution: int, ctx: PrecisionContext):
    """Values on the uniform grid {0, 1/res, ..., 1}^d (d <= 2 separably).

    Returns a flat dict mapping integer grid multi-indices to values.  The
    separable pass keeps the cost at O(res^d * support per axis) instead of
    O(res^d * support).
    """
    coeffs = f.coefficients if isinstance(f, PeriodicFunction) else f
    d = len(next(iter(coeffs)))
    if d != 2:
        out = {}
        real = isinstance(f, PeriodicFunction) and f.real_valued
        for idx in _grid_indices(resolution, d):
            x = tuple(Fraction(i, resolution) for i in idx)
            total = _series_sum(coeffs, x, ctx)
            out[idx] = total.real if real else total
        return out
    # group by k1, transform along axis 2, then along axis 1
    k1_groups = {}
    for (k1, k2), c in coeffs.items():
        k1_groups.setdefault(k1, []).append((k2, c))
    phase_cache = {}

    def unit_phase(k, i):
        key = (2 * k * i) % (2 * resolution)
        val = phase_cache.get(key)
        if val is None:
            val = ctx.mp.expjpi(ctx.real(Fraction(key, resolution)))
            phase_cache[key] = val
        return val

    partial = {}
    for k1, terms in sorted(k1_groups.items()):
        row = []
        for i2 in range(resolution + 1):
            acc = ctx.mp.mpc(0)
            for k2, c in sorted(terms):
                acc = acc + ctx.mp.mpc(c) * unit_phase(k2, i2)
            row.append(acc)
        partial[k1] = row
    real = isinstance(f, PeriodicFunction) and f.real_valued
    out = {}
    for i1 in range(resolution + 1):
        for i2 in range(resolution + 1):
            acc = ctx.mp.mpc(0)
            for k1, row in partial.items():
                acc = acc + row[i2] * unit_phase(k1, i1)
            out[(i1, i2)] = acc.real if real else acc
    return out


def _grid_indices(resolution, d):
    import itertools

    return itertools.product(range(resolution + 1), repeat=d)


def sobolev_norm(f: PeriodicFunction, beta, ctx: PrecisionContext | None = None):
    """Periodic Sobolev seminorm: sqrt(sum_{k != 0} |k|^(2 beta) |f^(k)|^2)."""
    if ctx is None:
        ctx = make_context(256)
    total = ctx.zero
    for k in sorted(f.coefficients):
        if all(c == 0 for c in k):
            continue
        c = f.coefficients[k]
        norm_sq = sum(ci * ci for ci in k)
        csq = ctx.real(abs(c) ** 2) if isinstance(c, complex) else abs(ctx.mp.mpc(c)) ** 2
        total = total + ctx.power(norm_sq, beta) * csq
    return ctx.sqrt(total)


def _mode_phase(seed: int, k) -> complex:
    """Deterministic unit phase for beta_decay_random.

    One ``random.Random`` per mode, seeded with the documented string
    ``"beta-decay:<seed>:<k1>,<k2>,..."`` (string seeding is platform-stable),
    so coefficient sets are reproducible and independent of dict order.
    """
    tag = "beta-decay:%d:%s" % (seed, ",".join(str(c) for c in k))
    theta = random.Random(tag).random()
    return cmath.exp(2j * math.pi * theta)


def make_test_function(kind: str, d: int, **params) -> PeriodicFunction:
    """Built-in test families for convergence studies."""
    if kind == "product_cosine":
        import itertools

        coeff = 0.5 ** d
        coeffs = {k: coeff for k in itertools.product((-1, 1), repeat=d)}
        return PeriodicFunction(d, coeffs, real_valued=True)
    if kind == "trig_monomial_pair":
        k0 = _as_wavevector(params["k0"])
        if len(k0) != d:
            raise ValueError("k0 has wrong dimension")
        neg = tuple(-c for c in k0)
        return PeriodicFunction(d, {k0: 0.5, neg: 0.5}, real_valued=True)
    if kind == "beta_decay_random":
        beta = float(params["beta"])
        K = int(params["K"])
        seed = int(params.get("seed", 0))
        if K < 1:
            raise ValueError("K must be >= 1")
        import itertools

        coeffs = {}
        expo = beta + d / 2 + 0.5
        for k in itertools.product(range(-K, K + 1), repeat=d):
            if all(c == 0 for c in k) or k in coeffs:
                continue
            neg = tuple(-c for c in k)
            u = _mode_phase(seed, max(k, neg))
            r = math.sqrt(sum(c * c for c in k)) ** -expo
            rep = max(k, neg)
            coeffs[rep] = u * r
            coeffs[min(k, neg)] = (u * r).conjugate()
        return PeriodicFunction(d, coeffs, real_valued=True)
    raise ValueError(f"unknown test function family: {kind}")


def load_function_json(source) -> PeriodicFunction:
    """Load a function spec: {"dimension": d, "coefficients": [{"k", "re", "im"}]}.

    Hermitian symmetry is validated when "real_valued" is present and true.
    """
    if isinstance(source, (str, bytes)):
        data = json.loads(source)
    else:
        data = json.load(source)
    d = int(data["dimension"])
    coeffs = {}
    for entry in data["coefficients"]:
        k = _as_wavevector(entry["k"])
        coeffs[k] = complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))
    return PeriodicFunction(d, coeffs, real_valued=bool(data.get("real_valued", False)))
