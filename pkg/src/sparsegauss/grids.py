"""Composition enumeration, anisotropic grids, and both sparse-grid builds.

Grid nodes are tuples of ``Fraction`` (dyadic rationals in lowest terms), so
set membership, union and the signed-multiplicity bookkeeping are exact.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterator, NamedTuple

from .numerics import binomial

__all__ = [
    "SignedGridTerm",
    "combination_terms",
    "compositions",
    "grid_nodes",
    "node_in_grid",
    "signed_multiplicity",
    "sparse_union_nodes",
]


def compositions(m: int, d: int) -> Iterator[tuple]:
    """All vectors l with l_i >= 1 and sum m, in lexicographic order.

    Empty when m < d; the count is C(m-1, d-1).
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if m < d:
        return
    if d == 1:
        yield (m,)
        return
    # iterative lex-order odometer over the first d-1 parts
    c = [1] * d
    c[d - 1] = m - (d - 1)
    while True:
        yield tuple(c)
        if c[d - 1] > 1:
            i = d - 2
        else:
            t = d - 2
            while t >= 0 and c[t] == 1:
                t -= 1
            # c[t] > 1 is the rightmost bumpable interior slot's successor
            i = t - 1
            if i < 0:
                return
        c[i] += 1
        head = sum(c[: i + 1])
        for j in range(i + 1, d - 1):
            c[j] = 1
        c[d - 1] = m - head - (d - 2 - i)


class SignedGridTerm(NamedTuple):
    """One inclusion-exclusion term: an anisotropic sub-grid and its weight."""

    index: tuple
    coefficient: int


def grid_nodes(index) -> set:
    """The tensor grid {j_i / 2^(l_i) : 0 <= j_i <= 2^(l_i)} as exact nodes."""
    index = tuple(int(l) for l in index)
    if any(l < 1 for l in index):
        raise ValueError("levels must be >= 1")
    axes = [[Fraction(j, 2 ** l) for j in range(2 ** l + 1)] for l in index]
    return set(itertools.product(*axes))


def node_in_grid(x, index) -> bool:
    """Exact membership of ``x`` in the grid of ``index`` (no enumeration).

    A coordinate lies on the axis grid iff it is in [0,1] and its lowest-terms
    denominator is a power of two no larger than 2^(l_i).
    """
    x = tuple(Fraction(c) for c in x)
    index = tuple(int(l) for l in index)
    if len(x) != len(index):
        raise ValueError("dimension mismatch")
    for xi, l in zip(x, index):
        if xi < 0 or xi > 1:
            return False
        den = xi.denominator
        if den & (den - 1):
            return False
        if den > 2 ** l:
            return False
    return True


def sparse_union_nodes(n: int, d: int) -> set:
    """The sparse grid at level n: union of grids with |l|_1 = n + d - 1."""
    _check_sparse_args(n, d)
    nodes = set()
    for index in compositions(n + d - 1, d):
        nodes |= grid_nodes(index)
    return nodes


def combination_terms(n: int, d: int) -> list:
    """Signed sub-grid decomposition of the sparse grid.

    Layer q holds every |l|_1 = n + (d-1) - q with weight (-1)^q C(d-1, q);
    layers whose total is below d are empty and contribute nothing.
    """
    _check_sparse_args(n, d)
    terms = []
    for q in range(d):
        coeff = (-1) ** q * binomial(d - 1, q)
        for index in compositions(n + (d - 1) - q, d):
            terms.append(SignedGridTerm(index, coeff))
    return terms


def signed_multiplicity(x, terms) -> int:
    """Net inclusion count of point ``x`` under the signed decomposition."""
    x = tuple(Fraction(c) for c in x)
    if any(c < 0 or c > 1 for c in x):
        raise ValueError("point must lie in the unit cube")
    total = 0
    for index, coeff in terms:
        if node_in_grid(x, index):
            total += coeff
    return total


def _check_sparse_args(n, d):
    if d < 2:
        raise ValueError("sparse grids are defined for d >= 2")
    if n < 1:
        raise ValueError("level must be >= 1")
