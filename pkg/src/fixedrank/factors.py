"""Tangent-vector containers.

Tangent and ambient vectors for every geometry in this package are tuples
of ndarrays (one entry per factor).  FactorTuple adds the vector-space
operations the solvers need: addition, subtraction, negation, and scalar
multiplication.  The geometric meaning of each slot is documented by the
geometry that produces it.
"""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np


class FactorTuple(tuple):
    """Tuple of float arrays with elementwise linear-space arithmetic."""

    # Keep numpy scalars from broadcasting over the tuple; with ufunc
    # handling declined, np.float64 * FactorTuple falls back to __rmul__.
    __array_ufunc__ = None

    def __new__(cls, arrays: Iterable[np.ndarray]) -> "FactorTuple":
        return super().__new__(cls, tuple(np.asarray(a, dtype=float) for a in arrays))

    def __add__(self, other):
        return FactorTuple(a + b for a, b in zip(self, other, strict=True))

    def __radd__(self, other):
        if other == 0:  # lets sum() work
            return self
        return self.__add__(other)

    def __sub__(self, other):
        return FactorTuple(a - b for a, b in zip(self, other, strict=True))

    def __neg__(self):
        return FactorTuple(-a for a in self)

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return FactorTuple(a * c for a in self)

    __rmul__ = __mul__

    def copy(self) -> "FactorTuple":
        return FactorTuple(a.copy() for a in self)

    @property
    def shapes(self) -> tuple[tuple[int, ...], ...]:
        return tuple(a.shape for a in self)

    def allfinite(self) -> bool:
        return all(np.isfinite(a).all() for a in self)


def euclidean_dot(a: FactorTuple, b: FactorTuple) -> float:
    """Sum of Frobenius inner products over the slots."""
    return float(sum(np.vdot(x, y) for x, y in zip(a, b, strict=True)))


def euclidean_norm(a: FactorTuple) -> float:
    return float(np.sqrt(max(euclidean_dot(a, a), 0.0)))


def zeros_like(a: FactorTuple) -> FactorTuple:
    return FactorTuple(np.zeros_like(x) for x in a)
