"""Second-order directional jets.

A ``Jet2`` carries a value together with the first and second derivative
along one fixed input direction.  Arithmetic follows the truncated Taylor
rules, so propagating jets through a computation yields exact directional
derivatives (no truncation beyond floating point).  Components may be
floats, numpy arrays, or tape variables; the rules only need ring
arithmetic, so all three work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedOperationError

_SQRT2_PI = 2.0 / math.sqrt(math.pi)


@dataclass
class Jet2:
    v: object
    d1: object
    d2: object

    def __add__(self, other):
        if isinstance(other, Jet2):
            return Jet2(self.v + other.v, self.d1 + other.d1, self.d2 + other.d2)
        return Jet2(self.v + other, self.d1, self.d2)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet2):
            return Jet2(self.v - other.v, self.d1 - other.d1, self.d2 - other.d2)
        return Jet2(self.v - other, self.d1, self.d2)

    def __rsub__(self, other):
        return Jet2(other - self.v, -self.d1, -self.d2)

    def __neg__(self):
        return Jet2(-self.v, -self.d1, -self.d2)

    def __mul__(self, other):
        if isinstance(other, Jet2):
            return Jet2(
                self.v * other.v,
                self.d1 * other.v + self.v * other.d1,
                self.d2 * other.v + 2.0 * (self.d1 * other.d1) + self.v * other.d2,
            )
        return Jet2(self.v * other, self.d1 * other, self.d2 * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet2):
            return self * other.reciprocal()
        inv = 1.0 / other
        return Jet2(self.v * inv, self.d1 * inv, self.d2 * inv)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if not isinstance(p, (int, float)):
            raise UnsupportedOperationError(f"jet power with exponent {p!r}")
        f = self.v**p
        fp = p * self.v ** (p - 1)
        fpp = p * (p - 1) * self.v ** (p - 2)
        return self.chain(f, fp, fpp)

    def reciprocal(self) -> "Jet2":
        inv = 1.0 / self.v
        return self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)

    def chain(self, f, fp, fpp) -> "Jet2":
        """Compose with a unary map given its value and two derivatives at ``v``."""
        return Jet2(f, fp * self.d1, fpp * (self.d1 * self.d1) + fp * self.d2)

    def exp(self) -> "Jet2":
        e = np.exp(self.v)
        return self.chain(e, e, e)

    def sqrt(self) -> "Jet2":
        r = np.sqrt(self.v)
        return self.chain(r, 0.5 / r, -0.25 / (r * self.v))

    def erf(self) -> "Jet2":
        f = np.vectorize(math.erf)(self.v) if np.ndim(self.v) else math.erf(self.v)
        g = _SQRT2_PI * np.exp(-self.v * self.v)
        return self.chain(f, g, -2.0 * self.v * g)


def constant(c) -> Jet2:
    return Jet2(c, 0.0 * c, 0.0 * c)


def seed(value, d1=1.0) -> Jet2:
    """Jet for an input coordinate moving with rate ``d1`` along the direction."""
    return Jet2(value, d1, 0.0 * d1)
