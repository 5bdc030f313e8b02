"""Exact rational arithmetic with a total inverse and a signum operator.

The number system under the whole workbench. It is the field of rationals
made total: 0 has itself as multiplicative inverse, so division never
raises. The ordering is not primitive; it is carried by the signum
operator, and the comparison predicates and the probability test are
evaluated through signum identities rather than ad-hoc numeric checks.
All probabilities in terms, transition systems and schedulers are Rat
values; nothing in the package touches floating point except for display.
"""

from __future__ import annotations

import math


class Rat:
    """Rational number stored reduced with a positive denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: int, den: int = 1):
        if den == 0:
            raise ZeroDivisionError("rational with denominator 0")
        if den < 0:
            num, den = -num, -den
        g = math.gcd(num, den)
        if g > 1:
            num //= g
            den //= g
        self.num = num
        self.den = den

    @classmethod
    def from_str(cls, text: str) -> "Rat":
        """Parse 'p', '-p' or 'p/q' (whitespace tolerated around '/')."""
        s = text.strip()
        if "/" in s:
            p, q = s.split("/", 1)
            return cls(int(p.strip()), int(q.strip()))
        return cls(int(s))

    # -- field operations (inverse is total) --

    def add(self, other: "Rat") -> "Rat":
        return Rat(self.num * other.den + other.num * self.den,
                   self.den * other.den)

    def mul(self, other: "Rat") -> "Rat":
        return Rat(self.num * other.num, self.den * other.den)

    def neg(self) -> "Rat":
        return Rat(-self.num, self.den)

    def inv(self) -> "Rat":
        # zero-totalized: the inverse of 0 is 0
        if self.num == 0:
            return Rat(0)
        return Rat(self.den, self.num)

    def sign(self) -> "Rat":
        """Signum as a Rat in {-1, 0, 1}."""
        if self.num > 0:
            return ONE
        if self.num < 0:
            return Rat(-1)
        return ZERO

    # -- operator sugar; int operands are coerced --

    def _coerce(self, other):
        if isinstance(other, Rat):
            return other
        if isinstance(other, int):
            return Rat(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        return other if other is NotImplemented else self.add(other)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return other if other is NotImplemented else self.add(other.neg())

    def __rsub__(self, other):
        other = self._coerce(other)
        return other if other is NotImplemented else other.add(self.neg())

    def __mul__(self, other):
        other = self._coerce(other)
        return other if other is NotImplemented else self.mul(other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        # total division: x / 0 == 0
        other = self._coerce(other)
        return other if other is NotImplemented else self.mul(other.inv())

    def __rtruediv__(self, other):
        other = self._coerce(other)
        return other if other is NotImplemented else other.mul(self.inv())

    def __neg__(self):
        return self.neg()

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    # Comparisons go through the signum identities; see lt()/leq() below.

    def __lt__(self, other):
        other = self._coerce(other)
        return other if other is NotImplemented else self.lt(other)

    def __le__(self, other):
        other = self._coerce(other)
        return other if other is NotImplemented else self.leq(other)

    def __gt__(self, other):
        other = self._coerce(other)
        return other if other is NotImplemented else other.lt(self)

    def __ge__(self, other):
        other = self._coerce(other)
        return other if other is NotImplemented else other.leq(self)

    def lt(self, other: "Rat") -> bool:
        """x < y  iff  sign(y - x) = 1."""
        return (other - self).sign() == ONE

    def leq(self, other: "Rat") -> bool:
        """x <= y  iff  sign(sign(y - x) + 1) = 1."""
        return ((other - self).sign() + ONE).sign() == ONE

    def is_prob(self) -> bool:
        """Membership in [0, 1], tested by the signum identity
        sign(sign(x) + 1) * sign(sign(1 - x) + 1) = 1."""
        lhs = (self.sign() + ONE).sign() * ((ONE - self).sign() + ONE).sign()
        return lhs == ONE

    def __str__(self):
        if self.den == 1:
            return str(self.num)
        return f"{self.num}/{self.den}"

    def __repr__(self):
        return f"Rat({self.num}, {self.den})"

    def __float__(self):
        return self.num / self.den


ZERO = Rat(0)
ONE = Rat(1)


def rat(num: int, den: int = 1) -> Rat:
    return Rat(num, den)
