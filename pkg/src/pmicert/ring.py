"""Exact arithmetic in the quadratic extension Q[sqrt(r)].

Every value is a + b*sqrt(r) with a, b rational and r a fixed nonnegative
integer radicand.  Perfect-square radicands collapse to plain rationals at
construction time, so purely rational values always carry radicand 0 and can
be combined freely with values of any radicand.  Signs, comparisons and
equality are decided exactly.
"""

from __future__ import annotations

import math
from fractions import Fraction


class RadicandMismatch(ValueError):
    """Two values with different irrational radicands were combined."""


def _sqrt_if_square(r: int) -> int | None:
    s = math.isqrt(r)
    return s if s * s == r else None


class ExtRational:
    __slots__ = ("a", "b", "radicand")

    def __init__(self, a=0, b=0, radicand: int = 0):
        a = Fraction(a)
        b = Fraction(b)
        radicand = int(radicand)
        if radicand < 0:
            raise ValueError("radicand must be nonnegative")
        if b != 0:
            root = _sqrt_if_square(radicand)
            if root is not None:
                a += b * root
                b = Fraction(0)
        if b == 0:
            radicand = 0
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "radicand", radicand)

    def __setattr__(self, name, value):
        raise AttributeError("ExtRational is immutable")

    @classmethod
    def sqrt(cls, r: int) -> "ExtRational":
        """The value sqrt(r), exact."""
        return cls(0, 1, r)

    @classmethod
    def coerce(cls, value) -> "ExtRational":
        if isinstance(value, ExtRational):
            return value
        if isinstance(value, (int, Fraction)):
            return cls(value)
        if isinstance(value, str):
            return parse_ext_rational(value)
        raise TypeError(f"cannot interpret {value!r} as ExtRational")

    # -- predicates -------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def as_fraction(self) -> Fraction:
        if self.b != 0:
            raise ValueError(f"{self} is irrational")
        return self.a

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def sign(self) -> int:
        """Exact sign in {-1, 0, 1}."""
        a, b = self.a, self.b
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return 1 if b > 0 else -1
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        # mixed signs: compare a^2 against b^2 * r
        lhs = a * a
        rhs = b * b * self.radicand
        if a > 0:  # b < 0
            return 1 if lhs > rhs else (-1 if lhs < rhs else 0)
        return 1 if rhs > lhs else (-1 if rhs < lhs else 0)

    # -- arithmetic -------------------------------------------------------

    def _unify(self, other: "ExtRational") -> int:
        if self.radicand == 0:
            return other.radicand
        if other.radicand == 0 or other.radicand == self.radicand:
            return self.radicand
        raise RadicandMismatch(
            f"cannot mix sqrt({self.radicand}) with sqrt({other.radicand})"
        )

    def __add__(self, other):
        other = ExtRational.coerce(other)
        r = self._unify(other)
        return ExtRational(self.a + other.a, self.b + other.b, r)

    __radd__ = __add__

    def __neg__(self):
        return ExtRational(-self.a, -self.b, self.radicand)

    def __sub__(self, other):
        return self + (-ExtRational.coerce(other))

    def __rsub__(self, other):
        return ExtRational.coerce(other) + (-self)

    def __mul__(self, other):
        other = ExtRational.coerce(other)
        r = self._unify(other)
        return ExtRational(
            self.a * other.a + self.b * other.b * r,
            self.a * other.b + self.b * other.a,
            r,
        )

    __rmul__ = __mul__

    def inverse(self) -> "ExtRational":
        if self.is_zero():
            raise ZeroDivisionError("division by zero")
        # 1/(a + b sqrt r) = (a - b sqrt r)/(a^2 - b^2 r); the denominator is
        # nonzero because sqrt(r) is irrational whenever b != 0 survives
        # normalization.
        den = self.a * self.a - self.b * self.b * self.radicand
        return ExtRational(self.a / den, -self.b / den, self.radicand)

    def __truediv__(self, other):
        return self * ExtRational.coerce(other).inverse()

    def __rtruediv__(self, other):
        return ExtRational.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("exponent must be an integer")
        if k < 0:
            return self.inverse() ** (-k)
        out = ExtRational(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- comparisons ------------------------------------------------------

    def __eq__(self, other):
        try:
            other = ExtRational.coerce(other)
        except TypeError:
            return NotImplemented
        return (
            self.a == other.a
            and self.b == other.b
            and (self.b == 0 or self.radicand == other.radicand)
        )

    def __hash__(self):
        return hash((self.a, self.b, self.radicand))

    def __lt__(self, other):
        return (self - ExtRational.coerce(other)).sign() < 0

    def __le__(self, other):
        return (self - ExtRational.coerce(other)).sign() <= 0

    def __gt__(self, other):
        return (self - ExtRational.coerce(other)).sign() > 0

    def __ge__(self, other):
        return (self - ExtRational.coerce(other)).sign() >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.radicand)

    def __bool__(self):
        return not self.is_zero()

    # -- text form --------------------------------------------------------

    def __str__(self):
        a = f"{self.a.numerator}/{self.a.denominator}"
        if self.b == 0:
            return a
        if self.b > 0:
            b = f"{self.b.numerator}/{self.b.denominator}"
            return f"{a}+{b}*sqrt({self.radicand})"
        nb = -self.b
        b = f"{nb.numerator}/{nb.denominator}"
        return f"{a}-{b}*sqrt({self.radicand})"

    def __repr__(self):
        return f"ExtRational({self})"


def parse_ext_rational(text: str) -> ExtRational:
    """Parse 'p/q', 'p/q+r/s*sqrt(n)' or 'p/q-r/s*sqrt(n)' (whitespace ok)."""
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty coefficient string")
    if "sqrt" not in s:
        return ExtRational(Fraction(s))
    star = s.index("*sqrt(")
    if not s.endswith(")"):
        raise ValueError(f"malformed coefficient {text!r}")
    radicand = int(s[star + 6 : -1])
    head = s[:star]
    # split head into rational part and sqrt-coefficient at the last +/- that
    # is not a leading sign or an exponent sign inside a fraction
    split = -1
    for idx in range(1, len(head)):
        if head[idx] in "+-" and head[idx - 1] not in "+-/":
            split = idx
    if split == -1:
        return ExtRational(0, Fraction(head), radicand)
    return ExtRational(Fraction(head[:split]), Fraction(head[split:]), radicand)


ZERO = ExtRational(0)
ONE = ExtRational(1)
