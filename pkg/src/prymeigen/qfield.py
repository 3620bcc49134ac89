"""Exact arithmetic in Q(sqrt(D)), planar vectors and geometric predicates.

Every decision taken elsewhere in the package (orientation, in-circle,
length comparisons) goes through :func:`qn_sign`, which never touches
floating point.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import isqrt
from typing import Union

from gmpy2 import mpq

Rational = Union[int, Fraction]
_RATIONAL_TYPES = (int, Fraction, type(mpq(0)))
_ZERO = mpq(0)


class FieldMismatch(ValueError):
    """Two values with different non-square discriminants were combined."""


@lru_cache(maxsize=None)
def _is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n


def _make(a, b, D: int) -> "QuadNum":
    # internal constructor for already-normalised mpq parts
    x = object.__new__(QuadNum)
    object.__setattr__(x, "a", a)
    object.__setattr__(x, "b", b)
    object.__setattr__(x, "D", D)
    return x


class QuadNum:
    """The number a + b*sqrt(D) with rational a, b.

    For a perfect square D the irrational part is folded into ``a`` at
    construction, so ``b`` is always zero there.
    """

    __slots__ = ("a", "b", "D")

    def __init__(self, a: Rational = 0, b: Rational = 0, D: int = 1):
        if D < 0:
            raise ValueError("discriminant must be non-negative")
        a = mpq(a) if not isinstance(a, Fraction) else mpq(a.numerator, a.denominator)
        b = mpq(b) if not isinstance(b, Fraction) else mpq(b.numerator, b.denominator)
        if b and _is_square(D):
            a += b * isqrt(D)
            b = _ZERO
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "D", int(D))

    def __setattr__(self, name, value):
        raise AttributeError("QuadNum is immutable")

    # -- coercion -----------------------------------------------------
    def _coerce(self, other) -> "QuadNum":
        if isinstance(other, QuadNum):
            return other
        if isinstance(other, _RATIONAL_TYPES):
            return QuadNum(other, 0, self.D)
        return NotImplemented

    def _join(self, other: "QuadNum") -> int:
        if self.D == other.D:
            return self.D
        if not other.b:
            return self.D
        if not self.b:
            return other.D
        raise FieldMismatch(f"cannot combine sqrt({self.D}) and sqrt({other.D})")

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _make(self.a + other.a, self.b + other.b, self._join(other))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _make(self.a - other.a, self.b - other.b, self._join(other))

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __neg__(self):
        return _make(-self.a, -self.b, self.D)

    def __pos__(self):
        return self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        D = self._join(other)
        if not self.b and not other.b:
            return _make(self.a * other.a, _ZERO, D)
        a = self.a * other.a + self.b * other.b * D
        b = self.a * other.b + self.b * other.a
        return _make(a, b, D)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        """Field norm a^2 - D b^2."""
        n = self.a * self.a - self.D * self.b * self.b
        return Fraction(int(n.numerator), int(n.denominator))

    def inverse(self) -> "QuadNum":
        n = self.a * self.a - self.D * self.b * self.b
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt(D))")
        return _make(self.a / n, -self.b / n, self.D)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = QuadNum(1, 0, self.D)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- comparison ---------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, _RATIONAL_TYPES):
            return not self.b and self.a == other
        if not isinstance(other, QuadNum):
            return NotImplemented
        if self.a != other.a or self.b != other.b:
            return False
        return not self.b or self.D == other.D

    def __hash__(self):
        if not self.b:
            return hash(self.a)
        return hash((self.a, self.b, self.D))

    def sign(self) -> int:
        return qn_sign(self)

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- misc ---------------------------------------------------------
    def is_rational(self) -> bool:
        return not self.b

    def conjugate(self) -> "QuadNum":
        return qn_conjugate(self)

    def key(self) -> tuple:
        """Integer tuple used for canonical serialisations."""
        return (int(self.a.numerator), int(self.a.denominator), int(self.b.numerator), int(self.b.denominator))

    def to_json(self) -> dict:
        return {
            "a": [int(self.a.numerator), int(self.a.denominator)],
            "b": [int(self.b.numerator), int(self.b.denominator)],
            "D": self.D,
        }

    @classmethod
    def from_json(cls, data: dict) -> "QuadNum":
        a = Fraction(data["a"][0], data["a"][1])
        b = Fraction(data["b"][0], data["b"][1])
        return cls(a, b, data["D"])

    def __float__(self):
        lo, hi = qn_approx(self, 60)
        return float((lo + hi) / 2)

    def __repr__(self):
        if not self.b:
            return f"QuadNum({self.a})"
        return f"QuadNum({self.a} + {self.b}*sqrt({self.D}))"

    def __str__(self):
        if not self.b:
            return str(self.a)
        sgn = "+" if self.b > 0 else "-"
        return f"{self.a} {sgn} {abs(self.b)}*sqrt({self.D})"


def sqrt_d(D: int) -> QuadNum:
    """The element sqrt(D) itself."""
    return QuadNum(0, 1, D)


def qn_sign(x: QuadNum) -> int:
    """Exact sign of a + b sqrt(D) by comparing a^2 with D b^2."""
    a, b = x.a, x.b
    sa = (a > 0) - (a < 0)
    sb = (b > 0) - (b < 0)
    if sb == 0:
        return sa
    if sa == 0:
        return sb
    if sa == sb:
        return sa
    lhs = a * a
    rhs = x.D * b * b
    if lhs == rhs:
        return 0
    return sa if lhs > rhs else sb


def qn_conjugate(x: QuadNum) -> QuadNum:
    return _make(x.a, -x.b, x.D)


def qn_approx(x: QuadNum, bits: int) -> tuple[Fraction, Fraction]:
    """A dyadic interval of width at most 2**-bits containing ``x``."""
    if bits < 1:
        raise ValueError("bits must be positive")
    scale = 1 << (bits + 2)
    a = Fraction(int(x.a.numerator), int(x.a.denominator))
    b = Fraction(int(x.b.numerator), int(x.b.denominator))
    if not b:
        lo_r = hi_r = a
    else:
        # sqrt(D) in [s / 2^k, (s + 1) / 2^k]; the error is scaled by |b|
        k = bits + 4 + max(0, abs(b).numerator.bit_length() - abs(b).denominator.bit_length() + 1)
        s = isqrt(x.D << (2 * k))
        r_lo = Fraction(s, 1 << k)
        r_hi = Fraction(s + 1, 1 << k)
        if b > 0:
            lo_r, hi_r = a + b * r_lo, a + b * r_hi
        else:
            lo_r, hi_r = a + b * r_hi, a + b * r_lo
    lo_n = (lo_r * scale).__floor__()
    hi_n = (hi_r * scale).__ceil__()
    return Fraction(lo_n, scale), Fraction(hi_n, scale)


def as_quad(value, D: int) -> QuadNum:
    if isinstance(value, QuadNum):
        return value
    return QuadNum(value, 0, D)


def _vec(x: QuadNum, y: QuadNum) -> "Vec2":
    v = object.__new__(Vec2)
    object.__setattr__(v, "x", x)
    object.__setattr__(v, "y", y)
    return v


class Vec2:
    """A planar vector with coordinates in a fixed Q(sqrt(D))."""

    __slots__ = ("x", "y")

    def __init__(self, x, y, D: int | None = None):
        if D is None:
            D = x.D if isinstance(x, QuadNum) else (y.D if isinstance(y, QuadNum) else 1)
        object.__setattr__(self, "x", as_quad(x, D))
        object.__setattr__(self, "y", as_quad(y, D))

    def __setattr__(self, name, value):
        raise AttributeError("Vec2 is immutable")

    @property
    def D(self) -> int:
        return self.x.D if self.x.b else self.y.D

    def __add__(self, other: "Vec2") -> "Vec2":
        return _vec(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return _vec(self.x - other.x, self.y - other.y)

    def __neg__(self) -> "Vec2":
        return _vec(-self.x, -self.y)

    def __mul__(self, c) -> "Vec2":
        return _vec(self.x * c, self.y * c)

    __rmul__ = __mul__

    def __truediv__(self, c) -> "Vec2":
        return _vec(self.x / c, self.y / c)

    def __eq__(self, other):
        if not isinstance(other, Vec2):
            return NotImplemented
        return self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash((self.x, self.y))

    def __bool__(self):
        return bool(self.x) or bool(self.y)

    def is_zero(self) -> bool:
        return not self

    def cross(self, other: "Vec2") -> QuadNum:
        return self.x * other.y - self.y * other.x

    def dot(self, other: "Vec2") -> QuadNum:
        return self.x * other.x + self.y * other.y

    def norm2(self) -> QuadNum:
        return self.dot(self)

    def key(self) -> tuple:
        return self.x.key() + self.y.key()

    def transform(self, m) -> "Vec2":
        """Apply a 2x2 matrix given as ((a, b), (c, d))."""
        (a, b), (c, d) = m
        return Vec2(self.x * a + self.y * b, self.x * c + self.y * d)

    def to_json(self) -> list:
        return [self.x.to_json(), self.y.to_json()]

    @classmethod
    def from_json(cls, data) -> "Vec2":
        return cls(QuadNum.from_json(data[0]), QuadNum.from_json(data[1]))

    def approx(self, bits: int = 53) -> tuple[float, float]:
        return float(sum(qn_approx(self.x, bits)) / 2), float(sum(qn_approx(self.y, bits)) / 2)

    def __repr__(self):
        return f"Vec2({self.x}, {self.y})"


def orient(u: Vec2, v: Vec2) -> int:
    """Sign of the cross product u x v (+1 when v is counterclockwise of u)."""
    return qn_sign(u.cross(v))


def orient3(a: Vec2, b: Vec2, c: Vec2) -> int:
    return orient(b - a, c - a)


def incircle(b: Vec2, c: Vec2, d: Vec2) -> int:
    """In-circle sign for the points 0, b, c, d.

    For a counterclockwise triangle (0, b, c) the result is +1 when d lies
    strictly inside its circumcircle, 0 on it and -1 outside.
    """
    nb, nc, nd = b.norm2(), c.norm2(), d.norm2()
    det = (
        b.x * (c.y * nd - nc * d.y)
        - b.y * (c.x * nd - nc * d.x)
        + nb * (c.x * d.y - c.y * d.x)
    )
    return -qn_sign(det)


def half_plane(v: Vec2) -> int:
    """0 for directions with angle in [0, pi), 1 for [pi, 2pi)."""
    sy = qn_sign(v.y)
    if sy > 0 or (sy == 0 and qn_sign(v.x) > 0):
        return 0
    return 1


def angle_less(u: Vec2, v: Vec2) -> bool:
    """Strict comparison of arguments in [0, 2pi) without trigonometry."""
    hu, hv = half_plane(u), half_plane(v)
    if hu != hv:
        return hu < hv
    return orient(u, v) > 0


def ccw_turns(u: Vec2, w: Vec2) -> int:
    """1 if the counterclockwise sweep from u to w passes the positive x-axis.

    The sweep is the open-closed arc (arg u, arg u + theta] with theta in
    (0, 2pi); summing this over the corners of a cone point gives the
    number of full turns, i.e. the cone angle divided by 2pi.
    """
    return 1 if angle_less(w, u) else 0


def segments_intersect(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool:
    """Closed segment intersection test."""
    d1 = orient3(q1, q2, p1)
    d2 = orient3(q1, q2, p2)
    d3 = orient3(p1, p2, q1)
    d4 = orient3(p1, p2, q2)
    if d1 * d2 < 0 and d3 * d4 < 0:
        return True

    def on_seg(a, b, c):
        return (
            min(a.x, b.x) <= c.x <= max(a.x, b.x) and min(a.y, b.y) <= c.y <= max(a.y, b.y)
        )

    if d1 == 0 and on_seg(q1, q2, p1):
        return True
    if d2 == 0 and on_seg(q1, q2, p2):
        return True
    if d3 == 0 and on_seg(p1, p2, q1):
        return True
    if d4 == 0 and on_seg(p1, p2, q2):
        return True
    return False
