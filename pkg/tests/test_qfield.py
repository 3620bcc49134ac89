from decimal import Decimal, getcontext
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from prymeigen.qfield import (
    FieldMismatch,
    QuadNum,
    Vec2,
    incircle,
    orient,
    qn_approx,
    qn_sign,
)

getcontext().prec = 80

rats = st.fractions(min_value=-50, max_value=50, max_denominator=30)
discs = st.sampled_from([2, 5, 8, 12, 17, 33, 41])


@st.composite
def quads(draw, D=None):
    D = draw(discs) if D is None else D
    return QuadNum(draw(rats), draw(rats), D)


@st.composite
def quad_pairs(draw):
    D = draw(discs)
    return draw(quads(D)), draw(quads(D)), draw(quads(D))


def decimal_value(x: QuadNum) -> Decimal:
    # independent oracle: high precision decimal evaluation
    a = Fraction(int(x.a.numerator), int(x.a.denominator))
    b = Fraction(int(x.b.numerator), int(x.b.denominator))
    return Decimal(a.numerator) / a.denominator + Decimal(b.numerator) / b.denominator * Decimal(x.D).sqrt()


@given(quad_pairs())
def test_ring_axioms(t):
    x, y, z = t
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x
    assert x - x == 0


@given(quads())
def test_inverse(x):
    if x == 0:
        with pytest.raises(ZeroDivisionError):
            x.inverse()
    else:
        assert x * x.inverse() == 1
        assert (x / x) == 1


@given(quads())
def test_sign_matches_decimal_oracle(x):
    d = decimal_value(x)
    expected = (d > 0) - (d < 0)
    assert qn_sign(x) == expected


@given(quads(), st.integers(min_value=4, max_value=80))
def test_approx_brackets_value(x, bits):
    lo, hi = qn_approx(x, bits)
    d = decimal_value(x)
    assert Decimal(lo.numerator) / lo.denominator <= d <= Decimal(hi.numerator) / hi.denominator
    assert hi - lo <= Fraction(1, 2 ** bits) * 2


def test_sign_near_cancellation():
    # 99 - 70 sqrt(2) is tiny but positive
    assert qn_sign(QuadNum(99, -70, 2)) == 1
    assert qn_sign(QuadNum(-99, 70, 2)) == -1
    assert QuadNum(577, -408, 2) > 0


def test_square_discriminant_folds():
    x = QuadNum(1, 2, 9)
    assert x.b == 0 and x == 7
    assert x.is_rational()


def test_field_mismatch():
    with pytest.raises(FieldMismatch):
        QuadNum(0, 1, 2) + QuadNum(0, 1, 3)


@given(quads())
def test_json_roundtrip(x):
    assert QuadNum.from_json(x.to_json()) == x


@given(quads(8), quads(8), quads(8), quads(8))
def test_orient_antisymmetric(a, b, c, d):
    u, v = Vec2(a, b), Vec2(c, d)
    assert orient(u, v) == -orient(v, u)
    assert orient(u, u) == 0


def test_incircle_unit_square():
    # corner (1,1) lies on the circle through 0, (1,0), (0,1)
    b, c = Vec2(1, 0, 2), Vec2(0, 1, 2)
    assert incircle(b, c, Vec2(1, 1, 2)) == 0
    assert incircle(b, c, Vec2(Fraction(1, 2), Fraction(1, 2), 2)) == 1
    assert incircle(b, c, Vec2(2, 2, 2)) == -1
