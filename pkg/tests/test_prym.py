import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from prymeigen.homology import identity, mat_add, mat_mul, mat_scale
from prymeigen.prym import (
    EmptyLocus,
    Prototype,
    SlitOutOfRange,
    WrongDiscriminant,
    build_prototype_surface,
    canonical_generator,
    check_prototype,
    classify_components,
    component_invariant,
    enumerate_prototypes,
    expected_class_count,
    find_prym_involutions,
    form_parity,
    lambda_value,
    matches_constructor,
    rm_generator,
    verify_real_multiplication,
    RmGenerator,
)



def brute_prototypes(D):
    # oracle: scan the box directly
    out = set()
    for w in range(1, D + 1):
        for h in range(1, D + 1):
            for e in range(-D, D + 1):
                if e * e + 8 * w * h == D and math.gcd(math.gcd(w, h), e) == 1:
                    out.add((w, h, e))
    return out


@pytest.mark.parametrize("D", [8, 9, 12, 13, 16, 17, 20, 24, 25, 33, 40, 41])
def test_enumeration_matches_brute_force(D):
    assert {p.triple for p in enumerate_prototypes(D)} == brute_prototypes(D)


def test_known_small_lists():
    assert [p.triple for p in enumerate_prototypes(8)] == [(1, 1, 0)]
    assert [p.triple for p in enumerate_prototypes(9)] == [(1, 1, -1), (1, 1, 1)]
    assert enumerate_prototypes(13) == []


def test_prototype_validation():
    with pytest.raises(ValueError):
        Prototype(2, 2, 0)
    with pytest.raises(ValueError):
        Prototype(0, 1, 1)
    with pytest.raises(ValueError):
        Prototype(1, 1, 1, "2,1")


def test_lambda_is_root():
    for p in enumerate_prototypes(41):
        lam = lambda_value(p)
        assert lam * lam == lam * p.e + 2 * p.w * p.h
        assert lam > 0


@given(st.integers(8, 150))
def test_rm_minimal_polynomial(D):
    for p in enumerate_prototypes(D):
        T = rm_generator(p)
        M = T.rows()
        assert T.D == D
        assert mat_mul(M, M) == mat_add(mat_scale(M, p.e), mat_scale(identity(4), 2 * p.w * p.h))
        Tc = canonical_generator(T)
        assert Tc.e in (0, 1) and Tc.D == D


@pytest.mark.parametrize("p", [Prototype(1, 1, 1), Prototype(1, 2, -1), Prototype(2, 3, 3, "1,1,2"),
                               Prototype(1, 1, 0, "1,1,2")], ids=str)
def test_check_prototype(p):
    assert check_prototype(p).passed


def test_wrong_generator_rejected():
    ps = build_prototype_surface(Prototype(1, 1, 1))
    bad = RmGenerator(((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)), 2, -1)
    with pytest.raises(WrongDiscriminant):
        verify_real_multiplication(ps.surface, ps.tau, bad, D=9)


def test_slit_bounds():
    p = Prototype(1, 1, 1)
    with pytest.raises(SlitOutOfRange):
        build_prototype_surface(p, Fraction(1))
    with pytest.raises(SlitOutOfRange):
        build_prototype_surface(Prototype(1, 1, -1, "1,1,2"), Fraction(3, 4))
    assert build_prototype_surface(p, Fraction(9, 10)).slit == Fraction(9, 10)


def test_form_parity_small():
    assert form_parity(identity(4)) == 1
    assert form_parity([[0] * 4 for _ in range(4)]) == 0
    # only the second pair (form 2J) in the range: even
    assert form_parity([[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]) == 0


def test_parity_is_none_for_even_discriminants():
    for p in enumerate_prototypes(24):
        assert component_invariant(p).parity is None


@given(st.integers(8, 120))
def test_class_count_law(D):
    try:
        c = classify_components(D)
    except EmptyLocus:
        assert expected_class_count(D) == 0
        return
    assert c.ok
    assert c.to_json()["status"] == "ok"


def test_constructor_involution_is_found():
    ps = build_prototype_surface(Prototype(1, 1, 1))
    invs = find_prym_involutions(ps.surface)
    assert len(invs) == 1
    assert matches_constructor(ps, invs[0])
