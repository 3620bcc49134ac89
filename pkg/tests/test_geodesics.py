import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import primitive_count, torus
from prymeigen.homology import chain_holonomy
from prymeigen.prym import Prototype, build_prototype_surface, lambda_value
from prymeigen.qfield import QuadNum, Vec2
from prymeigen.geodesics import (
    NotPeriodicWithinBudget,
    WrongEndpoints,
    check_convention,
    cylinder_decomposition,
    find_connection,
    is_admissible,
    is_invariant,
    reverse_connection,
    same_lattice,
    saddle_connections,
    three_tori_decomposition,
    twins,
)
from prymeigen.surface import delaunay_decomposition, path_chain


def random_lattice(rng):
    while True:
        u = (Fraction(rng.randint(-6, 6), rng.randint(1, 3)), Fraction(rng.randint(-6, 6), rng.randint(1, 3)))
        v = (Fraction(rng.randint(-6, 6), rng.randint(1, 3)), Fraction(rng.randint(-6, 6), rng.randint(1, 3)))
        cross = u[0] * v[1] - u[1] * v[0]
        if cross > Fraction(1, 2):
            return u, v


@pytest.mark.parametrize("seed", range(5))
def test_torus_counts_match_lattice_oracle(seed):
    rng = random.Random(seed)
    u, v = random_lattice(rng)
    L = rng.randint(2, 6)
    t = delaunay_decomposition(torus(u, v))
    assert len(saddle_connections(t, L)) == primitive_count(u, v, L * L)


def test_square_torus_small_counts():
    t = torus((1, 0), (0, 1))
    assert len(saddle_connections(t, 1)) == 4
    assert len(saddle_connections(delaunay_decomposition(t), 2, squared=True)) == 8


def test_connections_are_consistent(s111):
    s = s111.surface
    scs = saddle_connections(s, 3)
    keys = {sc.ident() for sc in scs}
    for sc in scs:
        assert chain_holonomy(s, path_chain(s, sc.path)) == sc.holonomy
        assert sc.length2 <= 9
        assert reverse_connection(s, sc).ident() in keys
        assert sc.start == s.labels[sc.start_key]


def test_prym_symmetry_of_spectrum(s111):
    s = s111.surface
    spectrum = sorted(sc.holonomy.key() for sc in saddle_connections(s, 3))
    negated = sorted((-sc.holonomy).key() for sc in saddle_connections(s, 3))
    assert spectrum == negated


def test_designated_slit(s111):
    s, tau = s111.surface, s111.tau
    sc = find_connection(s, s111.sigma0)
    assert sc.holonomy == Vec2(Fraction(-1, 2), 0, 9)
    assert check_convention(s, sc, tau) == "2,2"
    assert len(twins(s, sc, tau).twins) == 2
    adm = is_admissible(s, sc, tau)
    assert not adm and adm.ratio == 1


def test_wrong_endpoints(s111):
    s = s111.surface
    qp = next(sc for sc in saddle_connections(s, 2) if (sc.start, sc.end) == ("Q", "P"))
    with pytest.raises(WrongEndpoints):
        check_convention(s, qp)


def _dims(p, direction=(1, 0)):
    s = build_prototype_surface(p).surface
    cyl = cylinder_decomposition(s, direction)
    return s, sorted((c.width, c.height) for c in cyl)


def test_cylinders_of_prototypes():
    # the fixed cylinder has the w = lambda square; the other two are w x h
    for p in [Prototype(1, 1, 1), Prototype(1, 1, -1), Prototype(1, 2, 0), Prototype(2, 1, 0)]:
        s, dims = _dims(p)
        lam = lambda_value(p)
        want = sorted([(lam, lam), (QuadNum(p.w, 0, p.D), QuadNum(p.h, 0, p.D))] +
                      [(QuadNum(p.w, 0, p.D), QuadNum(p.h, 0, p.D))])
        assert dims == want
        assert sum((w * h for w, h in dims), QuadNum(0, 0, p.D)) == s.area


@settings(max_examples=15)
@given(st.integers(-3, 3), st.integers(1, 3))
def test_cylinder_areas_fill_surface(a, b):
    # D = 9 is a square so every rational direction is periodic
    s = build_prototype_surface(Prototype(1, 1, -1)).surface
    cyl = cylinder_decomposition(s, (a, b))
    total = sum((c.area for c in cyl), QuadNum(0, 0, 9))
    # width and height are both measured relative to |direction|, so their product is the true area
    assert total == s.area


def test_irrational_direction_not_periodic():
    t = torus((1, 0), (0, 1), D=8)
    d = Vec2(QuadNum(1, 0, 8), QuadNum(0, Fraction(1, 2), 8))
    with pytest.raises(NotPeriodicWithinBudget):
        cylinder_decomposition(t, d)


@pytest.mark.parametrize("p", [Prototype(1, 1, 1), Prototype(2, 1, 0), Prototype(1, 1, 0, "1,1,2"),
                               Prototype(1, 2, 1, "1,1,2")], ids=str)
def test_three_tori(p):
    ps = build_prototype_surface(p)
    dec = three_tori_decomposition(ps.surface, ps.tau)
    assert dec is not None
    lam = lambda_value(p)
    sq = (Vec2(lam, 0), Vec2(0, lam))
    rect = (Vec2(p.w, 0, p.D), Vec2(0, p.h, p.D))
    assert dec.fixed_torus_index == 0
    assert same_lattice(dec.tori[0], sq)
    assert same_lattice(dec.tori[1], rect) and same_lattice(dec.tori[2], rect)


def test_invariant_connections(s111):
    s, tau = s111.surface, s111.tau
    inv = [sc for sc in saddle_connections(s, 2) if is_invariant(tau, sc)]
    assert inv
    for sc in inv:
        assert sc.start != sc.end


def test_square_torus_length_two_and_a_half():
    t = delaunay_decomposition(torus((1, 0), (0, 1)))
    assert len(saddle_connections(t, Fraction(5, 2))) == primitive_count((1, 0), (0, 1), Fraction(25, 4)) == 16
