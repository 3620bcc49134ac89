from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from prymeigen.deform import (
    CollisionDuringMove,
    DeformError,
    NotAdmissible,
    VectorTooLarge,
    break_up_transport,
    break_up_zero,
    collapse_transport,
    displacement_plan,
    h4_origami,
    rel_transport,
)
from prymeigen.geodesics import find_connection, is_admissible, is_invariant, saddle_connections
from prymeigen.homology import anti_invariant_lattice, chain_holonomy, induced_action, trace
from prymeigen.prym import (
    Prototype,
    build_prototype_surface,
    find_prym_involutions,
    rm_generator,
    verify_real_multiplication,
)
from prymeigen.qfield import Vec2
from prymeigen.surface import canonical_code, stratum

small = st.fractions(min_value=Fraction(-1, 8), max_value=Fraction(1, 8), max_denominator=40)


def hols(s, start, end, L=2):
    return {sc.holonomy for sc in saddle_connections(s, L) if (sc.start, sc.end) == (start, end)}


def test_plan_conventions():
    s22 = build_prototype_surface(Prototype(1, 1, 1)).surface
    s112 = build_prototype_surface(Prototype(1, 1, 1, "1,1,2")).surface
    v = Vec2(Fraction(1, 10), Fraction(1, 20), 9)
    m = displacement_plan(s22, v)
    assert m.change("P", "Q") == v and m.change("Q", "P") == -v
    m = displacement_plan(s112, v)
    assert m.change("R1", "Q") == v and m.change("R1", "R2") == v * 2 and m.change("Q", "R2") == v


@pytest.mark.parametrize("kappa,start,end", [("2,2", "P", "Q"), ("1,1,2", "R1", "Q")])
def test_rel_shifts_relative_periods(kappa, start, end):
    ps = build_prototype_surface(Prototype(1, 1, 1, kappa))
    s = ps.surface
    v = Vec2(0, Fraction(1, 10), 9)
    before = hols(s, start, end)
    out = rel_transport(s, v, ps.tau, ps.prym_chains)
    after = hols(out.surface, start, end)
    slit = find_connection(s, ps.sigma0).holonomy
    assert slit in before and slit + v in after
    for c, c2 in zip(ps.prym_chains, out.chains):
        assert chain_holonomy(s, c) == chain_holonomy(out.surface, c2)
    assert out.tau.is_involution()
    assert trace(induced_action(out.surface, out.tau)) == -2


@settings(max_examples=10)
@given(small, small)
def test_rel_round_trip(x, y):
    ps = build_prototype_surface(Prototype(1, 1, 1))
    v = Vec2(x, y, 9)
    there = rel_transport(ps.surface, v, ps.tau)
    back = rel_transport(there.surface, -v, there.tau)
    assert canonical_code(back.surface) == canonical_code(ps.surface)


def test_rel_keeps_real_multiplication():
    p = Prototype(1, 1, 0)
    ps = build_prototype_surface(p)
    out = rel_transport(ps.surface, (Fraction(1, 7), Fraction(-1, 9)), ps.tau, ps.prym_chains)
    lat = anti_invariant_lattice(out.surface, out.tau, preferred=out.chains)
    assert verify_real_multiplication(out.surface, out.tau, rm_generator(p), lattice=lat, D=8).passed


def test_collision():
    ps = build_prototype_surface(Prototype(1, 1, 1), Fraction(1, 2))
    with pytest.raises(CollisionDuringMove):
        rel_transport(ps.surface, (1, 0), ps.tau)


def test_collapse_refuses_inadmissible():
    ps = build_prototype_surface(Prototype(1, 1, 1), Fraction(1, 2))
    sc = find_connection(ps.surface, ps.sigma0)
    with pytest.raises(NotAdmissible) as err:
        collapse_transport(ps.surface, ps.tau, sc)
    assert err.value.certificate is not None


def test_d8_collapse_to_h4():
    p = Prototype(1, 1, 0)
    ps = build_prototype_surface(p)
    s, tau = ps.surface, ps.tau
    cands = [sc for sc in saddle_connections(s, 3)
             if (sc.start, sc.end) == ("P", "Q") and is_invariant(tau, sc) and is_admissible(s, sc, tau)]
    assert cands
    out = collapse_transport(s, tau, cands[0], ps.prym_chains)
    assert stratum(out.surface, with_tag=False).orders == (4,)
    lat = anti_invariant_lattice(out.surface, out.tau, preferred=out.chains)
    assert verify_real_multiplication(out.surface, out.tau, rm_generator(p), lattice=lat, D=8).passed
    assert len(find_prym_involutions(out.surface)) == 1


def test_break_up_limits():
    s4 = h4_origami()
    with pytest.raises(VectorTooLarge):
        break_up_zero(s4, (Fraction(1, 2), 0))
    with pytest.raises(VectorTooLarge):
        break_up_zero(s4, (0, 0))
    with pytest.raises(DeformError):
        break_up_zero(build_prototype_surface(Prototype(1, 1, 1)).surface, (Fraction(1, 10), 0))


@pytest.mark.parametrize("split,names", [("2,2", ("P", "Q")), ("1,1,2", ("R1", "Q"))])
def test_break_up_creates_connection(split, names):
    s4 = h4_origami()
    v = Vec2(Fraction(1, 12), Fraction(1, 30), 1)
    out = break_up_transport(s4, v, split)
    orders = (2, 2) if split == "2,2" else (1, 1, 2)
    assert tuple(sorted(stratum(out.surface, with_tag=False).orders)) == tuple(sorted(orders))
    assert v in hols(out.surface, *names, L=1)
    assert out.surface.area == s4.area
