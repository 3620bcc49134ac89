import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import torus
from prymeigen.deform import h4_origami, origami
from prymeigen.prym import Prototype, build_prototype_surface
from prymeigen.qfield import Vec2
from prymeigen.surface import (
    MismatchedEdge,
    TranslationSurface,
    apply_gl2,
    automorphisms_of,
    build_surface,
    canonical_code,
    delaunay,
    delaunay_decomposition,
    is_delaunay,
    is_isomorphic,
    relabel,
    stratum,
    triangulate,
)

PROTOS = [Prototype(1, 1, 1), Prototype(1, 1, -1), Prototype(2, 1, 0), Prototype(1, 1, 0, "1,1,2"),
          Prototype(1, 2, 1, "1,1,2")]


def test_torus_basics():
    t = torus((1, 0), (0, 1))
    assert t.genus == 1
    assert t.area == 1
    assert str(stratum(t, with_tag=False)) == "H(0)"


def test_mismatched_edges_rejected():
    with pytest.raises(MismatchedEdge):
        build_surface([[Vec2(1, 0), Vec2(0, 1), Vec2(-1, 0), Vec2(0, -1)]],
                      [((0, 0), (0, 1)), ((0, 2), (0, 3))])


@pytest.mark.parametrize("p", PROTOS, ids=str)
def test_prototype_strata(p):
    s = build_prototype_surface(p).surface
    assert s.genus == 3
    want = (2, 2) if p.kappa == "2,2" else (1, 1, 2)
    assert tuple(sorted(stratum(s).orders)) == tuple(sorted(want))


def test_origami_stratum():
    s = h4_origami()
    assert stratum(s).orders == (4,)
    assert s.area == 5


@pytest.mark.parametrize("p", PROTOS, ids=str)
def test_json_roundtrip(p):
    s = build_prototype_surface(p).surface
    t = TranslationSurface.from_json(s.to_json())
    assert t.to_json() == s.to_json()


@given(st.integers(0, 10 ** 6))
def test_canonical_code_ignores_presentation(seed):
    s = build_prototype_surface(Prototype(1, 1, 1)).surface
    r = relabel(s, random.Random(seed))
    assert canonical_code(r) == canonical_code(s)
    assert is_isomorphic(r, s) is not None


@pytest.mark.parametrize("p", PROTOS, ids=str)
def test_delaunay_properties(p):
    s = build_prototype_surface(p).surface
    tri = triangulate(s)
    assert tri.is_triangulated()
    assert tri.area == s.area
    d = delaunay(s)
    assert is_delaunay(d)
    assert canonical_code(d) == canonical_code(s)
    dd = delaunay_decomposition(s)
    assert dd.is_convex()


def test_distinct_prototypes_not_isomorphic():
    a = build_prototype_surface(Prototype(1, 1, 1)).surface
    b = build_prototype_surface(Prototype(1, 1, -1)).surface
    assert is_isomorphic(a, b) is None


@given(st.integers(1, 4), st.integers(-3, 3), st.integers(1, 4))
def test_gl2_scales_area(a, b, d):
    s = build_prototype_surface(Prototype(1, 1, 1)).surface
    t = apply_gl2(s, ((a, b), (0, d)))
    assert t.area == s.area * (a * d)
    if (a, b, d) == (1, 0, 1):
        assert canonical_code(t) == canonical_code(s)


def test_gl2_rejects_orientation_reversal():
    s = torus((1, 0), (0, 1))
    with pytest.raises(ValueError):
        apply_gl2(s, ((1, 0), (0, -1)))


def test_torus_automorphisms():
    # a generic torus with a marked point has only the identity and -1
    t = torus((1, 0), (Fraction(1, 3), Fraction(5, 4)))
    assert len(automorphisms_of(delaunay_decomposition(t), 1)) == 1
    assert len(automorphisms_of(delaunay_decomposition(t), -1)) == 1


def _centralizer_size(r, u, invert):
    # oracle: permutations conjugating (r, u) to (r, u) or to their inverses
    n = len(r)
    inv = lambda p: [p.index(i) for i in range(n)]
    tr, tu = (inv(r), inv(u)) if invert else (r, u)
    count = 0
    for sig in itertools.permutations(range(n)):
        if all(sig[r[i]] == tr[sig[i]] and sig[u[i]] == tu[sig[i]] for i in range(n)):
            count += 1
    return count


@pytest.mark.parametrize("r,u", [
    ([1, 2, 3, 4, 0], [0, 2, 4, 1, 3]),
    ([1, 0, 3, 2], [2, 3, 0, 1]),
    ([1, 2, 0], [0, 1, 2]),
    ([1, 2, 3, 0], [0, 3, 2, 1]),
])
def test_origami_automorphisms_match_permutation_oracle(r, u):
    d = delaunay_decomposition(origami(r, u))
    assert len(automorphisms_of(d, 1)) == _centralizer_size(r, u, False)
    assert len(automorphisms_of(d, -1)) == _centralizer_size(r, u, True)


def test_square_torus_examples():
    t = torus((1, 0), (0, 1))
    assert len(triangulate(t).polygons) == 2
    assert is_delaunay(delaunay(t))
    assert is_isomorphic(apply_gl2(t, ((0, -1), (1, 0))), t) is not None
    assert canonical_code(t) != canonical_code(torus((2, 0), (0, 1)))
    # the elliptic involutions other than -1 move the marked point, so only one map preserves the cells
    assert len(automorphisms_of(delaunay_decomposition(t), -1)) == 1
