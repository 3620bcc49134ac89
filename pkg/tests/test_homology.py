import itertools
import math

import pytest
from hypothesis import given, strategies as st

from conftest import torus
from prymeigen.deform import h4_origami
from prymeigen.homology import (
    PRYM_GRAM,
    anti_invariant_lattice,
    chain_holonomy,
    det,
    h1_basis,
    identity,
    induced_action,
    integer_kernel,
    is_symplectic,
    mat_mul,
    skew_normal_form,
    smith_diagonal,
    trace,
    transport_matrix,
    transpose,
)
from prymeigen.prym import Prototype, build_prototype_surface
from prymeigen.surface import delaunay_with_chains

PROTOS = [Prototype(1, 1, 1), Prototype(1, 1, -1), Prototype(3, 1, 1), Prototype(1, 1, 0, "1,1,2"),
          Prototype(2, 1, 1, "1,1,2")]

small_mats = st.lists(st.lists(st.integers(-6, 6), min_size=3, max_size=3), min_size=3, max_size=3)


def determinantal_divisors(A):
    # oracle: d_k = gcd of all k x k minors, invariant factors d_k / d_{k-1}
    n = len(A)
    out, prev = [], 1
    for k in range(1, n + 1):
        g = 0
        for rows in itertools.combinations(range(n), k):
            for cols in itertools.combinations(range(n), k):
                g = math.gcd(g, det([[A[i][j] for j in cols] for i in rows]))
        if g == 0:
            break
        out.append(g // prev)
        prev = g
    return out


@given(small_mats)
def test_smith_matches_minors_oracle(A):
    got = [d for d in smith_diagonal(A) if d]
    assert got == determinantal_divisors(A)


@given(small_mats)
def test_integer_kernel(A):
    K = integer_kernel(A)
    if K and K[0]:
        assert all(x == 0 for row in mat_mul(A, K) for x in row)
        assert smith_diagonal(K)[: len(K[0])] == [1] * len(K[0])


def test_torus_h1():
    H = h1_basis(torus((1, 0), (0, 1)))
    assert H.dim == 2
    assert abs(H.gram[0][1]) == 1 and H.gram[0][1] == -H.gram[1][0]


@pytest.mark.parametrize("p", PROTOS, ids=str)
def test_h1_is_unimodular_symplectic(p):
    s = build_prototype_surface(p).surface
    H = h1_basis(s)
    assert H.dim == 6
    assert transpose(H.gram) == [[-x for x in r] for r in H.gram]
    assert det(H.gram) == 1


def test_origami_h1():
    H = h1_basis(h4_origami())
    assert H.dim == 6 and det(H.gram) == 1


@pytest.mark.parametrize("p", PROTOS, ids=str)
def test_constructor_cycles_intersections(p):
    ps = build_prototype_surface(p)
    H = h1_basis(ps.surface)
    a0, b0, a1, b1, a2, b2 = ps.cycles
    assert H.intersection(a0, b0) == 1
    assert H.intersection(a1, b1) == 1 and H.intersection(a2, b2) == 1
    assert H.intersection(a0, a1) == 0 and H.intersection(b0, b2) == 0


@pytest.mark.parametrize("p", PROTOS, ids=str)
def test_prym_action(p):
    ps = build_prototype_surface(p)
    A = induced_action(ps.surface, ps.tau)
    H = h1_basis(ps.surface)
    assert mat_mul(A, A) == identity(6)
    assert is_symplectic(A, H.gram)
    assert trace(A) == -2
    lat = anti_invariant_lattice(ps.surface, ps.tau)
    assert [tuple(r) for r in lat.gram] == [tuple(r) for r in PRYM_GRAM]
    assert len(lat.basis) == 4


@pytest.mark.parametrize("p", PROTOS, ids=str)
def test_transport_preserves_form(p):
    s = build_prototype_surface(p).surface
    H = h1_basis(s)
    d, chains = delaunay_with_chains(s, H.chains)
    Hd = h1_basis(d)
    Phi = transport_matrix(H, Hd, chains)
    assert abs(det(Phi)) == 1
    assert mat_mul(mat_mul(transpose(Phi), Hd.gram), Phi) == H.gram
    for c, c2 in zip(H.chains, chains):
        assert chain_holonomy(s, c) == chain_holonomy(d, c2)


@given(st.lists(st.integers(-3, 3), min_size=3, max_size=3))
def test_skew_normal_form(v):
    a, b, c = v
    F = [[0, a, b, 0], [-a, 0, c, 2], [-b, -c, 0, 1], [0, -2, -1, 0]]
    pfaffian = a - 2 * b
    if pfaffian == 0:
        return
    P, divisors, _ = skew_normal_form(F)
    N = mat_mul(mat_mul(transpose(P), F), P)
    assert abs(det(P)) == 1
    assert N[0][1] == divisors[0] and N[2][3] == divisors[1]
    assert divisors[0] * divisors[1] == abs(pfaffian)
    assert divisors[1] % divisors[0] == 0
