"""Integer homology of polygon complexes and the anti-invariant lattice.

Cycles are either closed half-edge paths or 1-chains (dicts from the
smaller half-edge id of each edge to an integer coefficient).  A basis
of H1 comes from a tree-cotree decomposition; coordinates of any cycle
are obtained by pushing it off the dual spanning tree with face
boundaries.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .qfield import Vec2
from .surface import Chain, FlagMap, Mesh, TranslationSurface, normalize_chain, path_chain


class WrongDivisors(ValueError):
    pass


Matrix = list  # list of rows of ints

J = ((0, 1), (-1, 0))
PRYM_GRAM = ((0, 1, 0, 0), (-1, 0, 0, 0), (0, 0, 0, 2), (0, 0, -2, 0))


def _edge_key(s: TranslationSurface, h: int) -> tuple[int, int]:
    g = s.gluing[h]
    return (h, 1) if h < g else (g, -1)


@dataclass(eq=False)
class H1Data:
    surface: TranslationSurface
    basis: list          # closed half-edge paths
    gram: list
    dim: int
    _face_order: list = field(repr=False, default_factory=list)
    _leftover: list = field(repr=False, default_factory=list)
    _boundaries: dict = field(repr=False, default_factory=dict)

    @property
    def chains(self) -> list[Chain]:
        return [path_chain(self.surface, p) for p in self.basis]

    def coords(self, cycle) -> list[int]:
        """Coordinates of a cycle (path or chain) in the basis."""
        s = self.surface
        c = path_chain(s, cycle) if isinstance(cycle, (list, tuple)) else normalize_chain(s, cycle)
        c = dict(c)
        for face, e in self._face_order:
            k = c.get(e, 0)
            if not k:
                continue
            bd = self._boundaries[face]
            sgn = bd[e]
            mult = k * sgn  # bd[e] is +-1
            for x, y in bd.items():
                Mesh._add(c, x, -mult * y)
        return [c.get(e, 0) for e in self._leftover]

    def pair(self, x: list[int], y: list[int]) -> int:
        return sum(x[i] * self.gram[i][j] * y[j] for i in range(self.dim) for j in range(self.dim))

    def intersection(self, a, b) -> int:
        return self.pair(self.coords(a), self.coords(b))


def _closed_path(s: TranslationSurface, path: list[int]) -> bool:
    if not path:
        return False
    for x, y in zip(path, path[1:] + path[:1]):
        if s.vertex_of[s.next(x)] != s.vertex_of[y]:
            return False
    return True


def push_left_cocycle(s: TranslationSurface, path: list[int]) -> dict:
    """Edge weights of the closed path pushed slightly to its left.

    The value on an edge counts signed crossings of the pushed curve with
    that edge; pairing a cycle with it gives the algebraic intersection.
    """
    beta: dict = {}
    n = len(path)
    for i in range(n):
        x, y = path[i], path[(i + 1) % n]
        back = s.gluing[x]
        h = s.rot(y)
        while h != back:
            e, sg = _edge_key(s, h)
            beta[e] = beta.get(e, 0) + sg
            h = s.rot(h)
    return beta


def _raw_intersection(s: TranslationSurface, a: Chain, b_path: list[int]) -> int:
    beta = push_left_cocycle(s, b_path)
    return sum(k * beta.get(e, 0) for e, k in a.items())


# the square torus pins the overall sign: <horizontal, vertical> = +1
_SIGN = -1


def intersection_number(s: TranslationSurface, a, b_path: list[int]) -> int:
    ca = path_chain(s, a) if isinstance(a, (list, tuple)) else normalize_chain(s, a)
    return _SIGN * _raw_intersection(s, ca, list(b_path))


def _tree_path(parent: dict, depth: dict, u: int, v: int) -> tuple[list, list]:
    """Tree edges (pointing away from the root) climbed from u and from v to their meet."""
    up_u, up_v = [], []
    while depth[u] > depth[v]:
        up_u.append(parent[u])
        u = parent_vertex(parent, u)
    while depth[v] > depth[u]:
        up_v.append(parent[v])
        v = parent_vertex(parent, v)
    while u != v:
        up_u.append(parent[u])
        up_v.append(parent[v])
        u = parent_vertex(parent, u)
        v = parent_vertex(parent, v)
    return up_u, up_v


def parent_vertex(parent, u):
    return parent[("v", u)]


@lru_cache(maxsize=512)
def h1_basis(s: TranslationSurface) -> H1Data:
    nv = s.n_vertices
    vtx = s.vertex_of
    end = lambda h: vtx[s.next(h)]
    # spanning tree of the 1-skeleton
    outgoing = [[] for _ in range(nv)]
    for h in range(s.n_half):
        outgoing[vtx[h]].append(h)
    parent: dict = {}
    depth = {0: 0}
    in_tree = set()
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for h in outgoing[u]:
            w = end(h)
            if w not in depth:
                depth[w] = depth[u] + 1
                parent[w] = h
                parent[("v", w)] = u
                in_tree.add(_edge_key(s, h)[0])
                queue.append(w)
    # dual spanning tree through the remaining edges
    nf = len(s.polygons)
    seen = {0}
    face_order = []
    queue = deque([0])
    in_cotree = set()
    while queue:
        p = queue.popleft()
        for k in range(len(s.polygons[p])):
            h = s.he(p, k)
            e = _edge_key(s, h)[0]
            if e in in_tree:
                continue
            q = s.poly_of(s.gluing[h])
            if q in seen:
                continue
            seen.add(q)
            in_cotree.add(e)
            face_order.append((q, e))
            queue.append(q)
    leftover = [h for h in range(s.n_half) if h < s.gluing[h] and h not in in_tree and h not in in_cotree]
    boundaries = {}
    for p in range(nf):
        bd: Chain = {}
        for k in range(len(s.polygons[p])):
            e, sg = _edge_key(s, s.he(p, k))
            Mesh._add(bd, e, sg)
        boundaries[p] = bd
    basis = []
    for e in leftover:
        u, v = vtx[e], end(e)
        # close e (u -> v) with the tree path v -> u
        up_v, up_u = _tree_path(parent, depth, v, u)
        back = [s.gluing[h] for h in up_v] + list(reversed(up_u))
        basis.append([e] + back)
    data = H1Data(s, basis, [], len(basis), face_order, leftover, boundaries)
    for p in basis:
        assert _closed_path(s, p)
    chains = data.chains
    n = len(basis)
    gram = [[0] * n for _ in range(n)]
    for j in range(n):
        beta = push_left_cocycle(s, basis[j])
        for i in range(n):
            gram[i][j] = _SIGN * sum(k * beta.get(e, 0) for e, k in chains[i].items())
    data.gram = gram
    return data


def chain_holonomy(s: TranslationSurface, c) -> Vec2:
    if isinstance(c, (list, tuple)):
        c = path_chain(s, c)
    tot = Vec2(0, 0, s.D)
    for h, k in c.items():
        tot = tot + s.vec(h) * k
    return tot


def map_path(f: FlagMap, path: list[int]) -> list[int]:
    return [f.perm[h] for h in path]


def induced_action(s: TranslationSurface, f: FlagMap, target_h1: H1Data | None = None) -> list:
    """Matrix of f_* : H1(s) -> H1(f.codomain) (columns are images)."""
    src = h1_basis(s)
    dst = target_h1 or h1_basis(f.codomain)
    cols = [dst.coords(map_path(f, p)) for p in src.basis]
    return [[cols[j][i] for j in range(len(cols))] for i in range(dst.dim)]


def transport_matrix(src: H1Data, dst: H1Data, chains: list[Chain]) -> list:
    """Matrix whose columns are coordinates in ``dst`` of transported basis cycles."""
    cols = [dst.coords(c) for c in chains]
    return [[cols[j][i] for j in range(len(cols))] for i in range(dst.dim)]


# ---------------------------------------------------------------------------
# integer linear algebra


def mat_mul(A, B):
    n, m, p = len(A), len(B), len(B[0]) if B else 0
    return [[sum(A[i][k] * B[k][j] for k in range(m)) for j in range(p)] for i in range(n)]


def transpose(A):
    return [list(r) for r in zip(*A)] if A else []


def identity(n: int):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def mat_add(A, B):
    return [[a + b for a, b in zip(r, t)] for r, t in zip(A, B)]


def mat_scale(A, k):
    return [[k * a for a in r] for r in A]


def det(A) -> int:
    M = [[Fraction(x) for x in r] for r in A]
    n = len(M)
    d = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            d = -d
        d *= M[c][c]
        for r in range(c + 1, n):
            f = M[r][c] / M[c][c]
            if f:
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return int(d)


def integer_kernel(A) -> list:
    """Basis (as columns of an n x r matrix) of the saturated kernel of A over Z."""
    rows = len(A)
    n = len(A[0])
    M = [list(r) for r in A]
    U = identity(n)

    def colop(i, j, k):  # col_i += k col_j
        for r in range(rows):
            M[r][i] += k * M[r][j]
        for r in range(n):
            U[r][i] += k * U[r][j]

    def swap(i, j):
        for r in range(rows):
            M[r][i], M[r][j] = M[r][j], M[r][i]
        for r in range(n):
            U[r][i], U[r][j] = U[r][j], U[r][i]

    piv_col = 0
    for r in range(rows):
        if piv_col >= n:
            break
        while True:
            nz = [c for c in range(piv_col, n) if M[r][c] != 0]
            if not nz:
                break
            c0 = min(nz, key=lambda c: abs(M[r][c]))
            swap(piv_col, c0)
            done = True
            for c in range(piv_col + 1, n):
                if M[r][c]:
                    colop(c, piv_col, -(M[r][c] // M[r][piv_col]))
                    if M[r][c]:
                        done = False
            if done:
                break
        if any(M[r][c] for c in range(piv_col, n)):
            piv_col += 1
    kernel_cols = [c for c in range(n) if all(M[r][c] == 0 for r in range(rows))]
    return [[U[i][c] for c in kernel_cols] for i in range(n)]


def solve_integer(K, B):
    """Integer X with K X = B for a full-column-rank K, or None."""
    n, r = len(K), len(K[0])
    m = len(B[0])
    aug = [[Fraction(x) for x in K[i]] + [Fraction(x) for x in B[i]] for i in range(n)]
    row = 0
    pivots = []
    for c in range(r):
        piv = next((i for i in range(row, n) if aug[i][c] != 0), None)
        if piv is None:
            return None
        aug[row], aug[piv] = aug[piv], aug[row]
        pv = aug[row][c]
        aug[row] = [x / pv for x in aug[row]]
        for i in range(n):
            if i != row and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[row])]
        pivots.append(row)
        row += 1
    for i in range(row, n):
        if any(aug[i][r + j] != 0 for j in range(m)):
            return None
    X = [[aug[i][r + j] for j in range(m)] for i in range(r)]
    if any(x.denominator != 1 for rr in X for x in rr):
        return None
    return [[int(x) for x in rr] for rr in X]


def smith_diagonal(A) -> list[int]:
    """Invariant factors of an integer matrix."""
    M = [list(r) for r in A]
    rows, cols = len(M), len(M[0]) if M else 0
    out = []
    t = 0
    while t < min(rows, cols):
        nz = [(abs(M[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if M[i][j]]
        if not nz:
            break
        _, i, j = min(nz)
        M[t], M[i] = M[i], M[t]
        for r in M:
            r[t], r[j] = r[j], r[t]
        clean = True
        for i in range(t + 1, rows):
            q = M[i][t] // M[t][t]
            if q:
                M[i] = [a - q * b for a, b in zip(M[i], M[t])]
            if M[i][t]:
                clean = False
        for j in range(t + 1, cols):
            q = M[t][j] // M[t][t]
            if q:
                for r in M:
                    r[j] -= q * r[t]
            if M[t][j]:
                clean = False
        if not clean:
            continue
        bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols) if M[i][j] % M[t][t]), None)
        if bad:
            i, _ = bad
            M[t] = [a + b for a, b in zip(M[t], M[i])]
            continue
        out.append(abs(M[t][t]))
        t += 1
    return out


def skew_normal_form(F):
    """Integer P with P^T F P = diag(d1 J, d2 J, ...) for skew-symmetric F."""
    n = len(F)
    F = [list(r) for r in F]
    P = identity(n)

    def swap(i, j):
        F[i], F[j] = F[j], F[i]
        for r in F:
            r[i], r[j] = r[j], r[i]
        for r in P:
            r[i], r[j] = r[j], r[i]

    def add(i, j, k):  # e_i += k e_j
        for r in P:
            r[i] += k * r[j]
        for c in range(n):
            F[i][c] += k * F[j][c]
        for r in range(n):
            F[r][i] += k * F[r][j]

    divisors = []
    i = 0
    while i + 1 < n:
        nz = [(abs(F[p][q]), p, q) for p in range(i, n) for q in range(p + 1, n) if F[p][q]]
        if not nz:
            break
        _, p, q = min(nz)
        swap(i, p)
        swap(i + 1, q)
        if F[i][i + 1] < 0:
            swap(i, i + 1)
        d = F[i][i + 1]
        clean = True
        for j in range(i + 2, n):
            if F[i][j]:
                add(j, i + 1, -(F[i][j] // d))
                if F[i][j]:
                    clean = False
            if F[i + 1][j]:
                add(j, i, F[i + 1][j] // d)
                if F[i + 1][j]:
                    clean = False
        if clean:
            divisors.append(d)
            i += 2
    return P, divisors, F


@dataclass(eq=False)
class PrymLattice:
    surface: TranslationSurface
    basis: list          # four chains (a0, b0, a, b)
    gram: list
    inclusion: list      # 4 x 2g integer matrix, rows are H1 coordinates
    h1: H1Data

    def coords_matrix(self):
        """2g x 4 matrix whose columns are the basis cycles."""
        return transpose(self.inclusion)


def anti_invariant_lattice(s: TranslationSurface, tau: FlagMap, preferred: list | None = None) -> PrymLattice:
    """Saturated (-1)-eigenlattice of tau with a basis in normal form diag(J, 2J)."""
    H = h1_basis(s)
    A = induced_action(s, tau)
    n = H.dim
    K = integer_kernel(mat_add(A, identity(n)))
    r = len(K[0]) if K and K[0] else 0
    if r != 4:
        raise WrongDivisors(f"anti-invariant lattice has rank {r}, expected 4")
    F = mat_mul(mat_mul(transpose(K), H.gram), K)
    if preferred is not None:
        B = transpose([H.coords(c) for c in preferred])
        X = solve_integer(K, B)
        if X is None or abs(det(X)) != 1:
            raise WrongDivisors("preferred cycles do not form a basis of the anti-invariant lattice")
        G = mat_mul(mat_mul(transpose(B), H.gram), B)
        if [tuple(r) for r in G] != [tuple(r) for r in PRYM_GRAM]:
            raise WrongDivisors("preferred cycles are not in normal form")
        return PrymLattice(s, [normalize_chain(s, c) for c in preferred], G, transpose(B), H)
    P, divisors, _ = skew_normal_form(F)
    if sorted(divisors) != [1, 2]:
        raise WrongDivisors(f"elementary divisors {divisors}, expected (1, 2)")
    if divisors[0] == 2:
        P = [[row[2], row[3], row[0], row[1]] for row in P]
    B = mat_mul(K, P)
    G = mat_mul(mat_mul(transpose(B), H.gram), B)
    assert [tuple(r) for r in G] == [tuple(r) for r in PRYM_GRAM]
    chains = []
    for j in range(4):
        c: Chain = {}
        for i in range(n):
            for e, k in path_chain(s, H.basis[i]).items():
                Mesh._add(c, e, k * B[i][j])
        chains.append(c)
    return PrymLattice(s, chains, G, transpose(B), H)


def period_vector(s: TranslationSurface, lattice: PrymLattice) -> list[Vec2]:
    return [chain_holonomy(s, c) for c in lattice.basis]


def is_symplectic(A, G) -> bool:
    return mat_mul(mat_mul(transpose(A), G), A) == [list(r) for r in G]


def trace(A) -> int:
    return sum(A[i][i] for i in range(len(A)))
