"""Straight-line geometry: saddle connections, twins, cylinders, three-tori.

Saddle connections are found by unfolding convex cells around every
corner of every cone point, with exact wedge and distance pruning.  A
connection is identified by its start corner (the half-edge opening the
corner whose half-open sector ``[edge, next edge)`` contains its
direction) together with its holonomy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .homology import h1_basis, induced_action, mat_mul, transport_matrix
from .qfield import QuadNum, Vec2, as_quad, orient, qn_sign
from .surface import (
    FlagMap,
    Mesh,
    TranslationSurface,
    apply_gl2,
    automorphisms_of,
    delaunay_decomposition_with_chains,
    delaunay_with_chains,
    make_surface,
    stratum,
    triangulate,
)


class GeodesicError(ValueError):
    pass


class WrongEndpoints(GeodesicError):
    pass


class NotPeriodicWithinBudget(GeodesicError):
    pass


class TwinBoundViolated(GeodesicError):
    pass


@dataclass(frozen=True, eq=False)
class SaddleConnection:
    holonomy: Vec2
    start: str | None
    end: str | None
    start_vertex: int
    end_vertex: int
    path: tuple          # half-edge path homotopic to the segment, running along its left side
    crossings: tuple     # half-edges crossed by the open segment, in order
    start_key: int       # corner half-edge at the start
    end_key: int         # corner half-edge at the arrival point

    @property
    def length2(self) -> QuadNum:
        return self.holonomy.norm2()

    def reversed(self) -> "SaddleConnection":
        raise NotImplementedError("use reverse_connection(surface, sc)")

    def ident(self) -> tuple:
        return (self.start_key, self.holonomy.key())

    def __eq__(self, other):
        return isinstance(other, SaddleConnection) and self.ident() == other.ident()

    def __hash__(self):
        return hash(self.ident())

    def sort_key(self) -> tuple:
        return (self.holonomy.key(), self.start_key)

    def to_json(self) -> dict:
        return {
            "hol": self.holonomy.to_json(),
            "from": self.start,
            "to": self.end,
            "len2": self.length2.to_json(),
        }

    def __repr__(self):
        return f"SaddleConnection({self.start}->{self.end}, hol={self.holonomy}, key={self.start_key})"


def reverse_connection(s: TranslationSurface, sc: SaddleConnection) -> SaddleConnection:
    path = tuple(s.gluing[h] for h in reversed(sc.path))
    crossings = tuple(s.gluing[h] for h in reversed(sc.crossings))
    return SaddleConnection(-sc.holonomy, sc.end, sc.start, sc.end_vertex, sc.start_vertex,
                            path, crossings, sc.end_key, sc.start_key)


def image_connection(f: FlagMap, sc: SaddleConnection) -> SaddleConnection:
    """Image of a connection under a (possibly orientation-of-omega reversing) automorphism."""
    t = f.codomain
    path = tuple(f.perm[h] for h in sc.path)
    crossings = tuple(f.perm[h] for h in sc.crossings)
    return SaddleConnection(sc.holonomy * f.sign, t.labels[f.perm[sc.start_key]], t.labels[f.perm[sc.end_key]],
                            t.vertex_of[f.perm[sc.start_key]], t.vertex_of[f.perm[sc.end_key]],
                            path, crossings, f.perm[sc.start_key], f.perm[sc.end_key])


def is_invariant(f: FlagMap, sc: SaddleConnection) -> bool:
    """Whether an anti-automorphism maps the connection onto itself (reversed)."""
    return f.perm[sc.start_key] == sc.end_key


# ---------------------------------------------------------------------------
# enumeration by unfolding


def _seg_dist2_exceeds(p1: Vec2, p2: Vec2, bound2: QuadNum) -> bool:
    """Whether the squared distance from 0 to segment [p1, p2] exceeds bound2."""
    d = p2 - p1
    if qn_sign(p1.dot(d)) >= 0:
        return p1.norm2() > bound2
    if qn_sign(p2.dot(d)) <= 0:
        return p2.norm2() > bound2
    c = p1.cross(p2)
    return c * c > bound2 * d.norm2()


def _scan_surface(s: TranslationSurface) -> TranslationSurface:
    return s if s.is_convex() else triangulate(s)


def saddle_connections(s: TranslationSurface, L, squared: bool = False) -> list[SaddleConnection]:
    """All oriented saddle connections with length at most L (or L^2 if ``squared``)."""
    bound2 = as_quad(L, s.D)
    if not squared:
        if bound2 <= 0:
            raise ValueError("length bound must be positive")
        bound2 = bound2 * bound2
    if not s.is_convex():
        raise GeodesicError("saddle connection search needs convex cells; triangulate first")
    out = []
    for h0 in range(s.n_half):
        out.extend(_from_corner(s, h0, bound2))
    out.sort(key=SaddleConnection.sort_key)
    return out


def _cw_routes(s: TranslationSurface, h: int, prefix: tuple) -> dict:
    """Routes clockwise around the polygon of h, starting from the start of h.

    Maps each half-edge y of the polygon (other than h) to the path
    ``prefix`` followed by the reversed boundary down to the start of y.
    """
    out = {}
    route = prefix
    y = s.prev(h)
    while y != h:
        route = route + (s.gluing[y],)
        out[y] = route
        y = s.prev(y)
    return out


def _from_corner(s: TranslationSurface, h0: int, bound2: QuadNum) -> list:
    out = []
    v0 = s.vertex_of[h0]
    lab = s.labels[h0]
    u = s.vec(h0)
    if u.norm2() <= bound2:
        nx = s.next(h0)
        out.append(SaddleConnection(u, lab, s.labels[nx], v0, s.vertex_of[nx], (h0,), (), h0, s.gluing[h0]))
    w = -s.vec(s.prev(h0))
    routes = _cw_routes(s, h0, ())
    stack = []
    a = u
    g = s.next(h0)
    while g != s.prev(h0):
        b = a + s.vec(g)
        nx = s.next(g)
        if nx != s.prev(h0) and orient(u, b) > 0 and orient(b, w) > 0 and b.norm2() <= bound2:
            out.append(SaddleConnection(b, lab, s.labels[nx], v0, s.vertex_of[nx], routes[nx], (), h0, nx))
        stack.append((g, a, b, u, w, routes[nx], ()))
        a = b
        g = nx
    while stack:
        g, a, b, lo, hi, route_b, crossed = stack.pop()
        lo = a if orient(lo, a) > 0 else lo
        hi = b if orient(b, hi) > 0 else hi
        if orient(lo, hi) <= 0 or _seg_dist2_exceeds(a, b, bound2):
            continue
        crossed = crossed + (g,)
        t = s.gluing[g]  # runs from b to a in the next polygon
        cw = _cw_routes(s, t, route_b)
        x = s.next(t)
        xa = a
        while x != t:
            xb = xa + s.vec(x)
            nx = s.next(x)
            if nx != t:
                if orient(lo, xb) > 0 and orient(xb, hi) > 0 and xb.norm2() <= bound2:
                    out.append(SaddleConnection(xb, lab, s.labels[nx], v0, s.vertex_of[nx], cw[nx], crossed, h0, nx))
                rb = cw[nx]
            else:
                rb = route_b
            stack.append((x, xa, xb, lo, hi, rb, crossed))
            xa = xb
            x = nx
    return out


def connection_from_path(s: TranslationSurface, sc_list, start_key: int, hol: Vec2):
    for sc in sc_list:
        if sc.start_key == start_key and sc.holonomy == hol:
            return sc
    return None


def find_connection(s: TranslationSurface, path, bound_scale: int = 1) -> SaddleConnection:
    """The saddle connection whose left-side route is the given half-edge path.

    Used to turn a straight edge path (e.g. a slit) into a connection.
    """
    from .homology import chain_holonomy

    hol = chain_holonomy(s, list(path))
    start_v = s.vertex_of[path[0]]
    for sc in saddle_connections(s, hol.norm2() * bound_scale, squared=True):
        if sc.holonomy == hol and sc.start_vertex == start_v and tuple(sc.path) == tuple(path):
            return sc
    for sc in saddle_connections(s, hol.norm2() * bound_scale, squared=True):
        if sc.holonomy == hol and sc.start_vertex == start_v and _same_rel_class(s, sc.path, path):
            return sc
    raise GeodesicError("no saddle connection realises this path")


def _same_rel_class(s, p1, p2) -> bool:
    from .homology import h1_basis as _h
    from .surface import path_chain

    c = dict(path_chain(s, list(p1)))
    for e, k in path_chain(s, list(p2)).items():
        Mesh._add(c, e, -k)
    H = _h(s)
    return all(x == 0 for x in H.coords(c))


# ---------------------------------------------------------------------------
# twins and admissibility


def _kind(s: TranslationSurface) -> str:
    orders = stratum(s, with_tag=False).orders
    if orders == (2, 2):
        return "2,2"
    if orders == (1, 1, 2):
        return "1,1,2"
    raise WrongEndpoints(f"surface is in {stratum(s, with_tag=False)}, not in H(2,2) or H(1,1,2)")


def check_convention(s: TranslationSurface, sigma0: SaddleConnection, tau: FlagMap | None = None) -> str:
    kind = _kind(s)
    if kind == "2,2":
        if (sigma0.start, sigma0.end) != ("P", "Q"):
            raise WrongEndpoints("sigma0 must run from P to Q")
        if tau is not None and not is_invariant(tau, sigma0):
            raise WrongEndpoints("sigma0 must be invariant under the Prym involution")
    else:
        if (sigma0.start, sigma0.end) != ("R1", "Q"):
            raise WrongEndpoints("sigma0 must run from R1 to Q")
    return kind


@dataclass
class TwinReport:
    twins: list
    double_twins: list

    def to_json(self) -> dict:
        return {"twins": [t.to_json() for t in self.twins], "double_twins": [t.to_json() for t in self.double_twins]}


def twins(s: TranslationSurface, sigma0: SaddleConnection, tau: FlagMap | None = None) -> TwinReport:
    kind = check_convention(s, sigma0, tau)
    v = sigma0.holonomy
    cands = saddle_connections(s, v.norm2() * 4, squared=True)
    tw = [c for c in cands if c != sigma0 and c.holonomy == v and (c.start, c.end) == (sigma0.start, sigma0.end)]
    dt = []
    if kind == "1,1,2":
        dt = [c for c in cands if c.holonomy == v * 2 and (c.start, c.end) == ("R1", "R2")]
        if len(tw) + len(dt) > 1:
            raise TwinBoundViolated("more than one twin or double twin in H(1,1,2)")
    elif len(tw) > 2:
        raise TwinBoundViolated("more than two twins in H(2,2)")
    return TwinReport(tw, dt)


@dataclass
class Admissibility:
    admissible: bool
    certificate: SaddleConnection | None = None
    ratio: Fraction | QuadNum | None = None

    def __bool__(self):
        return self.admissible


def _ratio(u: Vec2, v: Vec2):
    """lambda with u = lambda v for positively parallel u, v, else None."""
    if orient(u, v) != 0 or qn_sign(u.dot(v)) <= 0:
        return None
    return u.dot(v) / v.norm2()


def parallel_connections(s: TranslationSurface, sigma0: SaddleConnection, max_ratio: int = 2) -> list:
    v = sigma0.holonomy
    out = []
    for c in saddle_connections(s, v.norm2() * max_ratio * max_ratio, squared=True):
        r = _ratio(c.holonomy, v)
        if r is not None and c != sigma0:
            out.append((r, c))
    out.sort(key=lambda rc: (rc[0], rc[1].sort_key()))
    return out


def is_admissible(s: TranslationSurface, sigma0: SaddleConnection, tau: FlagMap | None = None) -> Admissibility:
    kind = check_convention(s, sigma0, tau)
    for r, c in parallel_connections(s, sigma0, 2):
        if kind == "2,2":
            if (c.start, c.end) == ("P", "Q") and r <= 1:
                return Admissibility(False, c, r)
        else:
            if c.start != "R1":
                continue
            if c.end == "Q" and r <= 1:
                return Admissibility(False, c, r)
            if c.end == "R2" and r <= 2:
                return Admissibility(False, c, r)
    return Admissibility(True)


# ---------------------------------------------------------------------------
# straight-line flow and cylinder decompositions


def _in_corner(s: TranslationSurface, h: int, d: Vec2) -> str | None:
    """'edge' if d points along h, 'inside' if strictly inside the corner sector, else None."""
    u = s.vec(h)
    w = -s.vec(s.prev(h))
    if orient(u, d) == 0 and qn_sign(u.dot(d)) > 0:
        return "edge"
    if orient(u, d) > 0 and orient(d, w) > 0:
        return "inside"
    return None


def trace_ray(t: TranslationSurface, h: int, d: Vec2, budget: int):
    """Follow the ray from the corner of ``h`` in direction d through a triangulation.

    Returns (holonomy, end half-edge) when a vertex is hit, None when the
    crossing budget runs out.
    """
    where = _in_corner(t, h, d)
    if where == "edge":
        return t.vec(h), t.gluing[h]
    if where is None:
        raise ValueError("direction is not in this corner")
    # cross the edge opposite to the corner
    g = t.next(h)
    a = t.vec(h)
    steps = 0
    while steps < budget:
        steps += 1
        b = a + t.vec(g)
        # g runs from a to b; the ray crosses it into the neighbouring triangle
        x = t.gluing[g]  # from b to a
        c = a + t.vec(t.next(x))  # third vertex: x ends at a, next(x) leaves a
        oc = orient(d, c)
        if oc == 0 and qn_sign(d.dot(c)) > 0:
            return c, t.prev(x)
        ob = orient(d, b)
        if oc == ob:
            # exit through the edge from a to c
            g = t.next(x)
        else:
            # exit through the edge from c to b
            g = t.prev(x)
            a = c
    return None


@dataclass(frozen=True)
class Cylinder:
    direction: Vec2
    circumference: Vec2
    width: QuadNum
    height: QuadNum
    bottom: tuple
    top: tuple

    @property
    def area(self) -> QuadNum:
        return self.width * self.height

    def to_json(self) -> dict:
        return {
            "direction": self.direction.to_json(),
            "circumference": self.circumference.to_json(),
            "width": self.width.to_json(),
            "height": self.height.to_json(),
            "bottom": [v.to_json() for v in self.bottom],
            "top": [v.to_json() for v in self.top],
        }


def _rotation_to_horizontal(d: Vec2):
    return ((d.x, d.y), (-d.y, d.x))


def _inverse2(M, D):
    (a, b), (c, e) = M
    a, b, c, e = (as_quad(z, D) for z in (a, b, c, e))
    det = a * e - b * c
    return ((e / det, -b / det), (-c / det, a / det))


def default_budget(t: TranslationSurface, d: Vec2) -> int:
    n = len(t.polygons)
    diam2 = QuadNum(0, 0, t.D)
    for v in t.vecs:
        diam2 = diam2 + v.norm2()
    ratio = float(diam2 / d.norm2())
    return 10 * n * (2 + math.ceil(math.sqrt(max(ratio, 0.0))))


def check_periodic(s: TranslationSurface, d: Vec2, budget: int | None = None) -> list:
    """Trace every separatrix in direction d; error if one does not end within budget."""
    t = delaunay_with_chains(s)[0]
    budget = budget if budget is not None else default_budget(t, d)
    found = []
    for h in range(t.n_half):
        if _in_corner(t, h, d) is None:
            continue
        res = trace_ray(t, h, d, budget)
        if res is None:
            raise NotPeriodicWithinBudget(f"separatrix from corner {h} did not reach a zero within {budget} crossings")
        found.append(res[0])
    return found


def _squeeze(K: int):
    return ((Fraction(1, K), 0), (0, K))


def horizontal_triangulation(s: TranslationSurface, max_rounds: int = 40, chains=()):
    """Triangulation of s in which every triangle has a horizontal edge.

    Found as the Delaunay triangulation of diag(1/K, K) s for growing K;
    returns (triangulation in the original coordinates, K, chains).
    """
    K = 1
    for _ in range(max_rounds):
        sq = apply_gl2(s, _squeeze(K))
        t, ch = delaunay_with_chains(sq, chains)
        if all(any(qn_sign(v.y) == 0 for v in poly) for poly in t.polygons):
            back = apply_gl2(t, ((K, 0), (0, Fraction(1, K))))
            return back, K, ch
        K *= 2
    raise NotPeriodicWithinBudget("horizontal saddle connections did not become edges")


def cylinder_decomposition(s: TranslationSurface, direction, budget: int | None = None) -> list[Cylinder]:
    d = direction if isinstance(direction, Vec2) else Vec2(direction[0], direction[1], s.D)
    if d.is_zero():
        raise ValueError("direction must be nonzero")
    M = _rotation_to_horizontal(d)
    s1 = apply_gl2(s, M)
    check_periodic(s1, Vec2(1, 0, s.D), budget)
    t, _, _ = horizontal_triangulation(s1)
    n = len(t.polygons)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for h in range(t.n_half):
        if qn_sign(t.vec(h).y) != 0:
            a, b = find(t.poly_of(h)), find(t.poly_of(t.gluing[h]))
            parent[a] = b
    comps: dict = {}
    for p in range(n):
        comps.setdefault(find(p), []).append(p)
    dn2 = d.norm2()
    Minv = _inverse2(M, s.D)
    out = []
    for polys in comps.values():
        area = QuadNum(0, 0, s.D)
        width = QuadNum(0, 0, s.D)
        bottom, top = [], []
        for p in polys:
            a, b, c = t.polygons[p]
            area = area + a.cross(b) / 2
            for v in (a, b, c):
                if qn_sign(v.y) == 0:
                    if v.x > 0:
                        width = width + v.x
                        bottom.append(v.transform(Minv))
                    else:
                        top.append((-v).transform(Minv))
        tw = width / dn2
        out.append(Cylinder(d, d * tw, tw, area / width, tuple(sorted(bottom, key=Vec2.key)),
                            tuple(sorted(top, key=Vec2.key))))
    out.sort(key=lambda c: (-c.area, -c.width, c.height.key()))
    return out


# ---------------------------------------------------------------------------
# three-tori decompositions


@dataclass
class ThreeToriDecomposition:
    slits: list                 # holonomy groups: [(start, end, hol, count)]
    tori: list                  # lattice bases: [(Vec2, Vec2)]
    fixed_torus_index: int
    surface: TranslationSurface  # cell structure in which the slits are edges
    pieces: list                # cells of each torus

    def to_json(self) -> dict:
        return {
            "slits": [{"from": a, "to": b, "hol": v.to_json(), "count": k} for a, b, v, k in self.slits],
            "tori": [[u.to_json(), v.to_json()] for u, v in self.tori],
            "fixed_torus_index": self.fixed_torus_index,
        }


def same_lattice(b1, b2) -> bool:
    """Whether two bases generate the same lattice in R^2."""

    def contains(basis, v):
        u, w = basis
        det = u.cross(w)
        x = v.cross(w) / det
        y = u.cross(v) / det
        return x.is_rational() and y.is_rational() and x.a.denominator == 1 and y.a.denominator == 1

    return all(contains(b1, v) for v in b2) and all(contains(b2, v) for v in b1)


def _slit_families(s: TranslationSurface, kind: str, bound2) -> list:
    groups: dict = {}
    for sc in saddle_connections(s, bound2, squared=True):
        groups.setdefault((sc.start, sc.end, sc.holonomy), []).append(sc)
    fams = []
    if kind == "2,2":
        for (a, b, v), scs in groups.items():
            if (a, b) == ("P", "Q") and len(scs) == 3:
                fams.append([(a, b, v, 3)])
    else:
        for (a, b, v), scs in groups.items():
            if (a, b) == ("R1", "Q") and len(scs) == 2 and len(groups.get(("Q", "R2", v), [])) == 2:
                fams.append([(a, b, v, 2), ("Q", "R2", v, 2)])
    fams.sort(key=lambda f: (_len_key(f[0][2]), f[0][2].key()))
    return fams


def _len_key(v: Vec2):
    # exact ordering key through a high-precision float is only used for tie-free sorting
    from .qfield import qn_approx

    lo, _ = qn_approx(v.norm2(), 64)
    return lo


def transport_involution(s: TranslationSurface, tau: FlagMap, t: TranslationSurface, chains: list) -> FlagMap | None:
    """The anti-automorphism of t acting on homology as tau does on s.

    ``chains`` are the H1 basis cycles of s transported to t.
    """
    Hs = h1_basis(s)
    Ht = h1_basis(t)
    Phi = transport_matrix(Hs, Ht, chains)
    A = induced_action(s, tau)
    target = mat_mul(Phi, A)
    for f in automorphisms_of(t, tau.sign):
        if mat_mul(induced_action(t, f), Phi) == target:
            return f
    return None


def three_tori_decomposition(s: TranslationSurface, tau: FlagMap, bound=None, max_rounds: int = 30):
    """Cut s along a family of homologous slits into three tori, if one is found."""
    try:
        kind = _kind(s)
    except WrongEndpoints:
        return None
    if bound is None:
        diam2 = QuadNum(0, 0, s.D)
        for v in s.vecs:
            diam2 = diam2 + v.norm2()
        bound2 = diam2
    else:
        bound2 = as_quad(bound, s.D) ** 2
    cells = s if s.is_convex() else triangulate(s)
    if cells is not s:
        # carry tau over to the convex cells
        H = h1_basis(s)
        cells, ch = delaunay_decomposition_with_chains(s, H.chains)
        tau = transport_involution(s, tau, cells, ch)
        s = cells
    for fam in _slit_families(s, kind, bound2):
        dec = _cut_along(s, tau, fam, max_rounds)
        if dec is not None:
            return dec
    return None


def _cut_along(s: TranslationSurface, tau: FlagMap, fam: list, max_rounds: int):
    v = fam[0][2]
    M = _rotation_to_horizontal(v)
    Minv = _inverse2(M, s.D)
    s1 = apply_gl2(s, M)
    H = h1_basis(s)
    want = sum(k for *_, k in fam)
    K = 1
    for _ in range(max_rounds):
        sq = apply_gl2(s1, _squeeze(K))
        t, ch = delaunay_decomposition_with_chains(sq, H.chains)
        slit_edges = []
        for h in range(t.n_half):
            if h > t.gluing[h]:
                continue
            slit_edges.extend(_match_slits(t, h, fam, M, K))
        if len(slit_edges) == want:
            back = apply_gl2(t, ((K, 0), (0, Fraction(1, K))))
            back = apply_gl2(back, Minv)
            return _assemble(back, s, tau, ch, fam, slit_edges)
        K *= 2
    return None


def _match_slits(t: TranslationSurface, h: int, fam, M, K) -> list:
    out = []
    for a, b, w, _k in fam:
        target = w.transform(M).transform(_squeeze(K))
        for x in (h, t.gluing[h]):
            if t.vec(x) == target and t.labels[x] == a and t.labels[t.next(x)] == b:
                out.append(x)
    return out


def _assemble(t: TranslationSurface, s: TranslationSurface, tau: FlagMap, chains, fam, slit_edges):
    cut = set(slit_edges) | {t.gluing[h] for h in slit_edges}
    n = len(t.polygons)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for h in range(t.n_half):
        if h not in cut:
            a, b = find(t.poly_of(h)), find(t.poly_of(t.gluing[h]))
            parent[a] = b
    comps: dict = {}
    for p in range(n):
        comps.setdefault(find(p), []).append(p)
    if len(comps) != 3:
        return None
    pieces = sorted(comps.values())
    tau_t = transport_involution(s, tau, t, chains) if tau is not None else None
    tori = []
    for polys in pieces:
        lat = _glued_torus(t, polys, cut)
        if lat is None:
            return None
        tori.append(lat)
    fixed = -1
    if tau_t is not None:
        for i, polys in enumerate(pieces):
            if tau_t.surface.poly_of(tau_t.perm[t.he(polys[0], 0)]) in polys:
                fixed = i
        # put the fixed torus first
        if fixed > 0:
            pieces.insert(0, pieces.pop(fixed))
            tori.insert(0, tori.pop(fixed))
            fixed = 0
    slits = [(a, b, w, k) for a, b, w, k in fam]
    return ThreeToriDecomposition(slits, tori, fixed, t, pieces)


def _glued_torus(t: TranslationSurface, polys: list, cut: set):
    """Lattice of the closed surface obtained by regluing a piece along its slits."""
    index = {}
    new_polys = []
    ids = []
    for p in polys:
        for k in range(len(t.polygons[p])):
            index[t.he(p, k)] = len(ids)
            ids.append(t.he(p, k))
        new_polys.append(list(t.polygons[p]))
    boundary = [h for h in ids if h in cut]
    glue = [None] * len(ids)
    for h in ids:
        if h not in cut:
            glue[index[h]] = index[t.gluing[h]]
    # pair boundary half-edges with opposite vectors and matching endpoint labels
    free = list(boundary)
    while free:
        h = free.pop(0)
        partner = None
        for g in free:
            if t.vec(g) == -t.vec(h) and t.labels[g] == t.labels[t.next(h)] and t.labels[h] == t.labels[t.next(g)]:
                partner = g
                break
        if partner is None:
            return None
        free.remove(partner)
        glue[index[h]] = index[partner]
        glue[index[partner]] = index[h]
    piece = make_surface(t.D, new_polys, glue, [None] * len(ids), check=False)
    if piece.genus != 1:
        return None
    H = h1_basis(piece)
    from .homology import chain_holonomy

    u, w = (chain_holonomy(piece, c) for c in H.basis)
    if qn_sign(u.cross(w)) < 0:
        u, w = w, u
    return (u, w)
