"""Polygonal translation surfaces.

A surface is a list of counterclockwise polygons given by their edge
vectors, together with an involutive gluing of edges by translation.
Half-edges are numbered consecutively polygon by polygon; the label of a
half-edge is the name (or ``None``) of its start vertex.

Most geometric work happens on a mutable :class:`Mesh` whose half-edge
ids are stable under flips, so that 1-chains can be transported through
triangulation, Delaunay flips and cell merging.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .qfield import (
    QuadNum,
    Vec2,
    as_quad,
    ccw_turns,
    incircle,
    orient,
    orient3,
    qn_sign,
    segments_intersect,
)


class SurfaceError(ValueError):
    pass


class MismatchedEdge(SurfaceError):
    pass


class Disconnected(SurfaceError):
    pass


class NonSimplePolygon(SurfaceError):
    pass


class NonPositiveDeterminant(SurfaceError):
    pass


Chain = dict  # half-edge id -> integer coefficient


@dataclass(frozen=True)
class Stratum:
    orders: tuple[int, ...]
    component_tag: str | None = None

    @property
    def genus(self) -> int:
        return (sum(self.orders) + 2) // 2

    def __str__(self):
        body = ",".join(str(k) for k in self.orders) or "0"
        return f"H({body})" + (self.component_tag or "")


@dataclass(frozen=True, eq=False)
class TranslationSurface:
    D: int
    polygons: tuple
    gluing: tuple
    labels: tuple

    # -- indexing -------------------------------------------------------
    @cached_property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for poly in self.polygons:
            out.append(acc)
            acc += len(poly)
        return tuple(out)

    @cached_property
    def n_half(self) -> int:
        return sum(len(p) for p in self.polygons)

    @cached_property
    def _poly_index(self) -> tuple:
        pi, ki = [], []
        for p, poly in enumerate(self.polygons):
            for k in range(len(poly)):
                pi.append(p)
                ki.append(k)
        return tuple(pi), tuple(ki)

    def he(self, p: int, k: int) -> int:
        return self.offsets[p] + (k % len(self.polygons[p]))

    def poly_of(self, h: int) -> int:
        return self._poly_index[0][h]

    def pos_of(self, h: int) -> tuple[int, int]:
        return self._poly_index[0][h], self._poly_index[1][h]

    def vec(self, h: int) -> Vec2:
        p, k = self.pos_of(h)
        return self.polygons[p][k]

    @cached_property
    def vecs(self) -> tuple:
        return tuple(v for poly in self.polygons for v in poly)

    def next(self, h: int) -> int:
        p, k = self.pos_of(h)
        return self.offsets[p] + (k + 1) % len(self.polygons[p])

    def prev(self, h: int) -> int:
        p, k = self.pos_of(h)
        return self.offsets[p] + (k - 1) % len(self.polygons[p])

    def twin(self, h: int) -> int:
        return self.gluing[h]

    def rot(self, h: int) -> int:
        """Next outgoing half-edge counterclockwise around the start vertex."""
        return self.gluing[self.prev(h)]

    # -- vertices -------------------------------------------------------
    @cached_property
    def vertex_of(self) -> tuple[int, ...]:
        vid = [-1] * self.n_half
        count = 0
        for h in range(self.n_half):
            if vid[h] >= 0:
                continue
            g = h
            while vid[g] < 0:
                vid[g] = count
                g = self.rot(g)
            count += 1
        return tuple(vid)

    @cached_property
    def n_vertices(self) -> int:
        return max(self.vertex_of) + 1 if self.n_half else 0

    def vertex_star(self, v: int) -> list[int]:
        """Outgoing half-edges at vertex ``v`` in counterclockwise order."""
        h0 = self.vertex_of.index(v)
        out = [h0]
        g = self.rot(h0)
        while g != h0:
            out.append(g)
            g = self.rot(g)
        return out

    @cached_property
    def cone_turns(self) -> tuple[int, ...]:
        """Cone angle of each vertex divided by 2*pi."""
        turns = [0] * self.n_vertices
        for h in range(self.n_half):
            u = self.vec(h)
            w = -self.vec(self.prev(h))
            turns[self.vertex_of[h]] += ccw_turns(u, w)
        return tuple(turns)

    def vertex_label(self, v: int) -> str | None:
        return self.labels[self.vertex_of.index(v)]

    def label_vertex(self, name: str) -> int:
        for h, lab in enumerate(self.labels):
            if lab == name:
                return self.vertex_of[h]
        raise KeyError(name)

    @cached_property
    def zero_names(self) -> dict:
        return {lab: self.vertex_of[h] for h, lab in enumerate(self.labels) if lab is not None}

    @property
    def n_edges(self) -> int:
        return self.n_half // 2

    @cached_property
    def genus(self) -> int:
        chi = self.n_vertices - self.n_edges + len(self.polygons)
        return (2 - chi) // 2

    @cached_property
    def area(self) -> QuadNum:
        total = QuadNum(0, 0, self.D)
        for poly in self.polygons:
            pos = Vec2(0, 0, self.D)
            for v in poly:
                total = total + pos.cross(v)
                pos = pos + v
        return total / 2

    @cached_property
    def vkeys(self) -> tuple:
        return tuple(v.key() for v in self.vecs)

    @cached_property
    def nkeys(self) -> tuple:
        return tuple((-v).key() for v in self.vecs)

    def is_convex(self) -> bool:
        for poly in self.polygons:
            n = len(poly)
            for k in range(n):
                if orient(poly[k - 1], poly[k]) <= 0:
                    return False
        return True

    def is_triangulated(self) -> bool:
        return all(len(p) == 3 for p in self.polygons)

    def corners(self, p: int) -> list[Vec2]:
        """Vertex positions of polygon ``p`` with its first vertex at 0."""
        pos = Vec2(0, 0, self.D)
        out = []
        for v in self.polygons[p]:
            out.append(pos)
            pos = pos + v
        return out

    # -- serialisation --------------------------------------------------
    def to_json(self) -> dict:
        pairs = []
        for h in range(self.n_half):
            g = self.gluing[h]
            if h < g:
                pairs.append([list(self.pos_of(h)), list(self.pos_of(g))])
        labels = {}
        for h, lab in enumerate(self.labels):
            if lab is not None and lab not in labels:
                labels[lab] = list(self.pos_of(h))
        return {
            "D": self.D,
            "polygons": [[v.to_json() for v in poly] for poly in self.polygons],
            "gluing": pairs,
            "labels": labels,
        }

    @classmethod
    def from_json(cls, data: dict) -> "TranslationSurface":
        polys = [[Vec2.from_json(v) for v in poly] for poly in data["polygons"]]
        gluing = [(tuple(a), tuple(b)) for a, b in data["gluing"]]
        labels = {k: tuple(v) for k, v in data.get("labels", {}).items()}
        return build_surface(polys, gluing, labels, D=data["D"])

    def __eq__(self, other):
        if not isinstance(other, TranslationSurface):
            return NotImplemented
        return (
            self.polygons == other.polygons
            and self.gluing == other.gluing
            and self.labels == other.labels
        )

    def __hash__(self):
        return hash((self.polygons, self.gluing, self.labels))

    def __repr__(self):
        return f"TranslationSurface(D={self.D}, polygons={len(self.polygons)}, genus={self.genus})"


# ---------------------------------------------------------------------------
# construction and validation


def _polygon_is_simple(edges: Sequence[Vec2]) -> bool:
    n = len(edges)
    pts = []
    pos = Vec2(0, 0)
    for v in edges:
        pts.append(pos)
        pos = pos + v
    if len(set(pts)) != n:
        return False
    for i in range(n):
        if edges[i].is_zero():
            return False
        a1, a2 = pts[i], pts[(i + 1) % n]
        for j in range(i + 1, n):
            b1, b2 = pts[j], pts[(j + 1) % n]
            if j == i + 1 or (i == 0 and j == n - 1):
                # adjacent edges may only share their common vertex
                if orient(edges[i], edges[j]) == 0 and edges[i].dot(edges[j]) < 0 and j == i + 1:
                    return False
                if i == 0 and j == n - 1 and orient(edges[j], edges[i]) == 0 and edges[j].dot(edges[i]) < 0:
                    return False
                continue
            if segments_intersect(a1, a2, b1, b2):
                return False
    area = QuadNum(0)
    for i in range(n):
        area = area + pts[i].cross(pts[(i + 1) % n])
    return area > 0


def _field_of(polys) -> int:
    for poly in polys:
        for v in poly:
            for c in (v.x, v.y):
                if c.b:
                    return c.D
    return 1


def make_surface(D, polygons, gluing, labels, check: bool = True) -> TranslationSurface:
    """Low-level constructor on flat half-edge data."""
    polys = tuple(
        tuple(Vec2(as_quad(v.x, D), as_quad(v.y, D)) for v in poly) for poly in polygons
    )
    s = TranslationSurface(D, polys, tuple(gluing), tuple(labels))
    if check:
        validate(s)
    return s


def validate(s: TranslationSurface, simple: bool = True) -> None:
    n = s.n_half
    if len(s.gluing) != n or len(s.labels) != n:
        raise SurfaceError("gluing and label tables must cover every half-edge")
    for poly in s.polygons:
        if len(poly) < 3:
            raise NonSimplePolygon("polygons need at least three edges")
        tot = Vec2(0, 0, s.D)
        for v in poly:
            tot = tot + v
        if not tot.is_zero():
            raise NonSimplePolygon("polygon edges do not close up")
        if simple and not _polygon_is_simple(poly):
            raise NonSimplePolygon("polygon is not simple and counterclockwise")
    for h in range(n):
        g = s.gluing[h]
        if g == h or s.gluing[g] != h:
            raise SurfaceError("gluing is not a fixed-point-free involution")
        if s.vec(g) != -s.vec(h):
            raise MismatchedEdge(f"edges {s.pos_of(h)} and {s.pos_of(g)} are not opposite")
    seen = {0}
    stack = [0]
    while stack:
        p = stack.pop()
        for k in range(len(s.polygons[p])):
            q = s.poly_of(s.gluing[s.he(p, k)])
            if q not in seen:
                seen.add(q)
                stack.append(q)
    if len(seen) != len(s.polygons):
        raise Disconnected("surface is not connected")
    for v in range(s.n_vertices):
        labs = {s.labels[h] for h in range(n) if s.vertex_of[h] == v}
        if len(labs) > 1:
            raise SurfaceError(f"vertex {v} carries conflicting labels {labs}")
    names = Counter(s.labels[s.vertex_of.index(v)] for v in range(s.n_vertices))
    for name, cnt in names.items():
        if name is not None and cnt > 1:
            raise SurfaceError(f"label {name} used on several vertices")
    total = sum(t - 1 for t in s.cone_turns)
    if total != 2 * s.genus - 2:
        raise SurfaceError("cone angles are inconsistent with the Euler characteristic")


def build_surface(polygons, gluing, zero_labels=None, D: int | None = None) -> TranslationSurface:
    """Build and validate a surface.

    ``polygons`` is a list of edge-vector lists, ``gluing`` a list of pairs
    ``((p, e), (q, f))`` and ``zero_labels`` maps a name to a corner
    ``(p, e)``, meaning the start vertex of edge ``e`` of polygon ``p``.
    """
    polys = [list(p) for p in polygons]
    if D is None:
        D = _field_of(polys)
    offsets, acc = [], 0
    for p in polys:
        offsets.append(acc)
        acc += len(p)
    glue = [-1] * acc
    for (p, e), (q, f) in gluing:
        a = offsets[p] + e
        b = offsets[q] + f
        if glue[a] >= 0 or glue[b] >= 0:
            raise SurfaceError("an edge is glued twice")
        glue[a], glue[b] = b, a
    if any(g < 0 for g in glue):
        raise SurfaceError("some edges are not glued")
    tmp = make_surface(D, polys, glue, [None] * acc, check=False)
    for poly in tmp.polygons:
        if len(poly) < 3:
            raise NonSimplePolygon("polygons need at least three edges")
    for h in range(acc):
        if tmp.vec(glue[h]) != -tmp.vec(h):
            raise MismatchedEdge(f"edges {tmp.pos_of(h)} and {tmp.pos_of(glue[h])} are not opposite")
    labels = [None] * acc
    for name, (p, e) in (zero_labels or {}).items():
        v = tmp.vertex_of[offsets[p] + e]
        for h in range(acc):
            if tmp.vertex_of[h] == v:
                if labels[h] is not None and labels[h] != name:
                    raise SurfaceError("two labels on one vertex")
                labels[h] = name
    return make_surface(D, polys, glue, labels)


def stratum(s: TranslationSurface, with_tag: bool = True) -> Stratum:
    orders = tuple(sorted(t - 1 for t in s.cone_turns if t > 1))
    tag = None
    if with_tag and orders == (2, 2):
        tag = "hyp" if _is_hyperelliptic(s) else "odd"
    return Stratum(orders, tag)


def _is_hyperelliptic(s: TranslationSurface) -> bool:
    from .homology import induced_action

    for f in translation_automorphisms(s, -1):
        if not f.is_involution():
            continue
        A = induced_action(f.surface, f)
        n = len(A)
        if all(A[i][j] == (-1 if i == j else 0) for i in range(n) for j in range(n)):
            return True
    return False


def apply_gl2(s: TranslationSurface, M) -> TranslationSurface:
    (a, b), (c, d) = M
    det = as_quad(a, s.D) * d - as_quad(b, s.D) * c
    if qn_sign(det) <= 0:
        raise NonPositiveDeterminant("GL(2) element must have positive determinant")
    polys = [[v.transform(M) for v in poly] for poly in s.polygons]
    D = s.D if s.D != 1 else _field_of(polys)
    return make_surface(D, polys, s.gluing, s.labels, check=False)


def negate(s: TranslationSurface) -> TranslationSurface:
    return apply_gl2(s, ((-1, 0), (0, -1)))


def relabel(s: TranslationSurface, rng: random.Random | None = None, perm=None, shifts=None):
    """Same surface with polygons permuted and their edge lists rotated."""
    rng = rng or random.Random(0)
    n = len(s.polygons)
    if perm is None:
        perm = list(range(n))
        rng.shuffle(perm)
    if shifts is None:
        shifts = [rng.randrange(len(s.polygons[p])) for p in range(n)]
    # new polygon i is old polygon perm[i] started at edge shifts[i]
    new_polys, old_to_new = [], {}
    offset = 0
    for i, p in enumerate(perm):
        m = len(s.polygons[p])
        new_polys.append([s.polygons[p][(k + shifts[i]) % m] for k in range(m)])
        for k in range(m):
            old_to_new[s.he(p, (k + shifts[i]) % m)] = offset + k
        offset += m
    glue = [0] * s.n_half
    labels = [None] * s.n_half
    for h in range(s.n_half):
        glue[old_to_new[h]] = old_to_new[s.gluing[h]]
        labels[old_to_new[h]] = s.labels[h]
    return make_surface(s.D, new_polys, glue, labels, check=False)


# ---------------------------------------------------------------------------
# mutable mesh with stable half-edge ids


class Mesh:
    """Mutable half-edge structure used for triangulations and surgery."""

    def __init__(self, D: int):
        self.D = D
        self.vec: dict[int, Vec2] = {}
        self.twin: dict[int, int] = {}
        self.nxt: dict[int, int] = {}
        self.prv: dict[int, int] = {}
        self.face: dict[int, int] = {}
        self.faces: dict[int, int] = {}
        self.label: dict[int, str | None] = {}
        self.chains: list[Chain] = []
        self._nid = 0
        self._nfid = 0

    @classmethod
    def from_surface(cls, s: TranslationSurface, chains: Iterable[Chain] = ()) -> "Mesh":
        m = cls(s.D)
        for p, poly in enumerate(s.polygons):
            fid = m._new_face()
            hs = [s.he(p, k) for k in range(len(poly))]
            m.faces[fid] = hs[0]
            for i, h in enumerate(hs):
                m.vec[h] = poly[i]
                m.nxt[h] = hs[(i + 1) % len(hs)]
                m.prv[h] = hs[i - 1]
                m.face[h] = fid
                m.twin[h] = s.gluing[h]
                m.label[h] = s.labels[h]
        m._nid = s.n_half
        m.chains = [dict(c) for c in chains]
        return m

    def _new_id(self) -> int:
        self._nid += 1
        return self._nid - 1

    def _new_face(self) -> int:
        self._nfid += 1
        return self._nfid - 1

    def face_edges(self, fid: int) -> list[int]:
        h0 = self.faces[fid]
        out = [h0]
        h = self.nxt[h0]
        while h != h0:
            out.append(h)
            h = self.nxt[h]
        return out

    def rot(self, h: int) -> int:
        return self.twin[self.prv[h]]

    # -- chains ---------------------------------------------------------
    def _take_edge(self, h: int) -> list[int]:
        """Remove the edge of ``h`` from every chain; return its coefficients."""
        g = self.twin[h]
        out = []
        for c in self.chains:
            out.append(c.pop(h, 0) - c.pop(g, 0))
        return out

    @staticmethod
    def _add(c: Chain, h: int, k: int) -> None:
        if k:
            val = c.get(h, 0) + k
            if val:
                c[h] = val
            else:
                c.pop(h, None)

    # -- basic operations ----------------------------------------------
    def split_face(self, a: int, b: int) -> tuple[int, int]:
        """Add a diagonal from the start of ``b`` to the start of ``a``.

        ``a`` and ``b`` are half-edges of one face; afterwards the new
        half-edge ``d`` (start of b -> start of a) bounds the face holding
        the boundary arc from ``a`` to ``prev(b)``.
        """
        fid = self.face[a]
        arc1 = [a]
        h = self.nxt[a]
        while h != b:
            arc1.append(h)
            h = self.nxt[h]
        arc2 = [b]
        h = self.nxt[b]
        while h != a:
            arc2.append(h)
            h = self.nxt[h]
        d, e = self._new_id(), self._new_id()
        tot = Vec2(0, 0, self.D)
        for x in arc1:
            tot = tot + self.vec[x]
        self.vec[e] = tot
        self.vec[d] = -tot
        self.twin[d], self.twin[e] = e, d
        self.label[d] = self.label[b]
        self.label[e] = self.label[a]
        cyc1 = arc1 + [d]
        cyc2 = arc2 + [e]
        f2 = self._new_face()
        for cyc, f in ((cyc1, fid), (cyc2, f2)):
            for i, x in enumerate(cyc):
                self.nxt[x] = cyc[(i + 1) % len(cyc)]
                self.prv[x] = cyc[i - 1]
                self.face[x] = f
            self.faces[f] = cyc[0]
        return d, e

    def triangulate_face(self, fid: int) -> None:
        while True:
            hs = self.face_edges(fid)
            n = len(hs)
            if n == 3:
                return
            pts = [Vec2(0, 0, self.D)]
            for h in hs[:-1]:
                pts.append(pts[-1] + self.vec[h])
            ear = None
            for i in range(n):
                a, b, c = pts[i - 1], pts[i], pts[(i + 1) % n]
                if orient3(a, b, c) <= 0:
                    continue
                ok = True
                for j in range(n):
                    if j in (i, (i - 1) % n, (i + 1) % n):
                        continue
                    p = pts[j]
                    if orient3(a, b, p) >= 0 and orient3(b, c, p) >= 0 and orient3(c, a, p) >= 0:
                        ok = False
                        break
                if ok:
                    ear = i
                    break
            if ear is None:
                raise NonSimplePolygon("ear clipping failed")
            # cut off the triangle (hs[ear-1], hs[ear])
            h_in = hs[ear - 1]
            h_after = hs[(ear + 1) % n]
            self.split_face(h_in, h_after)
            fid = self.face[h_after]

    def triangulate(self) -> None:
        for fid in list(self.faces):
            self.triangulate_face(fid)

    def is_triangle(self, h: int) -> bool:
        return self.nxt[self.nxt[self.nxt[h]]] == h

    def flip_ok(self, h: int) -> bool:
        g = self.twin[h]
        if not (self.is_triangle(h) and self.is_triangle(g)):
            return False
        if self.face[h] == self.face[g]:
            return False
        h1, g1 = self.nxt[h], self.nxt[g]
        # quad A, D, B, C must be strictly convex
        A = Vec2(0, 0, self.D)
        B = self.vec[h]
        C = B + self.vec[h1]
        Dp = self.vec[g1]
        return (
            orient3(A, Dp, B) > 0
            and orient3(Dp, B, C) > 0
            and orient3(B, C, A) > 0
            and orient3(C, A, Dp) > 0
        )

    def flip(self, h: int) -> None:
        g = self.twin[h]
        h1, h2 = self.nxt[h], self.prv[h]
        g1, g2 = self.nxt[g], self.prv[g]
        coeffs = self._take_edge(h)
        for c, k in zip(self.chains, coeffs):
            self._add(c, g1, k)
            self._add(c, g2, k)
        f1, f2 = self.face[h], self.face[g]
        # h becomes D -> C, g becomes C -> D
        self.vec[h] = -(self.vec[g1] + self.vec[h2])
        self.vec[g] = -self.vec[h]
        self.label[h] = self.label[g2]
        self.label[g] = self.label[h2]
        for cyc, f in (([h2, g1, h], f1), ([g2, h1, g], f2)):
            for i, x in enumerate(cyc):
                self.nxt[x] = cyc[(i + 1) % 3]
                self.prv[x] = cyc[i - 1]
                self.face[x] = f
            self.faces[f] = cyc[0]

    def edge_incircle(self, h: int) -> int:
        g = self.twin[h]
        B = self.vec[h]
        C = B + self.vec[self.nxt[h]]
        Dp = self.vec[self.nxt[g]]
        return incircle(B, C, Dp)

    def make_delaunay(self, constrained: set | None = None, max_flips: int = 100000) -> int:
        constrained = constrained or set()
        stack = [h for h in self.vec if h < self.twin[h]]
        flips = 0
        while stack:
            h = stack.pop()
            if h not in self.vec:
                continue
            if h in constrained or self.twin[h] in constrained:
                continue
            if not (self.is_triangle(h) and self.is_triangle(self.twin[h])):
                continue
            if self.edge_incircle(h) > 0:
                g = self.twin[h]
                outer = [self.nxt[h], self.prv[h], self.nxt[g], self.prv[g]]
                self.flip(h)
                flips += 1
                if flips > max_flips:
                    raise RuntimeError("Delaunay flipping did not terminate")
                stack.extend(outer)
        return flips

    def merge(self, h: int) -> None:
        """Remove the edge of ``h``, merging its two faces."""
        g = self.twin[h]
        f1, f2 = self.face[h], self.face[g]
        if f1 == f2:
            raise SurfaceError("cannot remove an edge with the same face on both sides")
        a = []
        x = self.nxt[h]
        while x != h:
            a.append(x)
            x = self.nxt[x]
        b = []
        x = self.nxt[g]
        while x != g:
            b.append(x)
            x = self.nxt[x]
        coeffs = self._take_edge(h)
        for c, k in zip(self.chains, coeffs):
            for x in a:
                self._add(c, x, -k)
        cyc = a + b
        for i, x in enumerate(cyc):
            self.nxt[x] = cyc[(i + 1) % len(cyc)]
            self.prv[x] = cyc[i - 1]
            self.face[x] = f1
        self.faces[f1] = cyc[0]
        del self.faces[f2]
        for y in (h, g):
            for table in (self.vec, self.twin, self.nxt, self.prv, self.face, self.label):
                del table[y]

    def merge_flat(self) -> None:
        flat = [
            h
            for h in self.vec
            if h < self.twin[h]
            and self.is_triangle(h)
            and self.is_triangle(self.twin[h])
            and self.edge_incircle(h) == 0
        ]
        for h in flat:
            if self.face[h] != self.face[self.twin[h]]:
                self.merge(h)

    # -- conversion -----------------------------------------------------
    def to_surface(self, check: bool = False) -> tuple[TranslationSurface, list[Chain]]:
        polys, ids = [], []
        for fid in sorted(self.faces):
            hs = self.face_edges(fid)
            ids.extend(hs)
            polys.append([self.vec[h] for h in hs])
        index = {h: i for i, h in enumerate(ids)}
        glue = [index[self.twin[h]] for h in ids]
        labels = [self.label[h] for h in ids]
        s = make_surface(self.D, polys, glue, labels, check=check)
        chains = []
        for c in self.chains:
            out: Chain = {}
            for h, k in c.items():
                i, j = index[h], index[self.twin[h]]
                if i < j:
                    Mesh._add(out, i, k)
                else:
                    Mesh._add(out, j, -k)
            chains.append(out)
        return s, chains


def normalize_chain(s: TranslationSurface, c: Chain) -> Chain:
    out: Chain = {}
    for h, k in c.items():
        g = s.gluing[h]
        if h < g:
            Mesh._add(out, h, k)
        else:
            Mesh._add(out, g, -k)
    return out


def path_chain(s: TranslationSurface, path: Iterable[int]) -> Chain:
    c: Chain = {}
    for h in path:
        Mesh._add(c, h, 1)
    return normalize_chain(s, c)


def triangulate(s: TranslationSurface, chains=()) -> TranslationSurface:
    return triangulate_with_chains(s, chains)[0]


def triangulate_with_chains(s, chains=()):
    m = Mesh.from_surface(s, chains)
    m.triangulate()
    return m.to_surface()


def delaunay(s: TranslationSurface) -> TranslationSurface:
    return delaunay_with_chains(s)[0]


def delaunay_with_chains(s, chains=()):
    m = Mesh.from_surface(s, chains)
    m.triangulate()
    m.make_delaunay()
    return m.to_surface()


def delaunay_decomposition(s: TranslationSurface) -> TranslationSurface:
    return delaunay_decomposition_with_chains(s)[0]


def delaunay_decomposition_with_chains(s, chains=()):
    m = Mesh.from_surface(s, chains)
    m.triangulate()
    m.make_delaunay()
    m.merge_flat()
    return m.to_surface()


def is_delaunay(s: TranslationSurface) -> bool:
    """Exhaustive in-circle check over every edge of a triangulation."""
    m = Mesh.from_surface(s)
    return all(m.edge_incircle(h) <= 0 for h in m.vec if m.is_triangle(h) and m.is_triangle(m.twin[h]))


# ---------------------------------------------------------------------------
# flag maps, canonical codes, isomorphisms


@dataclass(frozen=True, eq=False)
class FlagMap:
    """A half-edge bijection from ``surface`` to ``target``.

    With ``sign = +1`` edge vectors are preserved; with ``sign = -1`` they
    are negated, i.e. the map pulls the 1-form back to its negative.
    """

    surface: TranslationSurface
    perm: tuple
    sign: int = 1
    target: TranslationSurface | None = None

    def __call__(self, h: int) -> int:
        return self.perm[h]

    @property
    def codomain(self) -> TranslationSurface:
        return self.target if self.target is not None else self.surface

    def compose(self, other: "FlagMap") -> "FlagMap":
        """self after other."""
        return FlagMap(other.surface, tuple(self.perm[other.perm[h]] for h in range(len(other.perm))),
                       self.sign * other.sign, self.target)

    def is_identity(self) -> bool:
        return all(self.perm[h] == h for h in range(len(self.perm)))

    def is_involution(self) -> bool:
        return all(self.perm[self.perm[h]] == h for h in range(len(self.perm)))

    def order(self) -> int:
        k, cur = 1, self.perm
        n = len(self.perm)
        while any(cur[h] != h for h in range(n)):
            cur = tuple(self.perm[cur[h]] for h in range(n))
            k += 1
        return k

    def fixed_point_count(self) -> int:
        """Fixed points of an automorphism of a single surface."""
        s = self.surface
        n = 0
        vmap = {}
        for h in range(s.n_half):
            vmap[s.vertex_of[h]] = s.vertex_of[self.perm[h]]
        n += sum(1 for v, w in vmap.items() if v == w)
        n += sum(1 for h in range(s.n_half) if self.perm[h] == s.gluing[h] and h < s.gluing[h])
        for p in range(len(s.polygons)):
            h = s.he(p, 0)
            if s.poly_of(self.perm[h]) == p and self.sign == -1:
                n += 1
        return n

    def vertex_map(self) -> dict:
        s = self.surface
        t = self.codomain
        return {s.vertex_of[h]: t.vertex_of[self.perm[h]] for h in range(s.n_half)}

    def __eq__(self, other):
        return isinstance(other, FlagMap) and self.perm == other.perm and self.sign == other.sign

    def __hash__(self):
        return hash((self.perm, self.sign))


def propagate_map(src: TranslationSurface, dst: TranslationSurface, h: int, h2: int,
                  sign: int = 1, labels: bool = False) -> FlagMap | None:
    """Extend ``h -> h2`` to a full isomorphism, or return None."""
    if src.n_half != dst.n_half:
        return None
    skeys = src.vkeys if sign == 1 else src.nkeys
    dkeys = dst.vkeys
    m = {h: h2}
    stack = [h]
    while stack:
        a = stack.pop()
        b = m[a]
        if skeys[a] != dkeys[b]:
            return None
        if labels and src.labels[a] != dst.labels[b]:
            return None
        if len(src.polygons[src.poly_of(a)]) != len(dst.polygons[dst.poly_of(b)]):
            return None
        for fa, fb in ((src.next(a), dst.next(b)), (src.gluing[a], dst.gluing[b])):
            if fa in m:
                if m[fa] != fb:
                    return None
            else:
                m[fa] = fb
                stack.append(fa)
    if len(m) != src.n_half or len(set(m.values())) != src.n_half:
        return None
    perm = tuple(m[i] for i in range(src.n_half))
    return FlagMap(src, perm, sign, None if dst is src else dst)


def _code_from(s: TranslationSurface, h0: int, with_labels: bool) -> tuple:
    rank = {s.poly_of(h0): 0}
    entry = {s.poly_of(h0): h0}
    queue = [s.poly_of(h0)]
    out = []
    i = 0
    while i < len(queue):
        p = queue[i]
        i += 1
        h = entry[p]
        n = len(s.polygons[p])
        items = []
        for _ in range(n):
            g = s.gluing[h]
            q = s.poly_of(g)
            if q not in rank:
                rank[q] = len(queue)
                queue.append(q)
                entry[q] = g
            m = len(s.polygons[q])
            off = (s.pos_of(g)[1] - s.pos_of(entry[q])[1]) % m
            item = (s.vkeys[h], rank[q], off)
            if with_labels:
                item = item + (s.labels[h] or "",)
            items.append(item)
            h = s.next(h)
        out.append((n, tuple(items)))
    return tuple(out)


def _best_starts(s: TranslationSurface, with_labels: bool) -> tuple[tuple, list[int]]:
    def head(h):
        p = s.poly_of(h)
        n = len(s.polygons[p])
        keys = []
        g = h
        for _ in range(n):
            keys.append(s.vkeys[g] + ((s.labels[g] or "",) if with_labels else ()))
            g = s.next(g)
        return (n, tuple(keys))

    heads = [head(h) for h in range(s.n_half)]
    best = min(heads)
    cands = [h for h in range(s.n_half) if heads[h] == best]
    codes = [(_code_from(s, h, with_labels), h) for h in cands]
    code = min(c for c, _ in codes)
    return code, [h for c, h in codes if c == code]


def _field_tag(s: TranslationSurface) -> int:
    return _field_of(s.polygons)


def canonical_code(s: TranslationSurface, with_labels: bool = False) -> bytes:
    """Label-invariant (by default) canonical serialisation of ``s``."""
    dd = delaunay_decomposition(s)
    code, _ = _best_starts(dd, with_labels)
    return repr((_field_tag(dd), code)).encode()


def is_isomorphic(s1: TranslationSurface, s2: TranslationSurface,
                  respect_labels: bool | None = None) -> FlagMap | None:
    """A translation isomorphism between the Delaunay decompositions, if any."""
    if respect_labels is None:
        respect_labels = any(s1.labels) and any(s2.labels)
    d1 = delaunay_decomposition(s1)
    d2 = delaunay_decomposition(s2)
    if d1.n_half != d2.n_half or len(d1.polygons) != len(d2.polygons):
        return None
    c1, starts1 = _best_starts(d1, respect_labels)
    c2, starts2 = _best_starts(d2, respect_labels)
    if c1 != c2 or _field_tag(d1) != _field_tag(d2):
        return None
    return propagate_map(d1, d2, starts1[0], starts2[0], 1, respect_labels)


def automorphisms_of(s: TranslationSurface, sign: int = 1, labels: bool = False) -> list[FlagMap]:
    """All (anti-)automorphisms of the given cell structure itself."""
    out = []
    keys = s.vkeys if sign == 1 else s.nkeys
    h0 = 0
    for h in range(s.n_half):
        if s.vkeys[h] != keys[h0]:
            continue
        f = propagate_map(s, s, h0, h, sign, labels)
        if f is not None:
            out.append(f)
    return out


def translation_automorphisms(s: TranslationSurface, sign: int = 1, labels: bool = False) -> list[FlagMap]:
    """Automorphisms f with f*omega = sign*omega, acting on the Delaunay cells."""
    return automorphisms_of(delaunay_decomposition(s), sign, labels)


def check_flag_map(f: FlagMap) -> bool:
    """Verify that ``f`` respects polygons, gluing and (signed) edge vectors."""
    s, t = f.surface, f.codomain
    if sorted(f.perm) != list(range(t.n_half)):
        return False
    keys = s.vkeys if f.sign == 1 else s.nkeys
    for h in range(s.n_half):
        g = f.perm[h]
        if keys[h] != t.vkeys[g]:
            return False
        if f.perm[s.next(h)] != t.next(g) or f.perm[s.gluing[h]] != t.gluing[g]:
            return False
    return True
