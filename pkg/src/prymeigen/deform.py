"""Kernel-foliation (Rel) moves, collapsing zeros, and breaking up a zero.

All operations work on a mutable triangulation whose vertices are
translated along straight lines.  A sub-step is taken only when every
triangle stays positively oriented for the whole sub-step; otherwise the
triangulation is made Delaunay and the step halved.  Homology chains are
carried through every flip, so Prym involutions and lattice bases can be
re-identified on the result.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .geodesics import (
    SaddleConnection,
    _inverse2,
    _rotation_to_horizontal,
    _squeeze,
    check_convention,
    image_connection,
    is_admissible,
    saddle_connections,
    transport_involution,
)
from .homology import chain_holonomy, h1_basis
from .qfield import QuadNum, Vec2, orient, qn_sign
from .surface import (
    FlagMap,
    Mesh,
    TranslationSurface,
    apply_gl2,
    build_surface,
    delaunay_decomposition_with_chains,
    delaunay_with_chains,
    stratum,
)


class DeformError(ValueError):
    pass


class CollisionDuringMove(DeformError):
    pass


class NotAdmissible(DeformError):
    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class ParallelObstruction(DeformError):
    pass


class VectorTooLarge(DeformError):
    pass


@dataclass(frozen=True)
class RelMove:
    v: Vec2
    plan: tuple  # ((zero label, displacement), ...)

    def displacement(self, label) -> Vec2 | None:
        for name, d in self.plan:
            if name == label:
                return d
        return None

    def change(self, start, end) -> Vec2:
        """Holonomy change of a connection from zero ``start`` to zero ``end``."""
        zero = Vec2(0, 0, self.v.D)
        a = self.displacement(start) or zero
        b = self.displacement(end) or zero
        return b - a


def displacement_plan(s: TranslationSurface, v: Vec2) -> RelMove:
    """Zero displacements realizing the Rel move by v.

    In H(2,2), P -> Q connections gain v; in H(1,1,2), R1 -> Q gains v and
    R1 -> R2 gains 2v with Q fixed.
    """
    orders = stratum(s, with_tag=False).orders
    if orders == (2, 2):
        return RelMove(v, (("P", -v / 2), ("Q", v / 2)))
    if orders == (1, 1, 2):
        return RelMove(v, (("R1", -v), ("Q", v * 0), ("R2", v)))
    raise DeformError(f"no Rel convention for {stratum(s, with_tag=False)}")


@dataclass
class Deformed:
    surface: TranslationSurface
    tau: FlagMap | None
    chains: list


# ---------------------------------------------------------------------------
# vertex translation on a mesh


def _face_safe(A0: QuadNum, B: QuadNum, C: QuadNum, may_vanish: bool) -> bool:
    """Whether A0 + B t + C t^2 stays positive on (0, 1) (and at 1 unless may_vanish)."""
    end = A0 + B + C
    s_end = qn_sign(end)
    if s_end < 0 or (s_end == 0 and not may_vanish):
        return False
    if qn_sign(C) > 0 and qn_sign(B) < 0 and qn_sign(B + C * 2) > 0:
        return qn_sign(A0 * C * 4 - B * B) > 0
    return True


class _Mover:
    def __init__(self, m: Mesh, plan: dict, constrained=frozenset(), collapsing=frozenset()):
        self.m = m
        self.plan = plan
        self.constrained = set(constrained)
        self.collapsing = set(collapsing)
        self.zero = Vec2(0, 0, m.D)

    def delta(self, h: int) -> Vec2:
        m = self.m
        return self.plan.get(m.label[m.twin[h]], self.zero) - self.plan.get(m.label[h], self.zero)

    def safe(self, step, last: bool) -> bool:
        m = self.m
        seen = set()
        for h in list(m.vec):
            f = m.face[h]
            if f in seen:
                continue
            seen.add(f)
            h1 = m.faces[f]
            h2 = m.nxt[h1]
            h3 = m.nxt[h2]
            d1, d2 = self.delta(h1) * step, self.delta(h2) * step
            if d1.is_zero() and d2.is_zero():
                continue
            e1, e2 = m.vec[h1], m.vec[h2]
            vanish = last and any(x in self.collapsing or m.twin[x] in self.collapsing for x in (h1, h2, h3))
            if not _face_safe(e1.cross(e2), e1.cross(d2) + d1.cross(e2), d1.cross(d2), vanish):
                return False
        return True

    def apply(self, step) -> None:
        m = self.m
        new = {h: m.vec[h] + self.delta(h) * step for h in m.vec}
        m.vec.update(new)

    def run(self, max_halvings: int = 40, max_steps: int = 5000, initial_delaunay: bool = True) -> None:
        done = Fraction(0)
        step = Fraction(1)
        halvings = 0
        steps = 0
        if initial_delaunay:
            self.m.make_delaunay(self.constrained)
        while done < 1:
            step = min(step, 1 - done)
            last = done + step == 1
            if self.safe(step, last):
                self.apply(step)
                done += step
                steps += 1
                if steps > max_steps:
                    raise CollisionDuringMove("move needed too many sub-steps")
                if done < 1:
                    self.m.make_delaunay(self.constrained)
                step *= 2
                halvings = 0
            else:
                step /= 2
                halvings += 1
                if halvings > max_halvings:
                    raise CollisionDuringMove("a zero runs into another zero during the move")


def _mesh_of(s: TranslationSurface, chains) -> Mesh:
    t, ch = delaunay_with_chains(s, chains)
    return Mesh.from_surface(t, ch)


def _finish(m: Mesh, src: TranslationSurface, tau: FlagMap | None, n_user: int, back=None):
    """Convert a mesh back to a surface and re-identify the involution."""
    t, ch = m.to_surface()
    if back is not None:
        t = apply_gl2(t, back)
    dd, ch = delaunay_decomposition_with_chains(t, ch)
    H = h1_basis(src)
    basis_chains, user = ch[: H.dim], ch[H.dim:]
    new_tau = None
    if tau is not None:
        new_tau = transport_involution(src, tau, dd, basis_chains)
        if new_tau is None:
            raise DeformError("the Prym involution did not survive the deformation")
    return Deformed(dd, new_tau, user[:n_user]), basis_chains


def _collision_precheck(s: TranslationSurface, move: RelMove) -> None:
    """Refuse moves along which a connection between distinct zeros shrinks to zero."""
    bound = QuadNum(0, 0, s.D)
    names = [n for n, _ in move.plan]
    for a in names:
        for b in names:
            c = move.change(a, b).norm2()
            if c > bound:
                bound = c
    if qn_sign(bound) == 0:
        return
    dd, _ = delaunay_decomposition_with_chains(s)
    for sc in saddle_connections(dd, bound, squared=True):
        if sc.start == sc.end:
            continue
        d = move.change(sc.start, sc.end)
        # hol + t d = 0 for some t in (0, 1]
        if orient(sc.holonomy, d) == 0 and qn_sign(sc.holonomy.dot(d)) < 0 and sc.holonomy.norm2() <= d.norm2():
            raise CollisionDuringMove(f"{sc.start} runs into {sc.end} along {sc.holonomy}")


def rel_transport(s: TranslationSurface, v, tau: FlagMap | None = None, chains=(), move: RelMove | None = None) -> Deformed:
    """Rel move by v carrying the involution and arbitrary chains along."""
    v = v if isinstance(v, Vec2) else Vec2(v[0], v[1], s.D)
    move = move or displacement_plan(s, v)
    if v.is_zero():
        return Deformed(s, tau, [dict(c) for c in chains])
    _collision_precheck(s, move)
    H = h1_basis(s)
    chains = list(chains)
    m = _mesh_of(s, H.chains + chains)
    mover = _Mover(m, dict(move.plan))
    mover.run()
    out, basis_chains = _finish(m, s, tau, len(chains))
    for c, c2 in zip(H.chains, basis_chains):
        if chain_holonomy(s, c) != chain_holonomy(out.surface, c2):
            raise DeformError("absolute periods changed")
    return out


def rel_move(s: TranslationSurface, tau: FlagMap | None, v) -> TranslationSurface:
    return rel_transport(s, v, tau).surface


def rel_move_with_involution(s: TranslationSurface, tau: FlagMap, v) -> tuple[TranslationSurface, FlagMap]:
    out = rel_transport(s, v, tau)
    return out.surface, out.tau


# ---------------------------------------------------------------------------
# collapse


def _partners(s: TranslationSurface, sigma0: SaddleConnection, kind: str, tau: FlagMap | None, cands) -> list:
    """Connections that collapse together with sigma0."""
    if kind == "2,2":
        return []
    v = sigma0.holonomy
    if tau is not None:
        img = image_connection(tau, sigma0)  # R2 -> Q with holonomy -v
        return [c for c in cands if c.start == "Q" and c.end == "R2" and c.holonomy == v and c.end_key == img.start_key]
    return [c for c in cands if c.start == "Q" and c.end == "R2" and c.holonomy == v]


def _parallel_check(s, sigma0, partners, cands) -> None:
    keep = {sigma0.ident()} | {p.ident() for p in partners}
    keep |= {(c.end_key, (-c.holonomy).key()) for c in [sigma0, *partners]}
    v = sigma0.holonomy
    for c in cands:
        if c.ident() in keep or c.start == c.end:
            continue
        if orient(c.holonomy, v) == 0:
            raise ParallelObstruction(f"parallel connection {c.start}->{c.end} with holonomy {c.holonomy}")


def _edges_for(s: TranslationSurface, wanted: list, chains, max_rounds: int = 40):
    """Triangulate a squeezed copy of s so that the wanted connections are edges.

    ``wanted`` holds (start label, end label, holonomy) triples, each
    realized by exactly one connection.  Returns the mesh, the matrix
    taking original coordinates to mesh coordinates, and the edge ids.
    """
    v = wanted[0][2]
    R = _rotation_to_horizontal(v)
    K = 1
    for _ in range(max_rounds):
        Sq = _squeeze(K)
        g = ((R[0][0] * Sq[0][0], R[0][1] * Sq[0][0]), (R[1][0] * Sq[1][1], R[1][1] * Sq[1][1]))
        t, ch = delaunay_with_chains(apply_gl2(s, g), chains)
        found = []
        for a, b, w in wanted:
            target = w.transform(g)
            hs = [h for h in range(t.n_half) if t.vec(h) == target and t.labels[h] == a and t.labels[t.next(h)] == b]
            if len(hs) != 1:
                break
            found.append(hs[0])
        if len(found) == len(wanted):
            m = Mesh.from_surface(t, ch)
            return m, g, found
        K *= 2
    raise DeformError("could not realize the connection as a triangulation edge")


def _contract(m: Mesh, edges: list, merged_label: str) -> None:
    """Remove zero-length edges and the degenerate triangles next to them."""
    old = set()
    for h in edges:
        old.add(m.label[h])
        old.add(m.label[m.twin[h]])
    for h in edges:
        if not m.vec[h].is_zero():
            raise DeformError("collapsing edge did not shrink to zero")
        g = m.twin[h]
        m._take_edge(h)
        for side in (h, g):
            x, y = m.nxt[side], m.prv[side]
            kx = m._take_edge(x)
            ky = m._take_edge(y)
            tx, ty = m.twin[x], m.twin[y]
            if tx in (x, y) or ty in (x, y):
                raise DeformError("degenerate collapse")
            for c, a, b in zip(m.chains, kx, ky):
                Mesh._add(c, tx, b - a)
            m.twin[tx], m.twin[ty] = ty, tx
            f = m.face[side]
            del m.faces[f]
            for z in (x, y):
                for table in (m.vec, m.twin, m.nxt, m.prv, m.face, m.label):
                    del table[z]
        for z in (h, g):
            for table in (m.vec, m.twin, m.nxt, m.prv, m.face, m.label):
                del table[z]
    for z in m.label:
        if m.label[z] in old:
            m.label[z] = merged_label


def collapse_transport(s: TranslationSurface, tau: FlagMap | None, sigma0: SaddleConnection, chains=(),
                       merged_label: str = "O") -> Deformed:
    kind = check_convention(s, sigma0, tau)
    adm = is_admissible(s, sigma0, tau)
    if not adm:
        raise NotAdmissible(f"{sigma0} is not admissible", adm.certificate)
    v = sigma0.holonomy
    cands = saddle_connections(s, v.norm2() * 4, squared=True)
    partners = _partners(s, sigma0, kind, tau, cands)
    if kind == "1,1,2" and len(partners) != 1:
        raise ParallelObstruction("the involution image of sigma0 is not a unique Q -> R2 connection")
    _parallel_check(s, sigma0, partners, cands)
    wanted = [(sigma0.start, sigma0.end, v)] + [(p.start, p.end, p.holonomy) for p in partners]
    H = h1_basis(s)
    chains = list(chains)
    m, g, edges = _edges_for(s, wanted, H.chains + chains)
    move = displacement_plan(s, -v)
    plan = {name: d.transform(g) for name, d in move.plan}
    mover = _Mover(m, plan, constrained=set(edges), collapsing=set(edges))
    mover.run()
    _contract(m, edges, merged_label)
    out, _ = _finish(m, s, tau, len(chains), back=_inverse2(g, s.D))
    if stratum(out.surface, with_tag=False).orders != (4,):
        raise DeformError(f"collapse produced {stratum(out.surface, with_tag=False)}")
    return out


def collapse(s: TranslationSurface, tau: FlagMap | None, sigma0: SaddleConnection) -> TranslationSurface:
    return collapse_transport(s, tau, sigma0).surface


# ---------------------------------------------------------------------------
# breaking up a zero


def _star(m: Mesh, h0: int) -> list[int]:
    out = [h0]
    h = m.rot(h0)
    while h != h0:
        out.append(h)
        h = m.rot(h)
    return out


def _rays(m: Mesh, star: list[int], v: Vec2) -> list:
    """Rays in direction v around a vertex, in counterclockwise order.

    Each entry is (i, on_edge): the ray lies in the corner between star[i]
    and star[i+1], or along star[i] itself when on_edge.
    """
    out = []
    n = len(star)
    for i in range(n):
        a = m.vec[star[i]]
        b = m.vec[star[(i + 1) % n]]
        if orient(a, v) == 0 and qn_sign(a.dot(v)) > 0:
            out.append((i, True))
        elif orient(a, v) > 0 and orient(v, b) > 0:
            out.append((i, False))
    return out


def _boundary_fix(m: Mesh, e: int, start_label: str) -> None:
    """Make every chain closed again after a vertex split by adding multiples of e."""
    for c in m.chains:
        k = 0
        for h, coef in c.items():
            if m.label[m.twin[h]] == start_label:
                k += coef
            if m.label[h] == start_label:
                k -= coef
        # boundary at the start vertex is k; e contributes -1 there
        Mesh._add(c, e, k)


def _split_vertex(m: Mesh, h0: int, v: Vec2, turns: int, start_label: str, end_label: str, ray: int) -> int | None:
    """Split the vertex of h0 into two joined by a zero-length edge pointing along v.

    The start vertex receives the cone sector of ``turns`` full turns
    beginning at the chosen ray.  Returns the new edge, or None when the
    chosen rays run along edges.
    """
    star = _star(m, h0)
    rays = _rays(m, star, v)
    n = len(star)
    ra = rays[ray % len(rays)]
    rb = rays[(ray + turns) % len(rays)]
    if ra[1] or rb[1]:
        return None
    i1 = (ra[0] + 1) % n
    f1 = star[i1]
    f2 = star[rb[0]]
    if f1 == f2 or m.twin[f1] == f2:
        return None
    p_side = []
    i = i1
    while star[i] != f2:
        p_side.append(star[i])
        i = (i + 1) % n
    g1, g2 = m.twin[f1], m.twin[f2]
    for h in star:
        m.label[h] = start_label if h in p_side else end_label
    zero = Vec2(0, 0, m.D)
    e, te, x, y, x2, y2 = (m._new_id() for _ in range(6))
    m.vec[e], m.vec[te] = zero, zero
    m.twin[e], m.twin[te] = te, e
    m.label[e], m.label[te] = start_label, end_label
    # left triangle (e, x, y): f1 now pairs with y, g1 with x
    m.vec[x], m.vec[y] = m.vec[f1], -m.vec[f1]
    m.label[x], m.label[y] = end_label, m.label[g1]
    m.twin[y], m.twin[f1] = f1, y
    m.twin[x], m.twin[g1] = g1, x
    # right triangle (te, x2, y2): g2 pairs with x2, f2 with y2
    m.vec[x2], m.vec[y2] = m.vec[f2], -m.vec[f2]
    m.label[x2], m.label[y2] = start_label, m.label[g2]
    m.twin[x2], m.twin[g2] = g2, x2
    m.twin[y2], m.twin[f2] = f2, y2
    for cyc in ((e, x, y), (te, x2, y2)):
        fid = m._new_face()
        m.faces[fid] = cyc[0]
        for k, z in enumerate(cyc):
            m.nxt[z] = cyc[(k + 1) % 3]
            m.prv[z] = cyc[k - 1]
            m.face[z] = fid
    _boundary_fix(m, e, start_label)
    return e


def _min_norm(t: TranslationSurface) -> QuadNum:
    best = None
    for v in t.vecs:
        n = v.norm2()
        if best is None or n < best:
            best = n
    return best


def _generic_direction(t: TranslationSurface, v: Vec2) -> Vec2:
    """v itself, or a nearby vector that is not parallel to any edge."""
    k = 0
    while True:
        w = v if k == 0 else v + Vec2(-v.y, v.x) / (k + 2)
        if all(orient(w, d) != 0 for d in t.vecs):
            return w
        k += 1


def break_up_zero(s4: TranslationSurface, v, split: str = "2,2", tau: FlagMap | None = None) -> TranslationSurface:
    return break_up_transport(s4, v, split, tau).surface


def break_up_transport(s4: TranslationSurface, v, split: str = "2,2", tau: FlagMap | None = None,
                       chains=()) -> Deformed:
    """Split the order-4 zero into P, Q (or R1, Q, R2) joined by holonomy v."""
    v = v if isinstance(v, Vec2) else Vec2(v[0], v[1], s4.D)
    if stratum(s4, with_tag=False).orders != (4,):
        raise DeformError("break_up_zero needs a surface in H(4)")
    if split not in ("2,2", "1,1,2"):
        raise ValueError("split must be '2,2' or '1,1,2'")
    if v.is_zero():
        raise VectorTooLarge("v must be nonzero")
    t0 = delaunay_with_chains(s4)[0]
    if v.norm2() * 4 >= _min_norm(t0):
        raise VectorTooLarge("|v| must be below half the shortest saddle connection")
    H = h1_basis(s4)
    all_chains = H.chains + list(chains)
    for ray in range(5):
        for ray2 in range(4 if split == "1,1,2" else 1):
            out = _try_split(s4, v, split, ray, ray2, all_chains, tau, H.dim)
            if out is not None:
                return out
    raise DeformError("no split compatible with the involution was found")


def _grow(m: Mesh, plan: dict) -> bool:
    mover = _Mover(m, plan)
    try:
        mover.run(initial_delaunay=False)
    except CollisionDuringMove:
        return False
    return True


def _try_split(s4, v, split, ray, ray2, chains, tau, dim):
    t, ch = delaunay_with_chains(s4, chains)
    w = _generic_direction(t, v)
    h0 = next(h for h in range(t.n_half) if t.cone_turns[t.vertex_of[h]] == 5)
    m = Mesh.from_surface(t, ch)
    if split == "2,2":
        e = _split_vertex(m, h0, w, 3, "P", "Q", ray)
        if e is None or not _grow(m, {"P": -w / 2, "Q": w / 2}):
            return None
    else:
        e = _split_vertex(m, h0, w, 2, "R1", "Q", ray)
        if e is None or not _grow(m, {"R1": -w}):
            return None
        m.make_delaunay()
        hq = next(h for h in m.vec if m.label[h] == "Q")
        e2 = _split_vertex(m, hq, w, 3, "Q", "R2", ray2)
        if e2 is None or not _grow(m, {"R2": w}):
            return None
    s_mid, ch_mid = m.to_surface(check=True)
    dd, ch_dd = delaunay_decomposition_with_chains(s_mid, ch_mid)
    expected = (2, 2) if split == "2,2" else (1, 1, 2)
    if stratum(dd, with_tag=False).orders != expected:
        return None
    new_tau = None
    if tau is not None:
        new_tau = transport_involution(s4, tau, dd, ch_dd[:dim])
        if new_tau is None:
            return None
    mid = Deformed(dd, new_tau, ch_dd[dim:])
    if w == v:
        return mid
    return rel_transport(dd, v - w, new_tau, mid.chains)


# ---------------------------------------------------------------------------
# fixtures


def origami(right: list[int], up: list[int], zero_name: str = "O") -> TranslationSurface:
    """Square-tiled surface: square i is glued right to right[i] and up to up[i]."""
    n = len(right)
    sq = [[Vec2(1, 0), Vec2(0, 1), Vec2(-1, 0), Vec2(0, -1)] for _ in range(n)]
    gluing = []
    for i in range(n):
        gluing.append(((i, 1), (right[i], 3)))
        gluing.append(((i, 2), (up[i], 0)))
    tmp = build_surface(sq, gluing, {}, D=1)
    labels = {}
    k = 0
    for vtx, turns in enumerate(tmp.cone_turns):
        if turns > 1:
            h = tmp.vertex_of.index(vtx)
            p, e = tmp.pos_of(h)
            name = zero_name if k == 0 else f"{zero_name}{k}"
            labels[name] = (p, e)
            k += 1
    return build_surface(sq, gluing, labels, D=1)


H4_ORIGAMI = ([1, 2, 3, 4, 0], [0, 2, 4, 1, 3])


def h4_origami() -> TranslationSurface:
    return origami(*H4_ORIGAMI)
