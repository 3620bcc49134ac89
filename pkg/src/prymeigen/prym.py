"""Prototypes, prototype surfaces, real multiplication and the parity invariant."""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from functools import cached_property

from .homology import (
    PRYM_GRAM,
    PrymLattice,
    anti_invariant_lattice,
    h1_basis,
    identity,
    induced_action,
    mat_add,
    mat_mul,
    mat_scale,
    period_vector,
    trace,
    transpose,
    transport_matrix,
)
from .qfield import QuadNum, Vec2, as_quad
from .surface import (
    FlagMap,
    TranslationSurface,
    automorphisms_of,
    build_surface,
    delaunay_decomposition_with_chains,
    path_chain,
    propagate_map,
    stratum,
)

KAPPAS = ("2,2", "1,1,2")


class PrymError(ValueError):
    pass


class SlitOutOfRange(PrymError):
    pass


class EmptyLocus(PrymError):
    pass


class NotSelfAdjoint(PrymError):
    pass


class NotEigenform(PrymError):
    pass


class WrongDiscriminant(PrymError):
    pass


class InvolutionCheckFailed(PrymError):
    pass


def parse_kappa(kappa) -> str:
    if isinstance(kappa, (tuple, list)):
        kappa = ",".join(str(k) for k in kappa)
    kappa = str(kappa).replace(" ", "").replace("(", "").replace(")", "").removesuffix("odd")
    if kappa not in KAPPAS:
        raise ValueError(f"unknown stratum {kappa!r}; expected one of {KAPPAS}")
    return kappa


@dataclass(frozen=True, order=True)
class Prototype:
    w: int
    h: int
    e: int
    kappa: str = "2,2"

    def __post_init__(self):
        object.__setattr__(self, "kappa", parse_kappa(self.kappa))
        if self.w <= 0 or self.h <= 0:
            raise ValueError("prototype needs w > 0 and h > 0")
        if math.gcd(math.gcd(self.w, self.h), self.e) != 1:
            raise ValueError("prototype needs gcd(w, h, e) = 1")
        # e + sqrt(D) > 0 holds automatically since e^2 < D

    @property
    def D(self) -> int:
        return discriminant(self)

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.w, self.h, self.e)

    def with_kappa(self, kappa) -> "Prototype":
        return Prototype(self.w, self.h, self.e, kappa)


def discriminant(p: Prototype) -> int:
    return p.e * p.e + 8 * p.w * p.h


def lambda_value(p: Prototype) -> QuadNum:
    D = discriminant(p)
    return QuadNum(Fraction(p.e, 2), Fraction(1, 2), D)


def enumerate_prototypes(D: int, kappa: str = "2,2") -> list[Prototype]:
    out = []
    if D < 1:
        return out
    r = math.isqrt(D)
    for e in range(-r, r + 1):
        rest = D - e * e
        if rest <= 0 or rest % 8:
            continue
        n = rest // 8
        for w in range(1, n + 1):
            if n % w:
                continue
            h = n // w
            if math.gcd(math.gcd(w, h), e) != 1:
                continue
            out.append(Prototype(w, h, e, kappa))
    out.sort(key=lambda p: (p.w, p.h, p.e))
    return out


# ---------------------------------------------------------------------------
# prototype surfaces


def _rect(W, H) -> list[Vec2]:
    return [Vec2(W, 0), Vec2(0, H), Vec2(-W, 0), Vec2(0, -H)]


def default_slit(p: Prototype) -> QuadNum:
    lam = lambda_value(p)
    m = lam if lam < p.w else as_quad(p.w, p.D)
    return m / 2 if p.kappa == "2,2" else m / 4


def _check_slit(p: Prototype, slit: QuadNum) -> None:
    lam = lambda_value(p)
    if not (slit > 0 and slit < p.w and slit < lam):
        raise SlitOutOfRange("slit must lie strictly between 0 and min(w, lambda)")
    if p.kappa == "1,1,2" and not (slit * 2 < lam):
        raise SlitOutOfRange("for (1,1,2) twice the slit must be shorter than lambda")


@dataclass(frozen=True, eq=False)
class PrototypeSurface:
    """A prototype eigenform with its Prym involution and marked cycles."""

    prototype: Prototype
    slit: QuadNum
    surface: TranslationSurface
    tau: FlagMap
    cycles: tuple          # closed paths (a0, b0, a1, b1, a2, b2)
    sigma0: tuple          # half-edge path of the designated slit connection
    slit_paths: tuple      # paths of all slit connections (P -> Q, resp. R1 -> Q and Q -> R2)

    def __iter__(self):
        return iter((self.surface, self.tau))

    @property
    def prym_chains(self) -> list:
        s = self.surface
        a0, b0, a1, b1, a2, b2 = (path_chain(s, c) for c in self.cycles)
        add = lambda x, y: {k: x.get(k, 0) + y.get(k, 0) for k in set(x) | set(y)}
        return [a0, b0, add(a1, a2), add(b1, b2)]

    @cached_property
    def lattice(self) -> PrymLattice:
        return anti_invariant_lattice(self.surface, self.tau, preferred=self.prym_chains)

    @property
    def lam(self) -> QuadNum:
        return lambda_value(self.prototype)


def build_prototype_surface(p: Prototype, slit=None) -> PrototypeSurface:
    D = p.D
    lam = lambda_value(p)
    slit = default_slit(p) if slit is None else as_quad(slit, D)
    _check_slit(p, slit)
    if p.kappa == "2,2":
        return _build_22(p, lam, slit)
    return _build_112(p, lam, slit)


def _build_22(p: Prototype, lam: QuadNum, s: QuadNum) -> PrototypeSurface:
    D = p.D
    small = (as_quad(p.w, D), as_quad(p.h, D))
    dims = [(lam, lam), small, small]
    polys = []
    for W, H in dims:
        polys.append(_rect(s, H))
        polys.append(_rect(W - s, H))
    L = lambda j: 2 * (j % 3)
    R = lambda j: 2 * (j % 3) + 1
    gluing = []
    for j in range(3):
        gluing += [((L(j), 1), (R(j), 3)), ((R(j), 1), (L(j), 3)), ((R(j), 2), (R(j), 0)),
                   ((L(j), 2), (L(j + 1), 0))]
    surf = build_surface(polys, gluing, {"Q": (L(0), 0), "P": (L(0), 1)}, D=D)
    tau = propagate_map(surf, surf, surf.he(L(0), 0), surf.he(L(0), 2), -1)
    if tau is None:
        raise PrymError("involution propagation failed")
    he = surf.he
    cycles = []
    for j in range(3):
        cycles.append((he(L(j), 0), he(R(j), 0)))
        cycles.append((he(R(j), 1),))
    # P -> Q slit connections: the reversed bottom edge of each left cell
    slits = tuple((surf.gluing[he(L(j), 0)],) for j in range(3))
    # the slit between the two exchanged tori is the tau-invariant one
    return PrototypeSurface(p, s, surf, tau, tuple(cycles), slits[2], slits)


def _build_112(p: Prototype, lam: QuadNum, s: QuadNum) -> PrototypeSurface:
    D = p.D
    w, h = as_quad(p.w, D), as_quad(p.h, D)
    polys = [_rect(s, lam), _rect(s, lam), _rect(lam - s * 2, lam),
             _rect(s, h), _rect(w - s, h), _rect(s, h), _rect(w - s, h)]
    A, B, C, L1, R1, L2, R2 = range(7)
    gluing = [((A, 1), (B, 3)), ((B, 1), (C, 3)), ((C, 1), (A, 3)), ((C, 2), (C, 0)),
              ((A, 0), (L1, 2)), ((A, 2), (L1, 0)), ((B, 0), (L2, 2)), ((B, 2), (L2, 0))]
    for Lc, Rc in ((L1, R1), (L2, R2)):
        gluing += [((Lc, 1), (Rc, 3)), ((Rc, 1), (Lc, 3)), ((Rc, 2), (Rc, 0))]
    surf = build_surface(polys, gluing, {"R1": (A, 0), "Q": (B, 0), "R2": (C, 0)}, D=D)
    tau = propagate_map(surf, surf, surf.he(A, 0), surf.he(B, 2), -1)
    if tau is None:
        raise PrymError("involution propagation failed")
    he = surf.he
    cycles = [(he(A, 0), he(B, 0), he(C, 0)), (he(C, 1),),
              (he(L1, 0), he(R1, 0)), (he(R1, 1),),
              (he(L2, 0), he(R2, 0)), (he(R2, 1),)]
    slits = ((he(A, 0),), (he(B, 0),))
    return PrototypeSurface(p, s, surf, tau, tuple(cycles), slits[0], slits)


def figure_presentation(p: Prototype, slit=None) -> TranslationSurface:
    """Three-tori presentation with one polygon per torus (used for drawing)."""
    D = p.D
    lam = lambda_value(p)
    s = default_slit(p) if slit is None else as_quad(slit, D)
    _check_slit(p, s)
    w, h = as_quad(p.w, D), as_quad(p.h, D)
    V = Vec2
    if p.kappa == "2,2":
        polys = []
        for W, H in ((lam, lam), (w, h), (w, h)):
            polys.append([V(s, 0), V(W - s, 0), V(0, H), V(-(W - s), 0), V(-s, 0), V(0, -H)])
        gluing = []
        for j in range(3):
            gluing += [((j, 2), (j, 5)), ((j, 1), (j, 3)), (((j + 1) % 3, 0), (j, 4))]
        return build_surface(polys, gluing, {"Q": (0, 0), "P": (0, 1)}, D=D)
    polys = [
        [V(s, 0), V(s, 0), V(lam - s * 2, 0), V(0, lam), V(-(lam - s * 2), 0), V(-s, 0), V(-s, 0), V(0, -lam)],
        [V(s, 0), V(w - s, 0), V(0, h), V(-(w - s), 0), V(-s, 0), V(0, -h)],
        [V(s, 0), V(w - s, 0), V(0, h), V(-(w - s), 0), V(-s, 0), V(0, -h)],
    ]
    gluing = [((0, 3), (0, 7)), ((0, 2), (0, 4)),
              ((0, 0), (1, 4)), ((0, 6), (1, 0)), ((0, 1), (2, 4)), ((0, 5), (2, 0))]
    for j in (1, 2):
        gluing += [((j, 2), (j, 5)), ((j, 1), (j, 3))]
    return build_surface(polys, gluing, {"R1": (0, 0), "Q": (0, 1), "R2": (0, 2)}, D=D)


# ---------------------------------------------------------------------------
# real multiplication


@dataclass(frozen=True)
class RmGenerator:
    matrix: tuple
    e: int
    c: int

    @property
    def D(self) -> int:
        return self.e * self.e + 4 * self.c

    def rows(self) -> list:
        return [list(r) for r in self.matrix]

    def eigenvalue(self) -> QuadNum:
        return QuadNum(Fraction(self.e, 2), Fraction(1, 2), self.D)

    def shifted(self, k: int) -> "RmGenerator":
        """T + k Id with its minimal polynomial updated."""
        M = mat_add(self.rows(), mat_scale(identity(4), k))
        return RmGenerator(_freeze(M), self.e + 2 * k, self.c - k * self.e - k * k)

    def transposed(self) -> "RmGenerator":
        return RmGenerator(_freeze(transpose(self.rows())), self.e, self.c)


def _freeze(M) -> tuple:
    return tuple(tuple(r) for r in M)


def rm_generator(p: Prototype) -> RmGenerator:
    w, h, e = p.w, p.h, p.e
    T = [[e, 0, 2 * w, 0], [0, e, 0, 2 * h], [h, 0, 0, 0], [0, w, 0, 0]]
    return RmGenerator(_freeze(T), e, 2 * w * h)


def canonical_generator(T: RmGenerator) -> RmGenerator:
    ec = T.e % 2
    return T.shifted((ec - T.e) // 2)


@dataclass(frozen=True)
class RmReport:
    D: int
    e: int
    c: int
    eigenvalue: QuadNum
    minimal_polynomial: bool
    eigenform: bool
    self_adjoint: bool
    periods: tuple
    properness: str = "discriminant of the minimal polynomial only"

    @property
    def passed(self) -> bool:
        return self.minimal_polynomial and self.eigenform and self.self_adjoint

    def to_json(self) -> dict:
        return {
            "D": self.D,
            "e": self.e,
            "c": self.c,
            "eigenvalue": self.eigenvalue.to_json(),
            "minimal_polynomial": self.minimal_polynomial,
            "eigenform": self.eigenform,
            "self_adjoint": self.self_adjoint,
            "periods": [v.to_json() for v in self.periods],
            "properness": self.properness,
        }


def verify_real_multiplication(s: TranslationSurface, tau: FlagMap, T: RmGenerator,
                               lattice: PrymLattice | None = None, D: int | None = None) -> RmReport:
    """Check that T acts as real multiplication with s as eigenform.

    The minimal polynomial is checked first, then the eigenform identity
    v T = lambda v on the period row vector, then self-adjointness.
    """
    if lattice is None:
        lattice = anti_invariant_lattice(s, tau)
    M = T.rows()
    Dm = T.D
    lhs = mat_mul(M, M)
    rhs = mat_add(mat_scale(M, T.e), mat_scale(identity(4), T.c))
    if lhs != rhs or (D is not None and Dm != D) or Dm <= 0:
        raise WrongDiscriminant(f"matrix does not satisfy X^2 - {T.e} X - {T.c} with discriminant {D}")
    lam = T.eigenvalue()
    v = period_vector(s, lattice)
    for j in range(4):
        tot = Vec2(0, 0, s.D)
        for i in range(4):
            if M[i][j]:
                tot = tot + v[i] * M[i][j]
        if tot != v[j] * lam:
            raise NotEigenform(f"period vector is not a left eigenvector (column {j})")
    G = [list(r) for r in lattice.gram]
    if mat_mul(transpose(M), G) != mat_mul(G, M):
        raise NotSelfAdjoint("generator is not self-adjoint for the polarization")
    return RmReport(Dm, T.e, T.c, lam, True, True, True, tuple(v))


# ---------------------------------------------------------------------------
# parity invariant and classification


def _f2_rank(vectors: list) -> int:
    rows = [int("".join(str(x & 1) for x in v), 2) for v in vectors]
    rank = 0
    basis = []
    for r in rows:
        for b in basis:
            r = min(r, r ^ b)
        if r:
            basis.append(r)
            rank += 1
    return rank


def f2_column_space(M) -> list:
    """A basis of the column space of M over F2 (as integer 0/1 vectors)."""
    cols = [[M[i][j] & 1 for i in range(len(M))] for j in range(len(M[0]))]
    basis = []
    for c in cols:
        if _f2_rank(basis + [c]) > len(basis):
            basis.append(c)
    return basis


def form_parity(M, gram=PRYM_GRAM) -> int:
    """1 if the form is nonzero mod 2 on the F2 column space of M, else 0."""
    R = f2_column_space(M)
    for x in R:
        for y in R:
            val = sum(x[i] * gram[i][j] * y[j] for i in range(4) for j in range(4))
            if val % 2:
                return 1
    return 0


@dataclass(frozen=True)
class ComponentClass:
    disc: int
    parity: int | None
    raw_parity: int


def component_invariant(p: Prototype) -> ComponentClass:
    Tc = canonical_generator(rm_generator(p))
    par = form_parity(Tc.rows())
    D = p.D
    return ComponentClass(D, par if D % 2 else None, par)


def expected_class_count(D: int) -> int:
    if D % 8 == 1:
        return 2
    if D % 8 in (0, 4):
        return 1
    return 0


@dataclass
class Classification:
    D: int
    classes: list          # [(parity, [prototypes])]
    diagnostics: dict = field(default_factory=dict)

    @property
    def expected(self) -> int:
        return expected_class_count(self.D)

    @property
    def ok(self) -> bool:
        return len(self.classes) == self.expected

    def to_json(self) -> dict:
        return {
            "D": self.D,
            "classes": [
                {"parity": par, "prototypes": [list(p.triple) for p in protos]}
                for par, protos in self.classes
            ],
            "kappa": list(KAPPAS),
            "expected_classes": self.expected,
            "status": "ok" if self.ok else "FAILURE",
            "raw_parity": {f"{p.w},{p.h},{p.e}": r for p, r in self.diagnostics.items()},
        }


def classify_components(D: int) -> Classification:
    protos = enumerate_prototypes(D)
    if not protos:
        raise EmptyLocus(f"no prototypes of discriminant {D}")
    groups: dict = {}
    diag = {}
    for p in protos:
        cls = component_invariant(p)
        diag[p] = cls.raw_parity
        groups.setdefault(cls.parity, []).append(p)
    classes = sorted(groups.items(), key=lambda kv: (kv[0] is None, kv[0] if kv[0] is not None else 0))
    return Classification(D, classes, diag)


# ---------------------------------------------------------------------------
# Prym involutions


@dataclass
class InvolutionCensus:
    surface: TranslationSurface
    involutions: list
    composite_orders: list
    quotient_genera: list
    stratum: str


def _fixed_vertices(f: FlagMap) -> int:
    return sum(1 for v, w in f.vertex_map().items() if v == w)


def involution_census(s: TranslationSurface) -> InvolutionCensus:
    from .surface import delaunay_decomposition

    dd = delaunay_decomposition(s)
    invs = []
    for f in automorphisms_of(dd, -1):
        if not f.is_involution():
            continue
        if trace(induced_action(dd, f)) == -2:
            invs.append(f)
    orders, genera = [], []
    for i in range(len(invs)):
        for j in range(i + 1, len(invs)):
            rho = invs[i].compose(invs[j])
            k = rho.order()
            orders.append(k)
            # Riemann-Hurwitz for the cyclic group generated by rho
            g = dd.genus
            if k > 1:
                ram = _fixed_vertices(rho) * (k - 1)
                gq = ((2 * g - 2 - ram) // k + 2) // 2
            else:
                gq = g
            genera.append(gq)
    return InvolutionCensus(dd, invs, orders, genera, str(stratum(dd, with_tag=False)))


def find_prym_involutions(s: TranslationSurface) -> list[FlagMap]:
    """Involutions with f*omega = -omega and H1-trace -2 (on the Delaunay cells)."""
    c = involution_census(s)
    if len(c.involutions) >= 2:
        if any(k != 3 for k in c.composite_orders) or any(g != 1 for g in c.quotient_genera):
            raise InvolutionCheckFailed("composites of Prym involutions must have order 3 with torus quotient")
        if c.stratum != "H(2,2)":
            raise InvolutionCheckFailed("several Prym involutions only occur in H(2,2)")
    return c.involutions


def transported_action(ps: PrototypeSurface):
    """Constructor involution expressed on the Delaunay cells' homology."""
    s = ps.surface
    H = h1_basis(s)
    dd, chains = delaunay_decomposition_with_chains(s, H.chains)
    Hd = h1_basis(dd)
    Phi = transport_matrix(H, Hd, chains)
    A = induced_action(s, ps.tau)
    return dd, Phi, A


def matches_constructor(ps: PrototypeSurface, f: FlagMap) -> bool:
    """Whether a found involution equals the constructor's up to a translation automorphism."""
    dd, Phi, A = transported_action(ps)
    B = induced_action(dd, f)
    target = mat_mul(mat_mul(Phi, A), _inverse_unimodular(Phi))
    for g in automorphisms_of(dd, 1):
        Ag = induced_action(dd, g)
        conj = mat_mul(mat_mul(Ag, B), _inverse_unimodular(Ag))
        if conj == target:
            return True
    return False


def _inverse_unimodular(M):
    n = len(M)
    aug = [[Fraction(x) for x in M[i]] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for c in range(n):
        piv = next(r for r in range(c, n) if aug[r][c] != 0)
        aug[c], aug[piv] = aug[piv], aug[c]
        pv = aug[c][c]
        aug[c] = [x / pv for x in aug[c]]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[c])]
    inv = [[aug[i][n + j] for j in range(n)] for i in range(n)]
    if any(x.denominator != 1 for r in inv for x in r):
        raise ValueError("matrix is not unimodular")
    return [[int(x) for x in r] for r in inv]


# ---------------------------------------------------------------------------
# one-stop verification used by tests and the CLI


@dataclass
class PrototypeCheck:
    prototype: Prototype
    stratum: str
    tau_involution: bool
    tau_anti: bool
    tau_trace: int
    tau_fixed_points: int
    gram: list
    rm: RmReport

    @property
    def passed(self) -> bool:
        expected = "H(2,2)" if self.prototype.kappa == "2,2" else "H(1,1,2)"
        return (
            self.stratum == expected
            and self.tau_involution
            and self.tau_anti
            and self.tau_trace == -2
            and self.tau_fixed_points == 4
            and [tuple(r) for r in self.gram] == [tuple(r) for r in PRYM_GRAM]
            and self.rm.passed
        )


def check_prototype(p: Prototype, slit=None) -> PrototypeCheck:
    ps = build_prototype_surface(p, slit)
    s, tau = ps.surface, ps.tau
    A = induced_action(s, tau)
    lat = ps.lattice
    rm = verify_real_multiplication(s, tau, rm_generator(p), lattice=lat, D=p.D)
    return PrototypeCheck(
        p,
        str(stratum(s, with_tag=False)),
        tau.is_involution(),
        tau.sign == -1,
        trace(A),
        tau.fixed_point_count(),
        lat.gram,
        rm,
    )
