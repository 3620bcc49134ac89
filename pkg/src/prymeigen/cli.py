"""Command line interface.

Every command prints a short text summary, or with ``--json`` a report
object with sorted keys: {"command", "inputs", "results", "version", "field"}.
Exit codes: 0 success, 1 failed assertion or verification, 2 usage error.
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import click

from . import __version__
from .deform import DeformError, collapse_transport, rel_transport
from .geodesics import (
    GeodesicError,
    check_convention,
    cylinder_decomposition,
    saddle_connections,
)
from .prym import (
    EmptyLocus,
    Prototype,
    build_prototype_surface,
    classify_components,
    component_invariant,
    enumerate_prototypes,
    expected_class_count,
    figure_presentation,
    find_prym_involutions,
    involution_census,
    matches_constructor,
)
from .qfield import QuadNum, Vec2, as_quad
from .surface import FlagMap, TranslationSurface, apply_gl2, is_isomorphic, stratum


class StepFailed(RuntimeError):
    def __init__(self, index: int, error: Exception):
        super().__init__(f"step {index} failed: {type(error).__name__}: {error}")
        self.index = index
        self.error = error


class AssertionFailed(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# parsing


def parse_scalar(x, D: int = 1) -> QuadNum:
    if isinstance(x, dict):
        return QuadNum.from_json(x)
    if isinstance(x, QuadNum):
        return x
    return as_quad(Fraction(str(x).strip()), D)


def parse_vec(x, D: int = 1) -> Vec2:
    if isinstance(x, str):
        x = x.split(",")
    if len(x) != 2:
        raise ValueError(f"expected two coordinates, got {x!r}")
    return Vec2(parse_scalar(x[0], D), parse_scalar(x[1], D))


def parse_matrix(m, D: int = 1):
    return tuple(tuple(parse_scalar(e, D) for e in row) for row in m)


def parse_range(a: int, b: int) -> range:
    if a < 8 or b < a:
        raise click.UsageError(f"need 8 <= FROM <= TO, got {a}..{b}")
    return range(a, b + 1)


# ---------------------------------------------------------------------------
# reports


def _jsonable(x):
    if isinstance(x, (QuadNum, Vec2, TranslationSurface)):
        return x.to_json()
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


@dataclass
class Report:
    command: str
    inputs: dict
    results: object
    field: int | None = None
    ok: bool = True
    messages: list = dc_field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "inputs": _jsonable(self.inputs),
            "results": _jsonable(self.results),
            "version": __version__,
            "field": self.field,
            "ok": self.ok,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _emit(ctx_json: bool, report: Report) -> None:
    if ctx_json:
        click.echo(report.dumps())
    else:
        for line in report.messages:
            click.echo(line)
    if not report.ok:
        sys.exit(1)


# ---------------------------------------------------------------------------
# surface input


@dataclass
class Loaded:
    surface: TranslationSurface
    tau: FlagMap | None
    prototype: Prototype | None = None
    slit: QuadNum | None = None
    source: dict = dc_field(default_factory=dict)


def load_prototype(w: int, h: int, e: int, kappa: str, slit=None) -> Loaded:
    p = Prototype(w, h, e, kappa)
    sl = None if slit is None else parse_scalar(slit, p.D)
    ps = build_prototype_surface(p, sl)
    src = {"prototype": {"w": w, "h": h, "e": e, "kappa": p.kappa}, "slit": str(ps.slit)}
    return Loaded(ps.surface, ps.tau, p, ps.slit, src)


def load_entry(entry: dict) -> Loaded:
    """Surface from a script entry: {"prototype": {...}, "slit": ...} or {"surface": {...}}."""
    if "prototype" in entry:
        p = entry["prototype"]
        return load_prototype(p["w"], p["h"], p["e"], p.get("kappa", "2,2"), entry.get("slit"))
    s = TranslationSurface.from_json(entry["surface"])
    taus = find_prym_involutions(s) if s.genus == 3 else []
    if taus:
        from .surface import delaunay_decomposition

        s = delaunay_decomposition(s)
    return Loaded(s, taus[0] if taus else None, source={"surface": "inline"})


def surface_options(f):
    opts = [
        click.option("--surface", "surface_path", type=click.Path(dir_okay=False, allow_dash=True),
                     help="surface JSON file ('-' for stdin)"),
        click.option("--kappa", default=None, help="prototype stratum: 2,2 or 1,1,2"),
        click.option("--w", type=int, default=None),
        click.option("--h", type=int, default=None),
        click.option("--e", type=int, default=None),
        click.option("--slit", default=None, help="slit length a/b"),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def resolve_surface(surface_path, kappa, w, h, e, slit) -> Loaded:
    if surface_path:
        text = sys.stdin.read() if surface_path == "-" else Path(surface_path).read_text()
        out = load_entry({"surface": json.loads(text)})
        out.source = {"surface": surface_path}
        return out
    if None in (w, h, e):
        raise click.UsageError("give --surface FILE or a prototype via --w --h --e [--kappa] [--slit]")
    try:
        return load_prototype(w, h, e, kappa or "2,2", slit)
    except ValueError as exc:
        raise click.UsageError(str(exc))


# ---------------------------------------------------------------------------
# script replay


def bundled_script(name: str) -> dict:
    return json.loads(resources.files("prymeigen").joinpath("data", f"{name}.json").read_text())


def convention_connections(s: TranslationSurface, tau: FlagMap | None, bound2) -> list:
    out = []
    for sc in saddle_connections(s, bound2, squared=True):
        try:
            check_convention(s, sc, tau)
        except GeodesicError:
            continue
        out.append(sc)
    out.sort(key=lambda c: (c.length2, c.sort_key()))
    return out


def _apply_step(cur: Loaded, step: dict) -> tuple[Loaded, dict]:
    op = step.get("op")
    s, tau = cur.surface, cur.tau
    if op == "rel":
        v = parse_vec(step["v"], s.D)
        out = rel_transport(s, v, tau)
        return Loaded(out.surface, out.tau), {"op": "rel", "v": v}
    if op == "gl2":
        M = parse_matrix(step["m"], s.D)
        t = apply_gl2(s, M)
        new_tau = None if tau is None else FlagMap(t, tau.perm, tau.sign, None)
        return Loaded(t, new_tau), {"op": "gl2", "m": [list(r) for r in M]}
    if op == "collapse":
        bound2 = parse_scalar(step.get("bound2", 16), s.D)
        if not s.is_convex():
            raise ValueError("collapse needs a surface with convex cells")
        sc = convention_connections(s, tau, bound2)[int(step["sc"])]
        out = collapse_transport(s, tau, sc)
        return Loaded(out.surface, out.tau), {"op": "collapse", "sc": sc.to_json()}
    if op == "check":
        info = {"op": "check"}
        if "vertical_cylinders" in step:
            cyl = cylinder_decomposition(s, (0, 1))
            info["vertical_cylinders"] = len(cyl)
            if len(cyl) != step["vertical_cylinders"]:
                raise AssertionFailed(f"expected {step['vertical_cylinders']} vertical cylinders, found {len(cyl)}")
        if "stratum" in step:
            st = str(stratum(s))
            info["stratum"] = st
            if st != step["stratum"]:
                raise AssertionFailed(f"expected {step['stratum']}, found {st}")
        return cur, info
    raise ValueError(f"unknown step {op!r}")


def run_script(script, initial: Loaded | None = None) -> Report:
    """Apply a deformation script; raises StepFailed or AssertionFailed."""
    if isinstance(script, list):
        script = {"steps": script}
    if initial is None:
        if "initial" not in script:
            raise ValueError("script has no initial surface")
        initial = load_entry(script["initial"])
    cur = initial
    log = []
    for i, step in enumerate(script.get("steps", [])):
        try:
            cur, info = _apply_step(cur, step)
        except AssertionFailed:
            raise
        except (DeformError, GeodesicError, ValueError, KeyError, IndexError) as exc:
            raise StepFailed(i, exc) from exc
        info["stratum"] = str(stratum(cur.surface, with_tag=False))
        log.append(info)
    results = {"steps": log, "final": cur.surface, "final_stratum": str(stratum(cur.surface))}
    check = script.get("assert") or {}
    if "stratum" in check and str(stratum(cur.surface)) != check["stratum"]:
        raise AssertionFailed(f"final stratum {stratum(cur.surface)} != {check['stratum']}")
    if "isomorphic_to" in check:
        target = load_entry(check["isomorphic_to"]).surface
        g = parse_matrix(check.get("gl2", [[1, 0], [0, 1]]), target.D)
        target = apply_gl2(target, g)
        if not is_isomorphic(cur.surface, target):
            raise AssertionFailed("final surface is not isomorphic to the target")
        results["isomorphic_to"] = check["isomorphic_to"]
        results["gl2"] = [list(r) for r in g]
    elif not script.get("steps"):
        results["isomorphic_to"] = "initial"
        if not is_isomorphic(cur.surface, initial.surface):
            raise AssertionFailed("surface is not isomorphic to itself")
    name = script.get("name", "script")
    rep = Report("replay", {"script": name, "initial": initial.source}, results, cur.surface.D)
    rep.messages = [f"{name}: {len(log)} steps"] + [f"  {i}: {x['op']} -> {x['stratum']}" for i, x in enumerate(log)]
    rep.messages.append(f"final: {results['final_stratum']}" + ("; isomorphic to target" if "isomorphic_to" in results else ""))
    return rep


# ---------------------------------------------------------------------------
# SVG rendering


def render_svg(s: TranslationSurface, gap: float = 0.5, scale: float = 60.0) -> tuple[str, int]:
    """One closed path per polygon, edge-pair labels, and slit overlays."""
    pair_id = {}
    for h in range(s.n_half):
        g = s.gluing[h]
        if h < g:
            pair_id[h] = pair_id[g] = len(pair_id) // 2
    shapes = []
    x0 = 0.0
    ymin, ymax = 0.0, 0.0
    for p, poly in enumerate(s.polygons):
        pts = [(0.0, 0.0)]
        for v in poly[:-1]:
            dx, dy = v.approx(53)
            pts.append((pts[-1][0] + dx, pts[-1][1] + dy))
        lo = min(x for x, _ in pts)
        hi = max(x for x, _ in pts)
        pts = [(x - lo + x0, y) for x, y in pts]
        ymin = min(ymin, min(y for _, y in pts))
        ymax = max(ymax, max(y for _, y in pts))
        shapes.append(pts)
        x0 += hi - lo + gap
    width = (x0 - gap) * scale + 40
    height = (ymax - ymin) * scale + 40

    def tr(pt):
        return (20 + pt[0] * scale, 20 + (ymax - pt[1]) * scale)

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.3f}" height="{height:.3f}" '
        f'viewBox="0 0 {width:.3f} {height:.3f}">',
    ]
    for p, pts in enumerate(shapes):
        d = " ".join(("M" if i == 0 else "L") + f" {tr(q)[0]:.3f} {tr(q)[1]:.3f}" for i, q in enumerate(pts)) + " Z"
        lines.append(f'<path class="polygon" id="poly{p}" d="{d}" fill="#eef3fb" stroke="black" stroke-width="1"/>')
    for p, pts in enumerate(shapes):
        n = len(pts)
        for k in range(n):
            h = s.he(p, k)
            a, b = tr(pts[k]), tr(pts[(k + 1) % n])
            mx, my = (a[0] + b[0]) / 2, (a[1] + b[1]) / 2
            la, lb = s.labels[h], s.labels[s.next(h)]
            if la is not None and lb is not None and la != lb:
                lines.append(f'<line class="slit" x1="{a[0]:.3f}" y1="{a[1]:.3f}" x2="{b[0]:.3f}" y2="{b[1]:.3f}" '
                             'stroke="red" stroke-width="2"/>')
            lines.append(f'<text x="{mx:.3f}" y="{my:.3f}" font-size="10" text-anchor="middle">{pair_id[h]}</text>')
            if la is not None:
                lines.append(f'<text x="{a[0]:.3f}" y="{a[1] - 3:.3f}" font-size="9" fill="blue">{la}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n", len(shapes)


# ---------------------------------------------------------------------------
# commands


@click.group()
@click.version_option(__version__, prog_name="prymeigen")
def main():
    """Prym eigenforms in H(2,2)odd and H(1,1,2): prototypes, invariants, geometry."""


@main.command()
@click.option("--disc", "D", type=int, required=True, help="discriminant D")
@click.option("--kappa", default="2,2")
@click.option("--json", "as_json", is_flag=True)
def prototypes(D, kappa, as_json):
    """List the prototypes of discriminant D."""
    protos = enumerate_prototypes(D, kappa)
    rows = [{"w": p.w, "h": p.h, "e": p.e, "kappa": p.kappa} for p in protos]
    rep = Report("prototypes", {"D": D, "kappa": kappa}, rows, D)
    rep.messages = [f"D={D}: {len(rows)} prototypes"] + [f"  (w,h,e)=({p.w},{p.h},{p.e})" for p in protos]
    _emit(as_json, rep)


def classify_row(D: int) -> dict:
    try:
        return classify_components(D).to_json()
    except EmptyLocus:
        status = "empty" if expected_class_count(D) == 0 else "FAILURE"
        return {"D": D, "classes": [], "expected_classes": expected_class_count(D), "status": status}


@main.command()
@click.option("--from", "lo", type=int, required=True)
@click.option("--to", "hi", type=int, required=True)
@click.option("--jobs", type=int, default=1, help="worker processes")
@click.option("--json", "as_json", is_flag=True)
def classify(lo, hi, jobs, as_json):
    """Parity classes of prototypes for each D in a range."""
    Ds = parse_range(lo, hi)
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            rows = list(ex.map(classify_row, Ds))
    else:
        rows = [classify_row(D) for D in Ds]
    bad = [r["D"] for r in rows if r["status"] == "FAILURE"]
    rep = Report("classify", {"from": lo, "to": hi}, rows, None, ok=not bad)
    for r in rows:
        if r["status"] == "empty":
            rep.messages.append(f"D={r['D']}: empty")
        else:
            rep.messages.append(f"D={r['D']}: {len(r['classes'])} class(es)" + ("" if r["status"] == "ok" else "  FAILURE"))
    _emit(as_json, rep)


@main.command()
@click.option("--kappa", default="2,2")
@click.option("--w", type=int, required=True)
@click.option("--h", type=int, required=True)
@click.option("--e", type=int, required=True)
@click.option("--slit", default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="write the surface JSON here")
@click.option("--json", "as_json", is_flag=True)
def build(kappa, w, h, e, slit, out, as_json):
    """Build a prototype surface."""
    try:
        ld = load_prototype(w, h, e, kappa, slit)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    s = ld.surface
    if out:
        Path(out).write_text(json.dumps(s.to_json(), sort_keys=True) + "\n")
    res = {"surface": s, "stratum": str(stratum(s)), "genus": s.genus, "area": s.area}
    rep = Report("build", ld.source, res, s.D)
    rep.messages = [f"{stratum(s)}, genus {s.genus}, {len(s.polygons)} polygons, area {s.area}"]
    if out:
        rep.messages.append(f"wrote {out}")
    _emit(as_json, rep)


@main.command()
@click.option("--len", "L", required=True, help="length bound")
@surface_options
@click.option("--json", "as_json", is_flag=True)
def scan(L, surface_path, kappa, w, h, e, slit, as_json):
    """Saddle connections up to a length (JSON lines with --json)."""
    ld = resolve_surface(surface_path, kappa, w, h, e, slit)
    try:
        bound = parse_scalar(L, ld.surface.D)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    from .surface import delaunay_decomposition

    s = ld.surface if ld.surface.is_convex() else delaunay_decomposition(ld.surface)
    scs = saddle_connections(s, bound)
    if as_json:
        for sc in scs:
            click.echo(json.dumps(sc.to_json(), sort_keys=True))
        return
    click.echo(f"{len(scs)} saddle connections of length <= {L}")
    for sc in scs:
        click.echo(f"  {sc.start}->{sc.end}  {sc.holonomy}")


@main.command()
@click.option("--dir", "direction", required=True, help="direction dx,dy")
@surface_options
@click.option("--json", "as_json", is_flag=True)
def cylinders(direction, surface_path, kappa, w, h, e, slit, as_json):
    """Cylinder decomposition in a periodic direction."""
    ld = resolve_surface(surface_path, kappa, w, h, e, slit)
    try:
        d = parse_vec(direction, ld.surface.D)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    try:
        cyl = cylinder_decomposition(ld.surface, d)
    except GeodesicError as exc:
        rep = Report("cylinders", {"dir": d, **ld.source}, {"error": str(exc)}, ld.surface.D, ok=False)
        rep.messages = [f"error: {exc}"]
        _emit(as_json, rep)
        return
    rep = Report("cylinders", {"dir": d, **ld.source}, [c.to_json() for c in cyl], ld.surface.D)
    rep.messages = [f"{len(cyl)} cylinders"] + [f"  width {c.width}  height {c.height}" for c in cyl]
    _emit(as_json, rep)


@main.command()
@click.option("--w", type=int, required=True)
@click.option("--h", type=int, required=True)
@click.option("--e", type=int, required=True)
@click.option("--kappa", default="2,2")
@click.option("--json", "as_json", is_flag=True)
def invariant(w, h, e, kappa, as_json):
    """Mod-2 component invariant of a prototype."""
    try:
        p = Prototype(w, h, e, kappa)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    c = component_invariant(p)
    res = {"D": c.disc, "parity": c.parity, "raw_parity": c.raw_parity}
    rep = Report("invariant", {"w": w, "h": h, "e": e, "kappa": p.kappa}, res, p.D)
    rep.messages = [f"D={c.disc} parity={c.parity if c.parity is not None else '-'} (raw {c.raw_parity})"]
    _emit(as_json, rep)


@main.command()
@surface_options
@click.option("--json", "as_json", is_flag=True)
def involutions(surface_path, kappa, w, h, e, slit, as_json):
    """Prym involutions of a surface."""
    ld = resolve_surface(surface_path, kappa, w, h, e, slit)
    c = involution_census(ld.surface)
    res = {
        "count": len(c.involutions),
        "composite_orders": c.composite_orders,
        "quotient_genera": c.quotient_genera,
        "stratum": c.stratum,
        "fixed_points": [f.fixed_point_count() for f in c.involutions],
    }
    if ld.prototype is not None:
        ps = build_prototype_surface(ld.prototype, ld.slit)
        res["matches_constructor"] = [matches_constructor(ps, f) for f in c.involutions]
    rep = Report("involutions", ld.source, res, ld.surface.D)
    rep.messages = [f"{len(c.involutions)} Prym involution(s) on {c.stratum}"]
    if c.composite_orders:
        rep.messages.append(f"  composite orders {c.composite_orders}, quotient genera {c.quotient_genera}")
    _emit(as_json, rep)


@main.command()
@click.option("--script", "script_path", required=True, help="script JSON file or a bundled name (d16-path)")
@surface_options
@click.option("--json", "as_json", is_flag=True)
def replay(script_path, surface_path, kappa, w, h, e, slit, as_json):
    """Replay a deformation script."""
    if Path(script_path).exists():
        script = json.loads(Path(script_path).read_text())
    else:
        try:
            script = bundled_script(script_path)
        except FileNotFoundError:
            raise click.UsageError(f"no script file or bundled script named {script_path!r}")
    initial = None
    if surface_path or w is not None:
        initial = resolve_surface(surface_path, kappa, w, h, e, slit)
    try:
        rep = run_script(script, initial)
    except (StepFailed, AssertionFailed) as exc:
        rep = Report("replay", {"script": str(script_path)}, {"error": str(exc), "type": type(exc).__name__},
                     None, ok=False)
        rep.messages = [f"error: {exc}"]
    except ValueError as exc:
        raise click.UsageError(str(exc))
    _emit(as_json, rep)


@main.command()
@click.option("--svg", "out", required=True, type=click.Path(dir_okay=False), help="output file ('-' for stdout)")
@surface_options
@click.option("--json", "as_json", is_flag=True)
def render(out, surface_path, kappa, w, h, e, slit, as_json):
    """Draw a surface as SVG (prototypes use the three-tori picture)."""
    ld = resolve_surface(surface_path, kappa, w, h, e, slit)
    s = figure_presentation(ld.prototype, ld.slit) if ld.prototype is not None else ld.surface
    doc, n = render_svg(s)
    if out == "-":
        click.echo(doc, nl=False)
        return
    Path(out).write_text(doc)
    rep = Report("render", {**ld.source, "out": out}, {"paths": n}, s.D)
    rep.messages = [f"wrote {out} ({n} polygons)"]
    _emit(as_json, rep)


if __name__ == "__main__":
    main()
