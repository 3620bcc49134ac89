"""Search for an admissible Prym-invariant slit on a D=8 eigenform and collapse it into H(4).

Starts at the prototype S(1,1,0) and, if needed, tries small random Rel moves
(seeded) until the collapse succeeds and real multiplication still verifies.
"""

import argparse
import random
import sys
from fractions import Fraction

from prymeigen.config import FixtureSearchConfig
from prymeigen.deform import DeformError, collapse_transport, rel_transport
from prymeigen.geodesics import is_admissible, is_invariant, saddle_connections
from prymeigen.homology import anti_invariant_lattice
from prymeigen.prym import (
    Prototype,
    build_prototype_surface,
    find_prym_involutions,
    rm_generator,
    verify_real_multiplication,
)
from prymeigen.qfield import Vec2
from prymeigen.surface import stratum


def candidates(s, tau, bound2):
    out = []
    for sc in saddle_connections(s, bound2, squared=True):
        if (sc.start, sc.end) == ("P", "Q") and is_invariant(tau, sc) and is_admissible(s, sc, tau):
            out.append(sc)
    out.sort(key=lambda c: (c.length2, c.sort_key()))
    return out


def attempt(p, ps, v, bound2):
    chains = ps.prym_chains
    s, tau = ps.surface, ps.tau
    if v is not None:
        moved = rel_transport(s, v, tau, chains)
        s, tau, chains = moved.surface, moved.tau, moved.chains
    for sc in candidates(s, tau, bound2):
        try:
            out = collapse_transport(s, tau, sc, chains)
        except DeformError:
            continue
        lat = anti_invariant_lattice(out.surface, out.tau, preferred=out.chains)
        verify_real_multiplication(out.surface, out.tau, rm_generator(p), lattice=lat, D=p.D)
        return sc, out
    return None


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=FixtureSearchConfig.seed)
    ap.add_argument("--tries", type=int, default=FixtureSearchConfig.tries)
    ap.add_argument("--bound2", type=int, default=FixtureSearchConfig.bound2,
                    help="squared length bound for candidate slits")
    cfg = FixtureSearchConfig(**vars(ap.parse_args(argv)))
    rng = random.Random(cfg.seed)
    q = cfg.step_denominator
    p = Prototype(1, 1, 0)
    ps = build_prototype_surface(p)
    moves = [None] + [
        Vec2(Fraction(rng.randint(-10, 10), q), Fraction(rng.randint(-10, 10), q), p.D)
        for _ in range(cfg.tries)
    ]
    for v in moves:
        try:
            found = attempt(p, ps, v, cfg.bound2)
        except DeformError as exc:
            print(f"rel {v}: {type(exc).__name__}")
            continue
        if found is None:
            print(f"rel {v}: no admissible invariant slit")
            continue
        sc, out = found
        print(f"rel move: {v if v is not None else 'none'}")
        print(f"slit: {sc}")
        print(f"result: {stratum(out.surface)}, {len(find_prym_involutions(out.surface))} Prym involution(s)")
        print("real multiplication by O_8 verified")
        return 0
    print("no fixture found")
    return 1


if __name__ == "__main__":
    sys.exit(main())
