"""Bounded search for the parameters of the bundled d16-path replay script.

For each small vertical offset eps: move S(2,1,0) by (0, eps), then by (slit, 0)
to reach the three-vertical-cylinder surface, rotate a quarter turn and slide
the zeros horizontally until the result matches S(1,2,0) with the target slit.
"""

import argparse
import json
import sys
from fractions import Fraction

from prymeigen.cli import AssertionFailed, StepFailed, run_script
from prymeigen.config import PathSearchConfig


def script_for(eps: str, slit: str, target_slit: str) -> dict:
    shift = Fraction(target_slit) - Fraction(eps)
    return {
        "name": "d16-path",
        "initial": {"prototype": {"w": 2, "h": 1, "e": 0, "kappa": "2,2"}, "slit": slit},
        "steps": [
            {"op": "rel", "v": ["0", eps]},
            {"op": "rel", "v": [slit, "0"]},
            {"op": "check", "vertical_cylinders": 3},
            {"op": "gl2", "m": [["0", "-1"], ["1", "0"]]},
            {"op": "rel", "v": [str(-shift), "0"]},
        ],
        "assert": {
            "isomorphic_to": {"prototype": {"w": 1, "h": 2, "e": 0, "kappa": "2,2"}, "slit": target_slit},
            "gl2": [["1", "0"], ["0", "1"]],
            "stratum": "H(2,2)odd",
        },
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--slit", default=PathSearchConfig.slit)
    ap.add_argument("--target-slit", dest="target_slit", default=PathSearchConfig.target_slit)
    cfg = PathSearchConfig(**vars(ap.parse_args(argv)))
    for eps in cfg.eps:
        script = script_for(eps, cfg.slit, cfg.target_slit)
        try:
            run_script(script)
        except (StepFailed, AssertionFailed) as exc:
            print(f"eps={eps}: {exc}")
            continue
        print(f"eps={eps}: endpoint isomorphic to the target")
        print(json.dumps(script, indent=1))
        return 0
    return 1


if __name__ == "__main__":
    sys.exit(main())
