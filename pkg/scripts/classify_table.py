"""Print the parity-class table for a range of discriminants."""

import argparse
import sys

from prymeigen.cli import classify_row
from prymeigen.config import ClassifyConfig


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--from", dest="lo", type=int, default=ClassifyConfig.lo)
    ap.add_argument("--to", dest="hi", type=int, default=ClassifyConfig.hi)
    cfg = ClassifyConfig(**vars(ap.parse_args(argv)))
    failures = 0
    print(f"{'D':>4}  {'D mod 8':>7}  {'classes':>7}  status  prototypes by parity")
    for D in range(cfg.lo, cfg.hi + 1):
        row = classify_row(D)
        groups = "; ".join(
            f"{c['parity']}: {len(c['prototypes'])}" for c in row["classes"]
        )
        print(f"{D:>4}  {D % 8:>7}  {len(row['classes']):>7}  {row['status']:<6}  {groups}")
        failures += row["status"] == "FAILURE"
    print(f"{failures} FAILURE rows")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
