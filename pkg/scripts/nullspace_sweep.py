#!/usr/bin/env python3
"""Singular-value ladders of the discretised pair for the family
scenarios; the tool used to calibrate the golden detection thresholds.

Absolute values in the ladder separate three regimes: rounding-level
exact solutions, h^2-truncation images of smooth solutions, and
h-independent structural defects of nearly-admissible discrete modes.
"""

import argparse

from ucp2d import cli
from ucp2d.pipeline import null_space_dimension
from ucp2d.reduction import reduce_system

FAMILY_SCENARIOS = (
    "lame_constant",
    "example_exp",
    "example_b221_expy",
    "example_xy",
    "example_c22_xy",
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=65)
    ap.add_argument("--threshold", type=float, default=None,
                    help="override the per-scenario detection threshold")
    ap.add_argument("--scenarios", nargs="+", default=list(FAMILY_SCENARIOS))
    args = ap.parse_args()
    for stem in args.scenarios:
        sc = cli.load_scenario(cli.scenario_dir() / f"{stem}.json")
        thr = args.threshold or sc.tolerances.nullspace_threshold
        res = null_space_dimension(reduce_system(sc.coefficients), sc.omega,
                                   args.n, thr)
        flag = " (ambiguous)" if res.ambiguous else ""
        print(f"{stem}: n={args.n} threshold={thr:g}")
        print(f"  dimension={res.dimension} gap={res.gap:.3g}{flag}")
        ladder = " ".join(f"{v:.2e}" for v in res.smallest[:8])
        print(f"  smallest relative sigmas: {ladder}")


if __name__ == "__main__":
    main()
