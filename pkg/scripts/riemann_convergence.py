#!/usr/bin/env python3
"""Grid-convergence study of the Riemann solver against the series
closed form for the constant-coefficient equation ds dt w + c w = 0."""

import argparse

import numpy as np

from ucp2d.characteristics import TransformedSystem
from ucp2d.riemann import solve_riemann


def series(z, terms=60):
    out = np.ones_like(z)
    term = np.ones_like(z)
    for k in range(1, terms):
        term = term * (-z) / (k * k)
        out = out + term
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--c1", type=float, default=1.0)
    ap.add_argument("--epsilon", type=float, default=0.5)
    ap.add_argument("--sizes", type=int, nargs="+", default=[65, 129, 257])
    ap.add_argument("--xi", type=float, default=0.0)
    ap.add_argument("--eta", type=float, default=0.0)
    args = ap.parse_args()

    tsys = TransformedSystem.from_constants(c1=args.c1, epsilon=args.epsilon)
    print(f"c1={args.c1} epsilon={args.epsilon} parameter=({args.xi}, {args.eta})")
    print(f"{'n':>6} {'sup error':>12} {'iterations':>10} {'order':>7}")
    prev = None
    for n in args.sizes:
        tab = solve_riemann(tsys, (args.xi, args.eta), n, tol=1e-13)
        sg, tg = np.meshgrid(tab.s_nodes, tab.t_nodes, indexing="ij")
        ref = series(args.c1 * (sg - args.xi) * (tg - args.eta))
        err = float(np.max(np.abs(tab.values - ref)))
        order = "" if prev is None else f"{np.log2(prev / err):7.2f}"
        print(f"{n:>6} {err:>12.3e} {tab.iterations:>10} {order:>7}")
        prev = err


if __name__ == "__main__":
    main()
