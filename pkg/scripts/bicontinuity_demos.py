"""Seminorm versus sup-norm behaviour of the heat flow.

Translated bumps keep their sup norm while every local seminorm of the orbit
dies out; the chirp sin(x^2) moves little on [-l, l] at small times but not
uniformly on the line.
"""

import argparse

from tklab import harness as H
from tklab.discretization import make_grid
from tklab.function_space import SeminormFamily, bump, chirp


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--level", type=float, default=2.0)
    p.add_argument("--t0", type=float, default=0.25)
    args = p.parse_args()

    rep = H.bi_equicontinuity_demo(bump(0.0, 2.0), [0, 2, 4, 6, 8, 10, 12], args.t0, make_grid(16, 16),
                                   SeminormFamily(), level=args.level)
    print(f"translated bump, level {args.level:g}, t in [0, {args.t0:g}]")
    print(f"{'shift':>6} {'seminorm':>12} {'discrete':>12} {'tail bound':>12} {'sup norm':>10}")
    for r in rep.rows:
        print(f"{r['shift']:6g} {r['sn_exact']:12.3e} {r['sn_discrete']:12.3e} {r['tail_bound']:12.3e} "
              f"{r['sup_exact']:10.6f}")
    print(rep.criteria)

    rep = H.chirp_demo(chirp(), level=args.level)
    print(f"\nchirp, level {args.level:g}")
    print(f"{'t':>8} {'seminorm':>12} {'sup gap':>10}")
    for r in rep.rows:
        print(f"{r['t']:8.0e} {r['seminorm']:12.3e} {r['sup_gap']:10.6f}")
    print(rep.criteria)


if __name__ == "__main__":
    main()
