"""Print an error/order table for one function over a grid schedule.

    python scripts/refinement_study.py --function "gauss(1)" --study semigroup
    python scripts/refinement_study.py --function bump --study c2 --schedule 8:16,8:32,8:64,8:128
"""

import argparse
import time

from tklab import harness as H
from tklab.discretization import DEFAULT_SCHEDULE, RESOLVENT_SCHEDULE, METHODS, grids
from tklab.function_space import SeminormFamily, resolve

KEYS = {"a2": "error", "c2": "generator_error", "resolvent": "error", "semigroup": "t_max_error"}


def parse_schedule(text):
    return tuple(tuple(int(v) for v in pair.split(":")) for pair in text.split(","))


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--function", default="gauss(1)")
    p.add_argument("--study", choices=sorted(KEYS), default="semigroup")
    p.add_argument("--schedule", type=parse_schedule)
    p.add_argument("--method", choices=METHODS, default="pade_expm")
    p.add_argument("--t0", type=float, default=1.0)
    p.add_argument("--lambda0", type=float, default=1.0)
    args = p.parse_args()

    f = resolve(args.function)
    fam = SeminormFamily()
    default = RESOLVENT_SCHEDULE if args.study == "resolvent" else DEFAULT_SCHEDULE
    sched = grids(args.schedule or default)
    t = time.perf_counter()
    if args.study == "a2":
        rep = H.check_A2(f, sched, fam)
    elif args.study == "c2":
        rep = H.consistency_C2(f, sched, fam)
    elif args.study == "resolvent":
        rep = H.resolvent_consistency(f, args.lambda0, sched, fam)
    else:
        rep = H.semigroup_convergence(f, args.t0, sched, fam, method=args.method)
    key = KEYS[args.study]

    print(f"{args.study} / {f.name}   ({time.perf_counter() - t:.1f} s)")
    print(f"{'l':>3} {'N':>5} " + " ".join(f"{'level ' + format(l, 'g'):>12}" for l in fam.levels))
    for g in sched:
        vals = [r[key] for r in rep.rows if r["l"] == g.l and r["N"] == g.N]
        print(f"{g.l:>3} {g.N:>5} " + " ".join(f"{v:12.4e}" for v in vals))
    print("order " + " ".join(f"{l:g}: {rep.orders[l].label()[:6]}" for l in fam.levels if l in rep.orders))
    for c, v in rep.criteria.items():
        print(f"  {c}: {'ok' if v else 'FAILED'}")


if __name__ == "__main__":
    main()
