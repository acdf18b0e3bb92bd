"""Semigroup errors of the four time integrators on a window-8 schedule.

The time list uses the smallest step of each method, so the comparison
isolates the time-stepping error on top of the shared spatial error.
"""

import time

import numpy as np

from tklab import harness as H
from tklab.discretization import METHODS, grids
from tklab.function_space import gauss

SCHEDULE = ((8, 16), (8, 32), (8, 64))
LEVEL = 4.0


def main():
    f = gauss(1.0)
    sched = grids(SCHEDULE)
    times = np.linspace(0.0, 1.0, 6)[1:]  # t = 0 only measures interpolation
    print(f"max over t in (0, 1] of level-{LEVEL:g} error, {f.name}")
    print(f"{'method':>16} " + " ".join(f"{f'N={g.N}':>11}" for g in sched) + "    order   time")
    for m in METHODS:
        t = time.perf_counter()
        errs, _ = H.semigroup_errors(f, times, sched, [LEVEL], method=m)
        e = errs[:, :, 0].max(axis=1)
        fit = H.estimate_order(e, [g.dx for g in sched])
        print(f"{m:>16} " + " ".join(f"{v:11.3e}" for v in e) + f"   {fit.order:6.3f} {time.perf_counter() - t:6.1f}s")


if __name__ == "__main__":
    main()
