"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (also repeated in the pytest
terminal summary).  Runtime budgets are printed next to the measured time;
they are informative, not part of the verdict.  Run directly with
``python tests/test_acceptance.py`` to get just the ten lines.
"""

import filecmp
import time
from pathlib import Path

import numpy as np
import pytest

from tklab import cli
from tklab import harness as H
from tklab.config import load_config
from tklab.discretization import DEFAULT_SCHEDULE, RESOLVENT_SCHEDULE, grids, make_grid
from tklab.function_space import SeminormFamily, bump, chirp, gauss, runge
from tklab.heat_oracle import (
    QuadratureSpec,
    heat_quadrature,
    integral_identity_check,
    laplace_tail_bound,
    laplace_transform_check,
    resolvent_exact,
)

pytestmark = pytest.mark.slow

RESULTS: dict[int, str] = {}
FAMILY = SeminormFamily()
LOW_LEVELS = (1.0, 2.0, 4.0)
ROOT = Path(__file__).resolve().parents[1]


def report(num, title, ok, detail, seconds, budget):
    over = "" if seconds <= budget else " OVER"
    line = f"{'PASS' if ok else 'FAIL'}  [{num:>2}] {title}: {detail}  ({seconds:.1f} s, budget {budget:g} s{over})"
    RESULTS[num] = line
    print(line)
    return ok


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0


def test_01_operator_identities():
    sched = grids(DEFAULT_SCHEDULE)
    with Timer() as tm:
        rng = np.random.default_rng(0)
        ops = H.check_A1_A3(sched, [gauss(1.0), bump(), runge()], trials=200, rng=rng)
        n_vectors = 200 * len(sched)
        defect = max(H.projection_defect(f, g) for f in (gauss(1.0), bump(), runge()) for g in sched)
    ulp = max(r["roundtrip_ulp"] for r in ops.rows)
    ok = ulp <= 1.0 and defect <= 1e-12 and ops.passed
    assert report(1, "operator identities", ok,
                  f"P_n E_n round trip {ulp:g} ulp over {n_vectors} vectors; projection idempotence defect "
                  f"{defect:.1e}; max ||P_n||={ops.M1:.3g}, ||E_n||={ops.M2:.3g}", tm.seconds, 5)


def test_02_stability():
    with Timer() as tm:
        rep = H.stability_suite(grids(DEFAULT_SCHEDULE), trials=10_000, rng=np.random.default_rng(0))
    pair = max(r["max_pairing"] for r in rep.rows if r["method"] == "duality")
    growth = max(r["max_growth"] for r in rep.rows if r["method"] != "duality")
    ok = rep.passed and rep.M == 1.0 and rep.omega == 0.0
    assert report(2, "stability", ok,
                  f"max normalized pairing {pair:.3g} over 1e4 vectors/grid; max growth {growth:.15f}; "
                  f"(M, omega) = ({rep.M:g}, {rep.omega:g}); failures {len(rep.failures)}", tm.seconds, 30), \
        rep.failures[:3]


def test_03_generator_consistency():
    details, ok = [], True
    with Timer() as tm:
        for f in (gauss(1.0), bump()):
            rep = H.consistency_C2(f, grids(DEFAULT_SCHEDULE), FAMILY)
            orders = [rep.orders[l].order for l in LOW_LEVELS]
            dec = all(H._decreasing(rep.column("generator_error", l)) for l in LOW_LEVELS)
            in_band = all(1.7 <= o <= 2.3 for o in orders)
            ok &= in_band and dec and rep.criteria["bound_dominates"]
            details.append(f"{f.name} orders {min(orders):.4f}..{max(orders):.4f}, decreasing={dec}, "
                           f"bound dominates={rep.criteria['bound_dominates']}")
    assert report(3, "generator consistency", ok, "; ".join(details), tm.seconds, 30)


def test_04_resolvent_consistency():
    with Timer() as tm:
        rep = H.resolvent_consistency(gauss(1.0), 1.0, grids(RESOLVENT_SCHEDULE), FAMILY)
    orders = [rep.orders[l].order for l in LOW_LEVELS]
    finest = max(rep.column("error", l)[-1] for l in LOW_LEVELS)
    ok = all(abs(o - 2.0) <= 0.3 for o in orders) and finest <= 5e-4
    assert report(4, "resolvent consistency", ok,
                  f"orders {min(orders):.4f}..{max(orders):.4f} at l<=4; finest error {finest:.3e} "
                  f"(windows up to l={RESOLVENT_SCHEDULE[-1][0]})", tm.seconds, 30)


def test_05_semigroup_convergence():
    f = gauss(1.0)
    with Timer() as tm:
        x = np.linspace(-4, 4, 33)
        xval = max(float(np.max(np.abs(heat_quadrature(f, t, x, QuadratureSpec()) - f.exact_evolution(t)(x))))
                   for t in (0.25, 0.5, 1.0))
        rep = H.semigroup_convergence(f, 1.0, grids(DEFAULT_SCHEDULE), FAMILY, n_times=16)
    finest = rep.column("t_max_error", 4.0)[-1]
    order = rep.orders[4.0].order
    ok = finest <= 1e-3 and abs(order - 2.0) <= 0.3 and rep.criteria["sup_bounded"] and xval <= 1e-9
    assert report(5, "semigroup convergence", ok,
                  f"finest error at l=4 {finest:.3e}, order {order:.4f}, orbits bounded="
                  f"{rep.criteria['sup_bounded']}, closed form vs quadrature {xval:.1e}", tm.seconds, 180)


def test_06_laplace_bound():
    sched = grids(DEFAULT_SCHEDULE)[-3:]
    with Timer() as tm:
        rep = H.laplace_bound_check(gauss(1.0), 1.0, sched, FAMILY, n_times=51)
    slack = min(r["bound"] - r["resolvent_error"] for r in rep.rows)
    assert report(6, "integral estimate", rep.passed,
                  f"resolvent error <= max semigroup error / lambda0 + tail on all {len(rep.rows)} rows "
                  f"of the three finest grids; smallest slack {slack:.3e}", tm.seconds, 60)


def test_07_error_representation():
    worst, dec, ok = 0.0, True, True
    with Timer() as tm:
        for t in (0.25, 0.5):
            norms = []
            for l, N in ((8, 32), (8, 64)):
                d = H.error_decomposition(gauss(1.0), t, make_grid(l, N), 1.0)
                worst = max(worst, d.relative_residual())
                norms.append(d.norms)
            dec &= all(norms[1][k] < norms[0][k] for k in ("term1", "term2", "term3"))
    ok = worst <= 1e-6 and dec
    assert report(7, "error representation", ok,
                  f"max relative reconstruction residual {worst:.2e}; term norms decrease={dec}", tm.seconds, 60)


def test_08_oracle_self_consistency():
    x = np.linspace(-4, 4, 33)
    with Timer() as tm:
        lap_err = 0.0
        for f in (gauss(1.0), bump()):
            gap = np.max(np.abs(laplace_transform_check(f, 1.0, 25.0)(x) - resolvent_exact(f, 1.0)(x)))
            lap_err = max(lap_err, float(gap) - laplace_tail_bound(f, 1.0, 25.0))
        ident = max(integral_identity_check(f, t) for f in (gauss(1.0), gauss(4.0), bump(), runge())
                    for t in (0.1, 0.5))
    ok = lap_err <= 1e-6 and ident <= 1e-6
    assert report(8, "oracle self-consistency", ok,
                  f"Laplace transform vs kernel {max(lap_err, 0):.1e} on |x|<=4; integral identity residual "
                  f"{ident:.1e}", tm.seconds, 60)


def test_09_bicontinuity_demos():
    with Timer() as tm:
        bi = H.bi_equicontinuity_demo(bump(), [0, 2, 4, 6, 8, 10, 12], 0.25, make_grid(16, 16), FAMILY, level=2.0)
        ch = H.chirp_demo(chirp(), (1e-4, 3e-4, 1e-3, 3e-3, 1e-2), level=2.0)
    sups = [r["sup_exact"] for r in bi.rows]
    far = min(r["sn_exact"] for r in bi.rows)
    ok = bi.passed and ch.passed and far <= 1e-8
    assert report(9, "bi-continuity demos", ok,
                  f"translated bump sn_2 down to {far:.1e} with sup {min(sups):.6f}..{max(sups):.6f}; chirp "
                  f"sn_2 {ch.rows[0]['seminorm']:.2e} at t=1e-4, sup gap >= {min(r['sup_gap'] for r in ch.rows):.4f}",
                  tm.seconds, 60)


def test_10_determinism(tmp_path):
    cfg = ROOT / "configs" / "quick.json"
    with Timer() as tm:
        m1, _ = cli.run(load_config(cfg, out=str(tmp_path / "a"), seed=7), log=lambda *_: None)
        m2, _ = cli.run(load_config(cfg, out=str(tmp_path / "b"), seed=7), log=lambda *_: None)
    csvs = sorted(n for n in m1["files"] if n.endswith(".csv"))
    same = all(filecmp.cmp(tmp_path / "a" / n, tmp_path / "b" / n, shallow=False) for n in csvs)
    ok = same and m1["files"] == m2["files"] and m1["passed"]
    assert report(10, "determinism", ok,
                  f"{len(csvs)} CSVs byte-identical across two runs of all suites={same}; "
                  f"all suites passed={m1['passed']}", tm.seconds, 300)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
