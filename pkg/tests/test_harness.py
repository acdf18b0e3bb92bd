import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tklab import harness as H
from tklab.discretization import grids, make_grid
from tklab.function_space import SeminormFamily, UnsupportedFunctionError, bump, chirp, gauss, runge, sine

FAM = SeminormFamily((1.0, 2.0, 4.0))
SMALL = grids(((8, 8), (8, 16), (8, 32)))


@given(st.floats(0.5, 4.0), st.floats(1e-6, 1e3), st.integers(3, 6))
def test_order_of_exact_power_law(p, c, k):
    dx = 2.0 ** -np.arange(1, k + 1)
    fit = H.estimate_order(c * dx**p, dx)
    assert fit.order == pytest.approx(p, abs=1e-9)
    assert fit.monotone and fit.used == k and not fit.exact


def test_order_edge_cases():
    dx = [0.1, 0.05, 0.025]
    assert H.estimate_order([0.0, 0.0, 0.0], dx).exact
    assert H.estimate_order([0.0, 0.0, 0.0], dx).label() == "exact"
    fit = H.estimate_order([4e-2, 1e-2, 0.0], dx)
    assert fit.order == pytest.approx(2.0) and "excluded 1" in fit.note
    assert H.estimate_order([1.0, 0.0, 0.0], dx).order is None
    assert not H.estimate_order([1e-2, 2e-2, 1e-3], dx).monotone
    with pytest.raises(ValueError):
        H.estimate_order([1.0, 2.0], [0.1, 0.05])
    with pytest.raises(ValueError):
        H.estimate_order([1.0, 2.0, 3.0], [0.1, 0.2, 0.05])
    with pytest.raises(ValueError):
        H.estimate_order([1.0, -2.0, 3.0], dx)


def test_refinement_family_uses_widest_window():
    assert H.refinement_family(grids(((4, 8), (4, 16), (8, 32), (8, 64), (8, 128)))) == [2, 3, 4]
    assert H.refinement_family(grids(((4, 8), (8, 16), (8, 32)))) == [0, 1, 2]


def test_operator_bounds_and_roundtrip():
    rep = H.check_A1_A3(SMALL, [gauss(1.0), runge(), sine()], trials=50)
    assert rep.passed
    assert rep.M1 <= 1.0 and rep.M2 <= 1.0
    assert all(r["roundtrip_ulp"] == 0.0 for r in rep.rows)
    with pytest.raises(ValueError):
        H.check_A1_A3([], [gauss()])


def test_projection_defect_vanishes():
    assert H.projection_defect(bump(), make_grid(4, 16)) <= 1e-15


def test_interpolation_order():
    rep = H.check_A2(gauss(1.0), SMALL, FAM)
    for l in FAM.levels:
        assert rep.orders[l].order == pytest.approx(2.0, abs=0.05)
    # the interpolation error of e^{-x^2} is led by h^2/8 max|f''| = h^2/4
    assert rep.column("error", 1.0)[-1] == pytest.approx(SMALL[-1].dx ** 2 / 4, rel=0.02)
    assert rep.passed


def test_stability_small():
    rep = H.stability_suite(grids(((2, 4), (2, 8))), trials=200)
    assert rep.passed and rep.M == 1.0 and rep.omega == 0.0
    assert {r["method"] for r in rep.rows} == {"duality", "pade_expm", "backward_euler", "crank_nicolson"}
    with pytest.raises(ValueError):
        H.stability_suite(SMALL, trials=10)


def test_modulus_of_continuity():
    lin = lambda x: 3.0 * x
    assert H.modulus_of_continuity(lin, 0.1, -1, 1) == pytest.approx(0.3)
    assert H.modulus_of_continuity(np.sin, 1e-3, -2, 2) == pytest.approx(1e-3, rel=1e-5)


@pytest.mark.parametrize("f", [gauss(1.0), bump()], ids=["gauss", "bump"])
def test_generator_consistency(f):
    rep = H.consistency_C2(f, SMALL, FAM)
    assert rep.passed
    for l in FAM.levels:
        assert rep.orders[l].within()
        assert H._decreasing(rep.column("generator_error", l))


def test_generator_consistency_needs_derivative():
    from tklab.function_space import ContinuousFunction
    with pytest.raises(UnsupportedFunctionError):
        H.consistency_C2(ContinuousFunction(eval=np.cos, sup_bound=1.0), SMALL, FAM)


def test_resolvent_convergence_on_wide_window():
    sched = grids(((16, 8), (16, 16), (16, 32)))
    rep = H.resolvent_consistency(gauss(1.0), 1.0, sched, FAM)
    assert rep.passed
    for l in FAM.levels:
        assert rep.orders[l].order == pytest.approx(2.0, abs=0.05)


def test_semigroup_errors_at_fixed_positive_time():
    rep = H.semigroup_convergence(gauss(1.0), 0.5, SMALL, FAM, t_list=[0.5])
    assert rep.passed
    for l in FAM.levels:
        assert rep.orders[l].order == pytest.approx(2.0, abs=0.05)
    # at t = 0 the error is the interpolation error
    at0 = H.semigroup_convergence(gauss(1.0), 0.5, SMALL, FAM, t_list=[0.0])
    a2 = H.check_A2(gauss(1.0), SMALL, FAM)
    assert np.allclose(at0.column("t_max_error", 2.0), a2.column("error", 2.0), rtol=1e-12)


def test_time_list():
    assert H.time_list(1.0, 16)[[0, -1]].tolist() == [0.0, 1.0]
    with pytest.raises(ValueError):
        H.time_list(1.0, 1)


def test_laplace_bound_small():
    rep = H.laplace_bound_check(gauss(1.0), 1.0, SMALL[1:], FAM, n_times=26)
    assert rep.passed
    assert all(r["laplace_estimate"] <= r["bound"] for r in rep.rows)


@pytest.mark.parametrize("t", [0.0, 0.25, 0.5])
def test_error_decomposition_reconstructs(t):
    d = H.error_decomposition(gauss(1.0), t, make_grid(8, 16), 1.0)
    assert d.holds()
    assert d.residual < 1e-12
    if t == 0:
        assert d.norms["measured"] == 0.0 and d.norms["term3"] == 0.0


def test_error_decomposition_requires_closed_forms():
    with pytest.raises(UnsupportedFunctionError):
        H.error_decomposition(bump(), 0.25, make_grid(8, 16))
    with pytest.raises(ValueError):
        H.error_decomposition(gauss(1.0), 0.25, make_grid(8, 16), lambda0=0.0)


def test_error_decomposition_other_lambda():
    d = H.error_decomposition(gauss(2.0), 0.3, make_grid(8, 32), lambda0=5.0)
    assert d.relative_residual() < 1e-6


def test_translated_bump_demo():
    rep = H.bi_equicontinuity_demo(bump(), [0.0, 6.0, 12.0], 0.25, make_grid(16, 8), FAM, level=2.0, n_times=6)
    assert rep.passed
    assert rep.rows[-1]["sn_exact"] < 1e-20


def test_chirp_demo():
    rep = H.chirp_demo(chirp(), times=(1e-4, 1e-2))
    assert rep.passed
    # T(t)f - f = t f'' + O(t^2)
    x = np.linspace(-2, 2, 40001)
    assert rep.rows[0]["seminorm"] == pytest.approx(1e-4 * np.max(np.abs(chirp().second_derivative(x))), rel=1e-2)
