import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import erfc

from tklab.function_space import ContinuousFunction, UnsupportedFunctionError, bump, constant, gauss, runge
from tklab.heat_oracle import (
    HEAT_GROWTH,
    RTOL_ENV,
    ConfigurationError,
    QuadratureError,
    QuadratureSpec,
    apply_generator,
    evolve_exact,
    heat_quadrature,
    integral_identity_check,
    laplace_transform_check,
    resolvent_exact,
    resolvent_quadrature,
    resolvent_residual,
    tau_gap_profile,
)

Q = QuadratureSpec()


def gauss_resolvent(x):
    """(1 - d^2/dx^2)^{-1} e^{-x^2} in closed form."""
    c = math.sqrt(math.pi) / 4 * math.exp(0.25)
    return c * (np.exp(-x) * erfc(0.5 - x) + np.exp(x) * erfc(0.5 + x))


def windowed_one(half=40.0):
    return ContinuousFunction(eval=lambda x: np.ones_like(x), sup_bound=1.0, name="one",
                              window=lambda eps: (-half, half))


def test_spec_validation(monkeypatch):
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=1e-5)
    with pytest.raises(ValueError):
        QuadratureSpec(rule="simpson")
    monkeypatch.setenv(RTOL_ENV, "1e-12")
    assert QuadratureSpec.from_env().rel_tol == 1e-12
    assert HEAT_GROWTH.M == 1.0 and HEAT_GROWTH.omega == 0.0


def test_time_zero_is_identity():
    f = bump()
    assert evolve_exact(f, 0.0) is f
    assert evolve_exact(f, 0.0, use_closed_form=False) is f


@pytest.mark.parametrize("rule", ["gauss", "adaptive"])
def test_quadrature_agrees_with_closed_form(rule):
    q = QuadratureSpec(rule=rule)
    g = gauss(1.0)
    x = np.linspace(-4, 4, 9)
    assert heat_quadrature(g, 0.25, np.array([0.0]), q)[0] == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    for t in (0.01, 0.25, 1.0):
        assert np.max(np.abs(heat_quadrature(g, t, x, q) - g.exact_evolution(t)(x))) < 1e-9


def test_quadrature_path_for_bump():
    b = bump()
    x = np.linspace(-5, 5, 41)
    for t in (0.02, 0.5, 3.0):
        quad = evolve_exact(b, t, use_closed_form=False)(x)
        assert np.max(np.abs(quad - b.exact_evolution(t)(x))) < 1e-12


def test_unit_mass():
    one = windowed_one()
    x = np.linspace(-3, 3, 7)
    for t in (0.1, 1.0, 5.0):
        assert np.allclose(heat_quadrature(one, t, x, Q), 1.0, atol=1e-10)


def test_runge_by_quadrature_against_scipy():
    r = runge()
    t, x = 0.3, 0.7
    k = lambda y: math.exp(-(x - y) ** 2 / (4 * t)) / math.sqrt(4 * math.pi * t) / (1 + y * y)
    ref = integrate.quad(k, -np.inf, np.inf, epsabs=1e-14, epsrel=1e-13)[0]
    assert evolve_exact(r, t)(x) == pytest.approx(ref, abs=1e-10)


def test_quadrature_budget_exhaustion_reports_tolerance():
    q = QuadratureSpec(max_panels=8, rel_tol=1e-14)
    wild = ContinuousFunction(eval=lambda x: np.sin(400 * x + 0.3), sup_bound=1.0, name="wild",
                              window=lambda eps: (-50.0, 50.0))
    with pytest.raises(QuadratureError) as e:
        heat_quadrature(wild, 1.0, np.array([0.0]), q)
    assert e.value.achieved > 0


def test_generator():
    x = np.linspace(-2, 2, 5)
    assert np.allclose(apply_generator(gauss(1.0))(x), (4 * x**2 - 2) * np.exp(-x**2))
    with pytest.raises(UnsupportedFunctionError):
        apply_generator(ContinuousFunction(eval=np.cos, sup_bound=1.0))


def test_resolvent_closed_form():
    x = np.linspace(-4, 4, 33)
    g = resolvent_exact(gauss(1.0), 1.0)
    assert np.max(np.abs(g(x) - gauss_resolvent(x))) < 1e-12


def test_resolvent_of_constant():
    one = windowed_one(200.0)
    x = np.linspace(-2, 2, 5)
    assert np.allclose(resolvent_quadrature(one, 1.0, x, Q), 1.0, atol=1e-10)
    assert np.allclose(resolvent_quadrature(one, 4.0, x, Q), 0.25, atol=1e-10)


@pytest.mark.parametrize("f", [gauss(1.0), bump(), runge()], ids=["gauss", "bump", "runge"])
def test_resolvent_residual(f):
    x = np.linspace(-4, 4, 41)
    for lam in (0.5, 1.0, 10.0):
        g = resolvent_exact(f, lam)
        assert np.max(np.abs(resolvent_residual(g, f, lam, x))) < 1e-6


def test_resolvent_approximates_identity_for_large_lambda():
    f, x = gauss(1.0), np.array([0.0, 0.5, 1.5])
    gaps = [np.max(np.abs(lam * resolvent_exact(f, lam)(x) - f(x))) for lam in (10.0, 100.0, 1000.0)]
    assert gaps[0] > gaps[1] > gaps[2]
    # lam (lam R f - f) = lam R f'' -> f'', whose largest modulus on x is |f''(0)| = 2
    assert gaps[2] * 1000 == pytest.approx(2.0, rel=0.01)
    assert gaps[1] * 100 == pytest.approx(2.0, rel=0.1)


def test_laplace_transform_matches_kernel():
    x = np.linspace(-4, 4, 17)
    lap = laplace_transform_check(gauss(1.0), 1.0, 25.0)
    assert np.max(np.abs(lap(x) - gauss_resolvent(x))) < 1e-6
    assert np.allclose(laplace_transform_check(constant(0.0), 1.0, 25.0)(x), 0.0)
    half = laplace_transform_check(windowed_one(), 2.0, 12.0)(np.array([0.0]))[0]
    assert half == pytest.approx(0.5, abs=1e-8)


def test_laplace_transform_requires_long_horizon():
    with pytest.raises(ConfigurationError):
        laplace_transform_check(gauss(1.0), 1.0, 10.0)


@pytest.mark.parametrize("f", [gauss(1.0), gauss(4.0), bump(), runge()], ids=["g1", "g4", "bump", "runge"])
def test_integral_identity(f):
    assert integral_identity_check(f, 0.3) < 1e-6


@given(st.floats(0.2, 3.0), st.floats(0.0, 2.0), st.floats(0.0, 2.0))
def test_gaussian_semigroup_property(a, s, t):
    g = gauss(a)
    x = np.linspace(-3, 3, 13)
    lhs = g.exact_evolution(s).exact_evolution(t)(x)
    rhs = g.exact_evolution(s + t)(x)
    assert np.allclose(lhs, rhs, atol=1e-14)


def test_tau_gap_profile_for_chirp():
    from tklab.function_space import chirp
    rows = tau_gap_profile(chirp(), [1e-4, 1e-2], 2.0)
    assert rows[0][1] < 1e-2 < rows[1][1]
    assert all(gap >= 0.1 for _, _, gap in rows)
