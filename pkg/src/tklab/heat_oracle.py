"""Exact heat flow on the line: Gauss-Weierstrass semigroup, generator and resolvent.

The flow is the forward heat equation ``u_t = u_xx``, so the generator is
``A f = f''`` and the semigroup is a contraction (M = 1, omega = 0).
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .function_space import (
    ContinuousFunction,
    PointCache,
    difference,
    gauss_legendre,
    local_sups,
)

RTOL_ENV = "TKLAB_QUAD_RTOL"

# exp(-KERNEL_Z**2) and exp(-KERNEL_R) are below 1e-18
KERNEL_Z = 6.5
KERNEL_R = 42.0


class QuadratureError(RuntimeError):
    def __init__(self, message, achieved):
        self.achieved = achieved
        super().__init__(f"{message} (achieved {achieved:.3e})")


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    rule: str = "gauss"  # "gauss": vectorized composite Gauss-Legendre; "adaptive": QUADPACK per point
    rel_tol: float = 1e-10
    window_halfwidth: float | None = None
    nodes: int = 10
    max_panels: int = 8192

    def __post_init__(self):
        if self.rule not in ("gauss", "adaptive"):
            raise ValueError(f"unknown quadrature rule {self.rule!r}")
        if not 0 < self.rel_tol < 1e-6:
            raise ValueError("rel_tol must lie in (0, 1e-6)")

    @classmethod
    def from_env(cls, **kw) -> "QuadratureSpec":
        if RTOL_ENV in os.environ and "rel_tol" not in kw:
            kw["rel_tol"] = float(os.environ[RTOL_ENV])
        return cls(**kw)


@dataclass(frozen=True)
class GrowthBound:
    M: float = 1.0
    omega: float = 0.0


HEAT_GROWTH = GrowthBound(1.0, 0.0)


def _support(f: ContinuousFunction, q: QuadratureSpec, eps: float) -> tuple[float, float]:
    if f.window is not None:
        return f.window(eps)
    if q.window_halfwidth is not None:
        return -q.window_halfwidth, q.window_halfwidth
    return -math.inf, math.inf


def _composite_gl(lo, hi, integrand, panels, nodes):
    """Composite Gauss-Legendre of ``integrand(row, s)`` over per-row intervals ``[lo, hi]``."""
    z, w = gauss_legendre(nodes)
    width = np.maximum(hi - lo, 0.0) / panels
    k = np.arange(panels)
    # (rows, panels, nodes)
    left = lo[:, None, None] + width[:, None, None] * k[None, :, None]
    s = left + 0.5 * width[:, None, None] * (z[None, None, :] + 1.0)
    vals = integrand(s.reshape(len(lo), -1)).reshape(s.shape)
    return 0.5 * width * np.einsum("rpn,n->r", vals, w)


def _converged_gl(lo, hi, integrand, q: QuadratureSpec, scale, panels0=8, chunk=1024):
    """Panel doubling until two successive composite rules agree to ``rel_tol * scale``."""
    out = np.empty(len(lo))
    for c0 in range(0, len(lo), chunk):
        sl = slice(c0, c0 + chunk)
        l, h = lo[sl], hi[sl]

        def fn(s, sl=sl):
            return integrand(sl, s)

        panels = panels0
        prev = _composite_gl(l, h, fn, panels, q.nodes)
        while True:
            panels *= 2
            cur = _composite_gl(l, h, fn, panels, q.nodes)
            err = np.max(np.abs(cur - prev)) if cur.size else 0.0
            tol = q.rel_tol * np.maximum(scale, np.abs(cur))
            if np.all(np.abs(cur - prev) <= tol):
                out[sl] = cur
                break
            if panels >= q.max_panels:
                raise QuadratureError("composite Gauss-Legendre did not converge", float(err))
            prev = cur
    return out


def _adaptive(lo, hi, integrand_scalar, q: QuadratureSpec, scale):
    out = np.empty(len(lo))
    for i, (a, b) in enumerate(zip(lo, hi)):
        if b <= a:
            out[i] = 0.0
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(lambda s: integrand_scalar(i, s), a, b,
                                      epsabs=0.1 * q.rel_tol * scale, epsrel=q.rel_tol, limit=2000)
        if err > q.rel_tol * max(scale, abs(val)):
            raise QuadratureError("adaptive quadrature did not converge", err)
        out[i] = val
    return out


# ---------------------------------------------------------------- semigroup


def heat_quadrature(f: ContinuousFunction, t: float, x, q: QuadratureSpec) -> np.ndarray:
    """``(4 pi t)^{-1/2} int exp(-(x-y)^2/(4t)) f(y) dy`` by quadrature in ``y = x + 2 sqrt(t) z``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if t == 0:
        return f(x)
    r = 2.0 * math.sqrt(t)
    scale = f.sup_bound if math.isfinite(f.sup_bound) else 1.0
    a, b = _support(f, q, 0.01 * q.rel_tol)
    lo = np.clip((a - x) / r, -KERNEL_Z, KERNEL_Z)
    hi = np.clip((b - x) / r, -KERNEL_Z, KERNEL_Z)
    c = 1.0 / math.sqrt(math.pi)
    if q.rule == "adaptive":
        return _adaptive(lo, hi, lambda i, z: c * math.exp(-z * z) * float(f(x[i] + r * z)), q, scale)
    return _converged_gl(lo, hi, lambda sl, z: c * np.exp(-z * z) * f(x[sl, None] + r * z), q, scale)


def evolve_exact(f: ContinuousFunction, t: float, q: QuadratureSpec | None = None,
                 use_closed_form: bool = True) -> ContinuousFunction:
    """``T(t) f``; closed-form evolutions are used when available, quadrature otherwise."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return f
    if use_closed_form and f.exact_evolution is not None:
        return f.exact_evolution(t)
    q = q or QuadratureSpec.from_env()
    window = None
    if f.window is not None:
        w = 2.0 * math.sqrt(t) * KERNEL_Z

        def widened(eps):
            a, b = f.window(eps)
            return a - w, b + w
        window = widened

    return ContinuousFunction(
        eval=PointCache(lambda x: heat_quadrature(f, t, x, q)),
        sup_bound=f.sup_bound,
        decays_at_infinity=f.decays_at_infinity,
        name=f"T({t:g}){f.name}",
        window=window,
        resolution=f.resolution,
    )


def apply_generator(f: ContinuousFunction) -> ContinuousFunction:
    """``A f = f''`` from the closed form."""
    return f.second()


# ---------------------------------------------------------------- resolvent


def resolvent_quadrature(f: ContinuousFunction, lam: float, x, q: QuadratureSpec) -> np.ndarray:
    """``(1/(2 sqrt(lam))) int exp(-sqrt(lam)|x-y|) f(y) dy``, split at ``y = x``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    k = math.sqrt(lam)
    scale = (f.sup_bound if math.isfinite(f.sup_bound) else 1.0) / lam
    a, b = _support(f, q, 0.01 * q.rel_tol)
    total = np.zeros_like(x)
    # y = x + sign * r / k with r in [0, KERNEL_R]
    for sign in (1.0, -1.0):
        if sign > 0:
            lo, hi = k * (a - x), k * (b - x)
        else:
            lo, hi = k * (x - b), k * (x - a)
        lo = np.clip(lo, 0.0, KERNEL_R)
        hi = np.clip(hi, 0.0, KERNEL_R)
        if q.rule == "adaptive":
            part = _adaptive(lo, hi, lambda i, r, s=sign: math.exp(-r) * float(f(x[i] + s * r / k)), q, scale * lam)
        else:
            part = _converged_gl(lo, hi, lambda sl, r, s=sign: np.exp(-r) * f(x[sl, None] + s * r / k),
                                 q, scale * lam, panels0=16)
        total += part
    return total / (2.0 * lam)


def resolvent_exact(f: ContinuousFunction, lam: float, q: QuadratureSpec | None = None) -> ContinuousFunction:
    """``R(lam, A) f``, the solution ``g`` of ``lam g - g'' = f`` that is bounded on the line."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    q = q or QuadratureSpec.from_env()
    window = None
    if f.window is not None:
        w = KERNEL_R / math.sqrt(lam)

        def widened(eps):
            a, b = f.window(eps)
            return a - w, b + w
        window = widened

    return ContinuousFunction(
        eval=PointCache(lambda x: resolvent_quadrature(f, lam, x, q)),
        sup_bound=f.sup_bound / lam,
        decays_at_infinity=f.decays_at_infinity,
        name=f"R({lam:g}){f.name}",
        window=window,
        resolution=f.resolution,
    )


def resolvent_residual(g: ContinuousFunction, f: ContinuousFunction, lam: float, x, h: float = 1e-3) -> np.ndarray:
    """Pointwise ``lam g - g'' - f`` with ``g''`` by a fourth-order central difference."""
    x = np.asarray(x, dtype=float)
    g2 = (-g(x + 2 * h) + 16 * g(x + h) - 30 * g(x) + 16 * g(x - h) - g(x - 2 * h)) / (12 * h * h)
    return lam * g(x) - g2 - f(x)


def laplace_transform_check(f: ContinuousFunction, lam: float, t_max: float,
                            q: QuadratureSpec | None = None) -> ContinuousFunction:
    """``int_0^{t_max} e^{-lam t} T(t) f dt`` by adaptive time quadrature of the evolved orbit.

    The neglected tail is at most ``e^{-lam t_max} sup|f| / lam``.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if lam * t_max < 20:
        raise ConfigurationError(f"lam * t_max = {lam * t_max:g} < 20; tail bound above tolerance")
    q = q or QuadratureSpec.from_env()

    def value(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))

        def orbit(t):
            return math.exp(-lam * t) * evolve_exact(f, t, q)(x)

        # the orbit is smooth but varies fastest near t = 0; split on a geometric grid
        edges = [0.0] + [t for t in np.geomspace(1e-3, t_max, 12)]
        # quad_vec needs a positive absolute tolerance or a zero orbit never converges
        atol = 0.01 * q.rel_tol * max(f.sup_bound, np.finfo(float).tiny)
        total = np.zeros_like(x)
        for a, b in zip(edges, edges[1:]):
            val, _ = integrate.quad_vec(orbit, a, b, epsrel=q.rel_tol, epsabs=atol)
            total += val
        return total

    return ContinuousFunction(
        eval=PointCache(value),
        sup_bound=f.sup_bound / lam,
        decays_at_infinity=f.decays_at_infinity,
        name=f"L({lam:g}){f.name}",
        window=None,
        resolution=f.resolution,
    )


def laplace_tail_bound(f: ContinuousFunction, lam: float, t_max: float) -> float:
    return math.exp(-lam * t_max) * f.sup_bound / lam


def integral_identity_check(f: ContinuousFunction, t: float, q: QuadratureSpec | None = None,
                            l_max: float = 4.0, points: int = 81) -> float:
    """``max_{|x|<=l_max} |T(t)f - f - int_0^t T(s) f'' ds|``.

    The left side uses the closed-form evolution when present; the time
    integral evolves ``f''`` by spatial quadrature, so the two sides share no code path.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    q = q or QuadratureSpec.from_env()
    af = apply_generator(f)
    a, b = f.window(1e-16) if f.window is not None else (-l_max, l_max)
    bound = float(np.max(np.abs(af(np.linspace(a, b, 4097))))) or 1.0
    af = ContinuousFunction(eval=af.eval, sup_bound=bound, decays_at_infinity=f.decays_at_infinity,
                            name=af.name, window=f.window, resolution=f.resolution)
    x = np.linspace(-l_max, l_max, points)
    lhs = evolve_exact(f, t, q)(x) - f(x)

    def orbit(s):
        return heat_quadrature(af, s, x, q)

    rhs, _ = integrate.quad_vec(orbit, 0.0, t, epsrel=1e-10, epsabs=1e-12)
    return float(np.max(np.abs(lhs - rhs)))


def tau_gap_profile(f: ContinuousFunction, times, level: float, q: QuadratureSpec | None = None,
                    far_field: float | None = None, far_width: float = 8.0, probe_density: int = 512):
    """For each t: ``sn_level(T(t)f - f)`` and a far-field estimate of ``||T(t)f - f||_inf``.

    The far-field window starts where ``4 t x^2 >= 10``, i.e. beyond the
    diffusion front of an oscillation of local frequency ``x``.
    """
    rows = []
    for t in times:
        d = difference(evolve_exact(f, t, q), f)
        sn = local_sups(d, [level])[float(level)]
        x0 = far_field if far_field is not None else math.sqrt(10.0 / (4.0 * t))
        xs = np.linspace(x0, x0 + far_width, int(far_width * probe_density * max(1.0, x0)) + 1)
        gap = float(np.max(np.abs(d(xs))))
        rows.append((float(t), sn, gap))
    return rows


Kernel = Callable[[np.ndarray], np.ndarray]
