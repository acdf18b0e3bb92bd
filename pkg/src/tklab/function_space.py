"""Continuous-side functions, local sup seminorms and the analytic test catalog."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import minimize_scalar
from scipy.special import ndtr

DEFAULT_LEVELS = (1.0, 2.0, 4.0, 8.0)
DEFAULT_PROBE_DENSITY = 64
SUP_TOL = 1e-10


class EvaluationError(ValueError):
    """A function returned a non-finite value at a probe point."""

    def __init__(self, name, x):
        self.x = float(x)
        super().__init__(f"non-finite evaluation of {name or 'function'} at x={self.x!r}")


Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ContinuousFunction:
    """A vectorized real function on the line with a known bound on ``|f|``.

    ``window(eps)`` returns an interval outside which ``|f| <= eps * sup_bound``
    (``None`` for functions that do not decay).  ``resolution`` is the smallest
    feature length; probes are refined to resolve it.  ``knots`` are points where
    the function may have kinks; suprema always sample them.
    """

    eval: Evaluator
    sup_bound: float
    second_derivative: Evaluator | None = None
    fourth_derivative: Evaluator | None = None
    exact_evolution: Callable[[float], "ContinuousFunction"] | None = None
    decays_at_infinity: bool = False
    name: str = ""
    window: Callable[[float], tuple[float, float]] | None = None
    resolution: float | None = None
    knots: np.ndarray | None = field(default=None, compare=False)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(self.eval(x), dtype=float) * np.ones_like(x)

    def checked(self, x) -> np.ndarray:
        """Evaluate and raise :class:`EvaluationError` on the first non-finite value."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = self(x)
        bad = ~np.isfinite(y)
        if bad.any():
            raise EvaluationError(self.name, x[np.argmax(bad)])
        return y

    def second(self) -> "ContinuousFunction":
        if self.second_derivative is None:
            raise UnsupportedFunctionError(f"{self.name or 'function'} has no closed-form second derivative")
        return ContinuousFunction(
            eval=self.second_derivative,
            sup_bound=math.inf,
            second_derivative=self.fourth_derivative,
            decays_at_infinity=self.decays_at_infinity,
            name=f"({self.name})''",
            window=self.window,
            resolution=self.resolution,
        )


class UnsupportedFunctionError(ValueError):
    pass


def difference(f: ContinuousFunction, g: ContinuousFunction, name: str | None = None) -> ContinuousFunction:
    """Pointwise ``f - g``."""
    window = None
    if f.window is not None and g.window is not None:
        def union(eps, fw=f.window, gw=g.window):
            a, b = fw(eps), gw(eps)
            return min(a[0], b[0]), max(a[1], b[1])
        window = union
    res = [r for r in (f.resolution, g.resolution) if r is not None]
    knots = [k for k in (f.knots, g.knots) if k is not None]
    return ContinuousFunction(
        eval=lambda x: f(x) - g(x),
        sup_bound=f.sup_bound + g.sup_bound,
        decays_at_infinity=f.decays_at_infinity and g.decays_at_infinity,
        name=name or f"{f.name} - {g.name}",
        window=window,
        resolution=min(res) if res else None,
        knots=np.unique(np.concatenate(knots)) if knots else None,
    )


def scaled(f: ContinuousFunction, c: float) -> ContinuousFunction:
    return ContinuousFunction(
        eval=lambda x: c * f(x),
        sup_bound=abs(c) * f.sup_bound,
        second_derivative=None if f.second_derivative is None else (lambda x: c * f.second_derivative(x)),
        fourth_derivative=None if f.fourth_derivative is None else (lambda x: c * f.fourth_derivative(x)),
        exact_evolution=None if f.exact_evolution is None else (lambda t: scaled(f.exact_evolution(t), c)),
        decays_at_infinity=f.decays_at_infinity,
        name=f"{c:g}*{f.name}",
        window=f.window,
        resolution=f.resolution,
        knots=f.knots,
    )


def shifted(f: ContinuousFunction, s: float) -> ContinuousFunction:
    """``x -> f(x - s)``."""
    def window(eps):
        a, b = f.window(eps)
        return a + s, b + s
    return ContinuousFunction(
        eval=lambda x: f(np.asarray(x) - s),
        sup_bound=f.sup_bound,
        second_derivative=None if f.second_derivative is None else (lambda x: f.second_derivative(np.asarray(x) - s)),
        fourth_derivative=None if f.fourth_derivative is None else (lambda x: f.fourth_derivative(np.asarray(x) - s)),
        exact_evolution=None if f.exact_evolution is None else (lambda t: shifted(f.exact_evolution(t), s)),
        decays_at_infinity=f.decays_at_infinity,
        name=f"{f.name}(x-{s:g})",
        window=None if f.window is None else window,
        resolution=f.resolution,
        knots=None if f.knots is None else f.knots + s,
    )


class PointCache:
    """Memoizes an expensive vectorized evaluator on exact float keys."""

    def __init__(self, fn: Evaluator):
        self.fn = fn
        self.store: dict[float, float] = {}

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        keys = flat.tolist()
        missing = [i for i, k in enumerate(keys) if k not in self.store]
        if missing:
            xs = flat[missing]
            ys = np.asarray(self.fn(xs), dtype=float) * np.ones_like(xs)
            self.store.update(zip(xs.tolist(), ys.tolist()))
        return np.array([self.store[k] for k in keys], dtype=float).reshape(x.shape)


@lru_cache(maxsize=None)
def gauss_legendre(n: int):
    z, w = np.polynomial.legendre.leggauss(n)
    z.setflags(write=False)
    w.setflags(write=False)
    return z, w


# ---------------------------------------------------------------- suprema


def _lattice(lo: float, hi: float, density: float) -> np.ndarray:
    # integer lattice j/density keeps probe sets nested across densities and levels
    d = float(density)
    j0, j1 = math.ceil(lo * d), math.floor(hi * d)
    pts = np.arange(j0, j1 + 1, dtype=float) / d
    return np.unique(np.concatenate([[lo], pts, [hi]]))


def _refine(f: ContinuousFunction, xs: np.ndarray, ys: np.ndarray, lo: float, hi: float, k: int = 6) -> float:
    """Polish the sampled maximum of ``|f|`` by bounded Brent search near the best samples."""
    a = np.abs(ys)
    best = float(a.max()) if a.size else 0.0
    if a.size < 3 or best == 0.0:
        return best
    idx = np.argsort(a)[::-1][: min(k, a.size)]
    for i in idx:
        left, right = xs[max(i - 1, 0)], xs[min(i + 1, a.size - 1)]
        if right <= left:
            continue
        res = minimize_scalar(
            lambda x: -abs(float(f.checked([x])[0])),
            bounds=(max(left, lo), min(right, hi)),
            method="bounded",
            options={"xatol": 1e-12 * max(1.0, abs(left))},
        )
        best = max(best, -float(res.fun))
    return best


def _with_knots(f: ContinuousFunction, xs: np.ndarray, lo: float, hi: float) -> np.ndarray:
    if f.knots is None:
        return xs
    k = f.knots[(f.knots >= lo) & (f.knots <= hi)]
    return np.unique(np.concatenate([xs, k]))


def _density_for(f: ContinuousFunction, base: float) -> float:
    d = float(base)
    if f.resolution:
        d = max(d, 8.0 / f.resolution)
    return float(2 ** math.ceil(math.log2(d)))


def local_sups(f: ContinuousFunction, levels: Sequence[float], probe_density: float = DEFAULT_PROBE_DENSITY,
               tol: float = SUP_TOL, max_doublings: int = 4) -> dict[float, float]:
    """``sup_{|x|<=l} |f(x)|`` for every level from one shared probe lattice.

    The lattice density is doubled until no level changes by more than ``tol``.
    """
    levels = sorted(float(l) for l in levels)
    if not levels or levels[0] <= 0:
        raise ValueError("levels must be positive")
    top = levels[-1]
    density = _density_for(f, probe_density)
    prev = None
    for _ in range(max_doublings + 1):
        xs = _with_knots(f, _lattice(-top, top, density), -top, top)
        xs = np.unique(np.concatenate([xs, [-l for l in levels], levels]))
        ys = f.checked(xs)
        vals = {}
        for l in levels:
            m = np.abs(xs) <= l
            vals[l] = _refine(f, xs[m], ys[m], -l, l)
        if prev is not None and all(abs(vals[l] - prev[l]) < tol for l in levels):
            return vals
        prev = vals
        density *= 2
    return prev


def seminorm(f: ContinuousFunction, l: float, probe_density: float = DEFAULT_PROBE_DENSITY) -> float:
    """``sn_l(f) = sup_{|x| <= l} |f(x)|`` approximated by refined dense sampling."""
    return local_sups(f, [l], probe_density)[float(l)]


def sup_norm_estimate(f: ContinuousFunction, core: float = 64.0, probe_density: float = DEFAULT_PROBE_DENSITY,
                      tail_eps: float = 1e-12) -> float:
    """Estimate ``||f||_inf``.

    Decaying functions are probed densely on their effective support and
    geometrically out to the radius where the tail drops below ``tail_eps``;
    the rest are probed on ``[-core, core]``.
    """
    if f.decays_at_infinity and f.window is not None:
        scale = f.sup_bound if math.isfinite(f.sup_bound) and f.sup_bound > 0 else 1.0
        lo, hi = f.window(tail_eps / scale)
        dense_lo, dense_hi = max(lo, -core), min(hi, core)
        pieces = [_lattice(dense_lo, dense_hi, _density_for(f, probe_density))]
        if lo < dense_lo:
            pieces.append(-np.geomspace(-dense_lo, -lo, 64))
        if hi > dense_hi:
            pieces.append(np.geomspace(dense_hi, hi, 64))
        xs = _with_knots(f, np.unique(np.concatenate(pieces)), lo, hi)
    else:
        lo, hi = -core, core
        xs = _with_knots(f, _lattice(lo, hi, _density_for(f, probe_density)), lo, hi)
    ys = f.checked(xs)
    est = _refine(f, xs, ys, float(xs[0]), float(xs[-1]))
    # every local sup is itself a lower bound for the norm
    return max(est, max(local_sups(f, DEFAULT_LEVELS, probe_density).values()))


@dataclass(frozen=True)
class SeminormFamily:
    """The local sup seminorms ``sn_l`` for an increasing list of levels."""

    levels: tuple[float, ...] = DEFAULT_LEVELS
    probe_density: float = DEFAULT_PROBE_DENSITY

    def __post_init__(self):
        lv = tuple(float(l) for l in self.levels)
        if not lv or any(l <= 0 for l in lv) or any(b <= a for a, b in zip(lv, lv[1:])):
            raise ValueError(f"levels must be positive and increasing, got {self.levels!r}")
        object.__setattr__(self, "levels", lv)

    def seminorm(self, f: ContinuousFunction, l: float) -> float:
        if float(l) not in self.levels:
            raise ValueError(f"level {l} not in family {self.levels}")
        return seminorm(f, l, self.probe_density)

    def all(self, f: ContinuousFunction) -> dict[float, float]:
        return local_sups(f, self.levels, self.probe_density)


@dataclass
class TauTable:
    errors: np.ndarray  # (len(seq), len(levels))
    levels: tuple[float, ...]
    sup_norms: np.ndarray
    monotone_tail: dict[float, bool] = field(default_factory=dict)


def tau_convergence_table(seq: Sequence[ContinuousFunction], limit: ContinuousFunction,
                          family: SeminormFamily) -> TauTable:
    """Errors ``sn_l(seq[n] - limit)`` for every n and level, with sup-norm estimates alongside."""
    if len(seq) == 0:
        raise ValueError("empty sequence")
    errs = np.empty((len(seq), len(family.levels)))
    sups = np.empty(len(seq))
    for n, f in enumerate(seq):
        d = difference(f, limit)
        vals = family.all(d)
        errs[n] = [vals[l] for l in family.levels]
        sups[n] = sup_norm_estimate(d)
    monotone = {}
    for j, l in enumerate(family.levels):
        col = errs[:, j]
        tail = col[len(col) // 2:]
        monotone[l] = bool(np.all(np.diff(tail) <= 1e-15))
    return TauTable(errs, family.levels, sups, monotone)


# ---------------------------------------------------------------- catalog


def gauss(a: float = 1.0, amp: float = 1.0) -> ContinuousFunction:
    """``amp * exp(-a x^2)``; its heat evolution is again a Gaussian."""
    a, amp = float(a), float(amp)

    def f(x):
        return amp * np.exp(-a * x * x)

    def f2(x):
        return amp * (4 * a * a * x * x - 2 * a) * np.exp(-a * x * x)

    def f4(x):
        x2 = x * x
        return amp * (16 * a**4 * x2 * x2 - 48 * a**3 * x2 + 12 * a * a) * np.exp(-a * x2)

    def evolve(t):
        if t < 0:
            raise ValueError("t must be nonnegative")
        s = 1.0 + 4.0 * a * t
        return gauss(a / s, amp / math.sqrt(s))

    def window(eps):
        r = math.sqrt(max(math.log(1.0 / eps), 0.0) / a)
        return -r, r

    return ContinuousFunction(
        eval=f, sup_bound=abs(amp), second_derivative=f2, fourth_derivative=f4,
        exact_evolution=evolve, decays_at_infinity=True, name=f"gauss({a:g})" if amp == 1 else f"{amp:g}*gauss({a:g})",
        window=window, resolution=0.25 / math.sqrt(a),
    )


def bump(center: float = 0.0, radius: float = 2.0, power: int = 5) -> ContinuousFunction:
    """``(1 - ((x-c)/r)^2)^p`` on ``|x-c| < r``, zero outside; C^{p-1} with compact support."""
    c, r = float(center), float(radius)
    P = Polynomial([1.0, 0.0, -1.0]) ** power
    P2 = P.deriv(2)
    P4 = P.deriv(4)

    def piece(poly, k):
        def g(x):
            s = (np.asarray(x, dtype=float) - c) / r
            return np.where(np.abs(s) < 1.0, poly(np.clip(s, -1, 1)), 0.0) / r**k
        return g

    def evolve(t):
        if t < 0:
            raise ValueError("t must be nonnegative")
        if t == 0:
            return fn
        beta = math.sqrt(2.0 * t) / r

        def u(x):
            mu = (np.asarray(x, dtype=float) - c) / r
            return _truncated_poly_gauss(P.coef, mu, beta)

        def window(eps):
            w = r + 2.0 * math.sqrt(t) * math.sqrt(max(math.log(1.0 / eps), 1.0))
            return c - w, c + w

        return ContinuousFunction(eval=u, sup_bound=1.0, decays_at_infinity=True,
                                  name=f"T({t:g}){fn.name}", window=window, resolution=fn.resolution)

    fn = ContinuousFunction(
        eval=piece(P, 0), sup_bound=1.0, second_derivative=piece(P2, 2), fourth_derivative=piece(P4, 4),
        exact_evolution=evolve, decays_at_infinity=True, name=f"bump({c:g},{r:g})",
        window=lambda eps: (c - r, c + r), resolution=r / 8.0,
    )
    return fn


def _truncated_poly_gauss(coef, mu, beta):
    """``sum_k coef[k] * int_{-1}^{1} s^k N(s; mu, beta^2) ds``.

    Narrow kernels use the truncated-normal moment recurrence; it loses digits
    once ``beta`` is O(1), where the integrand is smooth enough for a fixed
    high-order Gauss-Legendre rule on [-1, 1].
    """
    mu = np.asarray(mu, dtype=float)
    if beta >= 0.25:
        s, w = gauss_legendre(64)
        dens = np.exp(-0.5 * ((s[None, :] - mu.reshape(-1, 1)) / beta) ** 2) / (math.sqrt(2 * math.pi) * beta)
        return ((dens * np.polynomial.polynomial.polyval(s, coef)) @ w).reshape(mu.shape)
    a = (-1.0 - mu) / beta
    b = (1.0 - mu) / beta
    m0 = np.where(mu < 0, ndtr(-a) - ndtr(-b), ndtr(b) - ndtr(a))
    pa = np.exp(-0.5 * a * a) / (math.sqrt(2 * math.pi) * beta)
    pb = np.exp(-0.5 * b * b) / (math.sqrt(2 * math.pi) * beta)
    b2 = beta * beta
    moments = [m0]
    prev2, prev = None, m0
    total = coef[0] * m0
    for k in range(1, len(coef)):
        # E_k = mu E_{k-1} + beta^2 (k-1) E_{k-2} - beta^2 [s^{k-1} N(s)]_{-1}^{1}
        edge = pb - ((-1.0) ** (k - 1)) * pa
        cur = mu * prev - b2 * edge
        if k >= 2:
            cur = cur + b2 * (k - 1) * prev2
        prev2, prev = prev, cur
        moments.append(cur)
        total = total + coef[k] * cur
    return total


def runge() -> ContinuousFunction:
    def window(eps):
        r = math.sqrt(max(1.0 / eps - 1.0, 0.0))
        return -r, r
    return ContinuousFunction(
        eval=lambda x: 1.0 / (1.0 + x * x), sup_bound=1.0,
        second_derivative=lambda x: (6 * x * x - 2) / (1 + x * x) ** 3,
        fourth_derivative=lambda x: 24 * (5 * x**4 - 10 * x * x + 1) / (1 + x * x) ** 5,
        decays_at_infinity=True, name="runge", window=window, resolution=0.25,
    )


def chirp() -> ContinuousFunction:
    """``sin(x^2)``: bounded, not uniformly continuous, no decay."""
    def evolve(t):
        if t < 0:
            raise ValueError("t must be nonnegative")
        if t == 0:
            return fn
        z = 1.0 - 4.0j * t

        def u(x):
            x = np.asarray(x, dtype=float)
            return np.imag(np.exp(1j * x * x / z) / np.sqrt(z))

        return ContinuousFunction(eval=u, sup_bound=1.0, name=f"T({t:g})chirp")

    fn = ContinuousFunction(
        eval=lambda x: np.sin(x * x), sup_bound=1.0,
        second_derivative=lambda x: 2 * np.cos(x * x) - 4 * x * x * np.sin(x * x),
        exact_evolution=evolve, decays_at_infinity=False, name="chirp",
    )
    return fn


def constant(c: float = 1.0) -> ContinuousFunction:
    c = float(c)

    def evolve(t):
        return fn

    fn = ContinuousFunction(
        eval=lambda x: np.full_like(np.asarray(x, dtype=float), c), sup_bound=abs(c),
        second_derivative=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        fourth_derivative=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        exact_evolution=evolve, decays_at_infinity=(c == 0.0), name=f"const({c:g})",
        window=(lambda eps: (0.0, 0.0)) if c == 0.0 else None,
    )
    return fn


def sine() -> ContinuousFunction:
    def evolve(t):
        return scaled(sine(), math.exp(-t))
    return ContinuousFunction(
        eval=np.sin, sup_bound=1.0, second_derivative=lambda x: -np.sin(x),
        fourth_derivative=np.sin, exact_evolution=evolve, name="sine",
    )


def catalog() -> dict[str, ContinuousFunction]:
    return {
        "gauss(1)": gauss(1.0),
        "gauss(4)": gauss(4.0),
        "bump": bump(0.0, 2.0),
        "runge": runge(),
        "chirp": chirp(),
        "sine": sine(),
        "one": constant(1.0),
        "zero": constant(0.0),
    }


_FACTORY = re.compile(r"^(gauss|bump|const)\(([^)]*)\)$")


def resolve(name: str) -> ContinuousFunction:
    """Look up a catalog entry, also accepting ``gauss(a)``, ``bump(c,r)`` and ``const(c)``."""
    cat = catalog()
    if name in cat:
        return cat[name]
    m = _FACTORY.match(name.replace(" ", ""))
    if m:
        args = [float(v) for v in m.group(2).split(",") if v]
        return {"gauss": gauss, "bump": bump, "const": constant}[m.group(1)](*args)
    raise KeyError(f"unknown function {name!r}; known: {sorted(cat)}")
