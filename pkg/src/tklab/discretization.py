"""Grids, sampling/prolongation operators and the discrete heat generator."""

from __future__ import annotations

import csv
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal, expm
from scipy.linalg.lapack import dgttrf, dgttrs

from .function_space import ContinuousFunction, EvaluationError

METHODS = ("pade_expm", "spectral", "backward_euler", "crank_nicolson")
MAX_N = 2**26


class StabilityError(ArithmeticError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on ``(-l, l]`` with ``N`` nodes per unit length."""

    l: int
    N: int

    @property
    def dx(self) -> float:
        return 1.0 / self.N

    @property
    def n(self) -> int:
        return 2 * self.l * self.N

    @property
    def k(self) -> np.ndarray:
        return np.arange(-self.l * self.N + 1, self.l * self.N + 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.k / self.N

    def __str__(self):
        return f"({self.l},{self.N})"


def make_grid(l: int, N: int) -> GridSpec:
    if int(l) != l or int(N) != N:
        raise ValueError("l and N must be integers")
    if l < 1 or N < 2:
        raise ValueError(f"need l >= 1 and N >= 2, got l={l}, N={N}")
    if 2 * l * N > MAX_N:
        raise ValueError(f"grid too large: n = {2 * l * N}")
    return GridSpec(int(l), int(N))


@dataclass(frozen=True)
class GridVector:
    grid: GridSpec
    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            i = int(np.argmax(~np.isfinite(v)))
            raise ValueError(f"non-finite value at k={self.grid.k[i]}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def norm(self) -> float:
        """Discrete sup norm."""
        return float(np.max(np.abs(self.values)))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "x_k", "value"])
            for k, x, v in zip(self.grid.k, self.grid.nodes, self.values):
                w.writerow([int(k), repr(float(x)), repr(float(v))])

    @classmethod
    def from_csv(cls, path, grid: GridSpec) -> "GridVector":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        ks = np.array([int(r["k"]) for r in rows])
        if not np.array_equal(ks, grid.k):
            raise ValueError("CSV indices do not match grid")
        return cls(grid, np.array([float(r["value"]) for r in rows]))


def sample(f: ContinuousFunction, g: GridSpec) -> GridVector:
    """``(P_n f)_k = f(x_k)``."""
    try:
        return GridVector(g, f.checked(g.nodes))
    except EvaluationError as e:
        raise EvaluationError(f.name, e.x) from None


def prolong(u: GridVector) -> ContinuousFunction:
    """Piecewise-linear hat-function expansion ``sum_k u_k B_k``.

    Tapers linearly to zero on ``[-l, -l+dx]`` and ``[l, l+dx]`` and vanishes
    outside, so the result is continuous on the whole line.
    """
    g = u.grid
    xp = np.concatenate([[-float(g.l)], g.nodes, [g.l + g.dx]])
    fp = np.concatenate([[0.0], u.values, [0.0]])

    def ev(x):
        return np.interp(x, xp, fp, left=0.0, right=0.0)

    return ContinuousFunction(
        eval=ev, sup_bound=u.norm, decays_at_infinity=True, name=f"E{g}u",
        window=lambda eps: (xp[0], xp[-1]), resolution=g.dx, knots=xp,
    )


def project(f: ContinuousFunction, g: GridSpec) -> ContinuousFunction:
    """``pi_n f = E_n P_n f``."""
    return prolong(sample(f, g))


@dataclass(frozen=True)
class TridiagOperator:
    grid: GridSpec
    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def matvec(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        out = self.diag.reshape((-1,) + (1,) * (u.ndim - 1)) * u
        off = (-1,) + (1,) * (u.ndim - 1)
        out[:-1] += self.sup.reshape(off) * u[1:]
        out[1:] += self.sub.reshape(off) * u[:-1]
        return out

    def __matmul__(self, u):
        if isinstance(u, GridVector):
            return GridVector(self.grid, self.matvec(u.values))
        return self.matvec(u)

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sup, 1) + np.diag(self.sub, -1)

    def shifted(self, lam: float) -> "TridiagOperator":
        """``lam I - A``."""
        return TridiagOperator(self.grid, -self.sub, lam - self.diag, -self.sup)


def build_generator(g: GridSpec) -> TridiagOperator:
    """Second-difference operator ``(u_{k+1} - 2u_k + u_{k-1}) / dx^2`` with zero ghost values."""
    c = g.N * g.N
    n = g.n
    sub = np.full(n - 1, float(c))
    sup = np.full(n - 1, float(c))
    diag = np.full(n, -2.0 * c)
    for a in (sub, sup, diag):
        a.setflags(write=False)
    return TridiagOperator(g, sub, diag, sup)


def thomas_solve(sub, diag, sup, rhs):
    """Thomas algorithm for a tridiagonal system; ``rhs`` may carry extra columns.

    No pivoting: intended for diagonally dominant matrices.
    """
    n = len(diag)
    d = np.array(rhs, dtype=float, copy=True)
    c = np.empty(n - 1)
    b0 = diag[0]
    if n > 1:
        c[0] = sup[0] / b0
    d[0] = d[0] / b0
    for i in range(1, n):
        m = diag[i] - sub[i - 1] * c[i - 1]
        if i < n - 1:
            c[i] = sup[i] / m
        d[i] = (d[i] - sub[i - 1] * d[i - 1]) / m
    for i in range(n - 2, -1, -1):
        d[i] -= c[i] * d[i + 1]
    return d


def resolvent_solve(A: TridiagOperator, lam: float, rhs: GridVector) -> GridVector:
    """Solve ``(lam I - A) u = rhs``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    B = A.shifted(lam)
    return GridVector(A.grid, thomas_solve(B.sub, B.diag, B.sup, rhs.values), {"lambda": lam})


# ---------------------------------------------------------------- time evolution

_EXPM_CACHE: "OrderedDict[tuple, np.ndarray]" = OrderedDict()
_EXPM_CACHE_SIZE = 6
_SPECTRAL_CACHE: dict = {}


def propagator(A: TridiagOperator, t: float) -> np.ndarray:
    """Dense ``exp(tA)`` by Pade scaling and squaring; memoized per (grid, t)."""
    key = (A.grid, float(t), A.diag.tobytes()[:64])
    if key in _EXPM_CACHE:
        _EXPM_CACHE.move_to_end(key)
        return _EXPM_CACHE[key]
    P = expm(t * A.to_dense())
    P.setflags(write=False)
    _EXPM_CACHE[key] = P
    while len(_EXPM_CACHE) > _EXPM_CACHE_SIZE:
        _EXPM_CACHE.popitem(last=False)
    return P


def spectral_pair(A: TridiagOperator):
    """Eigenpairs of the symmetric tridiagonal ``A``."""
    key = (A.grid, A.diag.tobytes()[:64])
    if key not in _SPECTRAL_CACHE:
        w, V = eigh_tridiagonal(A.diag, A.sup)
        _SPECTRAL_CACHE.clear()
        _SPECTRAL_CACHE[key] = (w, V)
    return _SPECTRAL_CACHE[key]


def spectral_apply(A: TridiagOperator, u: np.ndarray, t) -> np.ndarray:
    """``exp(tA) u`` through the eigendecomposition; ``t`` may be an array of times."""
    w, V = spectral_pair(A)
    u = np.asarray(u, dtype=float)
    c = V.T @ u
    t = np.asarray(t, dtype=float)
    if t.ndim == 0:
        if t == 0:
            return u.copy()
        return V @ (np.exp(t * w).reshape((-1,) + (1,) * (c.ndim - 1)) * c)
    out = np.einsum("ij,tj->ti", V, np.exp(np.outer(t, w)) * c)
    out[t == 0] = u  # exact identity rather than V V^T u
    return out


def default_substeps(method: str, t: float, g: GridSpec) -> int:
    # mesh ratio h/dx^2 = 1/2 keeps the CN step matrix nonnegative; BE is
    # unconditionally stable, the smaller step only keeps its O(h) error below O(dx^2)
    if method == "crank_nicolson":
        return max(1, math.ceil(t * g.N * g.N * 2))
    if method == "backward_euler":
        return max(1, math.ceil(t * g.N * g.N * 4))
    return 1


def _step_solver(A: TridiagOperator, a: float):
    """Factor ``I - a A`` once; return a solve closure."""
    dl, d, du = -a * A.sub, 1.0 - a * A.diag, -a * A.sup
    dl, d, du, du2, ipiv, info = dgttrf(dl, d, du)
    if info != 0:
        raise StabilityError(f"singular step matrix (info={info})")

    def solve(b):
        x, info = dgttrs(dl, d, du, du2, ipiv, b)
        return x

    return solve


def _march(A: TridiagOperator, u: np.ndarray, t: float, method: str, m: int) -> np.ndarray:
    h = t / m
    u = np.array(u, dtype=float, copy=True, order="F")
    if method == "backward_euler":
        solve = _step_solver(A, h)
        for _ in range(m):
            u = solve(u)
    else:
        # (I - hA/2)^{-1} (I + hA/2) = 2 (I - hA/2)^{-1} - I
        solve = _step_solver(A, 0.5 * h)
        for _ in range(m):
            u = 2.0 * solve(u) - u
    if not np.all(np.isfinite(u)):
        raise StabilityError(f"non-finite state in {method} with m={m}")
    return u


def evolve_values(A: TridiagOperator, u0: np.ndarray, t: float, method: str = "pade_expm",
                  m: int | None = None) -> np.ndarray:
    if t < 0:
        raise ValueError("t must be nonnegative")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    u0 = np.asarray(u0, dtype=float)
    if t == 0:
        return u0.copy()
    if method == "pade_expm":
        out = propagator(A, t) @ u0
    elif method == "spectral":
        out = spectral_apply(A, u0, t)
    else:
        m = m or default_substeps(method, t, A.grid)
        if m < 1:
            raise ValueError("need m >= 1 substeps")
        out = _march(A, u0, t, method, m)
    if not np.all(np.isfinite(out)):
        raise StabilityError(f"non-finite state in {method} with m={m}")
    return out


def evolve_discrete(A: TridiagOperator, u0: GridVector, t: float, method: str = "pade_expm",
                    m: int | None = None) -> GridVector:
    """``T_n(t) u0 = exp(tA) u0`` by the chosen method; method and substeps go to ``meta``."""
    if method in ("backward_euler", "crank_nicolson"):
        m = m or default_substeps(method, t, A.grid)
    out = evolve_values(A, u0.values, t, method, m)
    return GridVector(A.grid, out, {"method": method, "m": m, "t": t})


def evolve_orbit(A: TridiagOperator, u0: np.ndarray, times: Sequence[float], method: str = "pade_expm",
                 m: int | None = None) -> np.ndarray:
    """States at each of ``times`` (ascending), reusing one step propagator on uniform lists."""
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or (times.size and times[0] < 0):
        raise ValueError("times must be ascending and nonnegative")
    u0 = np.asarray(u0, dtype=float)
    if method == "spectral":
        return spectral_apply(A, u0, times)
    out = np.empty((len(times),) + u0.shape)
    gaps = np.diff(np.concatenate([[0.0], times]))
    pos = gaps[gaps > 0]
    uniform = pos.size > 0 and np.allclose(pos, pos[0], rtol=1e-12, atol=0)
    u = u0
    for j, (t, gap) in enumerate(zip(times, gaps)):
        if gap > 0:
            step = pos[0] if uniform else gap
            if method == "pade_expm":
                u = propagator(A, step) @ u
            else:
                u = evolve_values(A, u, step, method, m)
        out[j] = u
    return out


# ---------------------------------------------------------------- dissipativity


@dataclass(frozen=True)
class DualityVector:
    index: int  # position in the value array
    value: float

    def pair(self, w: np.ndarray) -> float:
        return float(w[self.index] * self.value)


def duality_vector(u: GridVector) -> DualityVector:
    """The element of the sup-norm duality set concentrated at the first argmax of ``|u|``."""
    i = int(np.argmax(np.abs(u.values)))
    return DualityVector(i, u.norm * float(np.sign(u.values[i])))


def duality_pairing(A: TridiagOperator, u: GridVector) -> float:
    """``<A u, v>`` for the duality vector ``v`` of ``u``."""
    if u.norm == 0:
        raise ValueError("duality pairing needs u != 0")
    return duality_vector(u).pair(A.matvec(u.values))


def duality_pairings(A: TridiagOperator, U: np.ndarray) -> np.ndarray:
    """Vectorized pairings for the columns of ``U`` (shape ``(n, trials)``)."""
    absU = np.abs(U)
    i = np.argmax(absU, axis=0)
    cols = np.arange(U.shape[1])
    norms = absU[i, cols]
    if np.any(norms == 0):
        raise ValueError("duality pairing needs u != 0")
    AU = A.matvec(U)
    return AU[i, cols] * norms * np.sign(U[i, cols])


def all_argmax_pairings(A: TridiagOperator, u: GridVector) -> np.ndarray:
    """Pairings for every admissible argmax choice (ties included)."""
    a = np.abs(u.values)
    idx = np.flatnonzero(a == a.max())
    Au = A.matvec(u.values)
    return Au[idx] * u.norm * np.sign(u.values[idx])


def step_matrix_checks(A: TridiagOperator, t: float, method: str, m: int | None = None) -> dict:
    """Entrywise minimum and infinity norm of the one-step (or exact) propagator."""
    g = A.grid
    if method == "pade_expm":
        P = propagator(A, t)
    elif method == "spectral":
        w, V = spectral_pair(A)
        P = (V * np.exp(t * w)) @ V.T
    else:
        m = m or default_substeps(method, t, g)
        h = t / m
        I = np.eye(g.n)
        if method == "backward_euler":
            P = np.linalg.solve(I - h * A.to_dense(), I)
        else:
            D = A.to_dense()
            P = np.linalg.solve(I - 0.5 * h * D, I + 0.5 * h * D)
    return {"min_entry": float(P.min()), "inf_norm": float(np.abs(P).sum(axis=1).max())}


def grids(pairs: Iterable[tuple[int, int]]) -> list[GridSpec]:
    return [make_grid(l, N) for l, N in pairs]


DEFAULT_SCHEDULE = ((4, 8), (4, 16), (8, 32), (8, 64), (8, 128))
# Resolvent errors near x = +-l are dominated by the zero boundary values
# unless the window reaches well beyond the largest level.
RESOLVENT_SCHEDULE = ((4, 8), (4, 16), (16, 32), (16, 64), (16, 128))
