"""Experiment configuration: a single JSON document validated into frozen dataclasses."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .discretization import DEFAULT_SCHEDULE, MAX_N, METHODS, RESOLVENT_SCHEDULE
from .function_space import DEFAULT_LEVELS, DEFAULT_PROBE_DENSITY, resolve

SUITES = ("a2", "stability", "c2", "resolvent", "laplace", "semigroup", "decomposition", "oracle", "demo")
SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _schedule(name, value, min_len=1):
    try:
        pairs = tuple((int(a), int(b)) for a, b in value)
    except (TypeError, ValueError):
        raise ConfigError(name, "expected a list of [l, N] pairs") from None
    if len(pairs) < min_len:
        raise ConfigError(name, "schedule is empty" if not pairs else f"need at least {min_len} grids")
    for l, N in pairs:
        if l < 1 or N < 2:
            raise ConfigError(name, f"grid ({l}, {N}) needs l >= 1 and N >= 2")
        if 2 * l * N > MAX_N:
            raise ConfigError(name, f"grid ({l}, {N}) has too many nodes")
    if any(b[1] <= a[1] for a, b in zip(pairs, pairs[1:])):
        raise ConfigError(name, "N must be strictly increasing along the schedule")
    return pairs


def _positive(name, value, kind=float):
    try:
        v = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(name, f"expected a {kind.__name__}") from None
    if not (v > 0 and math.isfinite(v)):
        raise ConfigError(name, "must be positive")
    return v


def _floats(name, value, positive=True):
    try:
        out = tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(name, "expected a list of numbers") from None
    if not out:
        raise ConfigError(name, "must not be empty")
    if positive and any(not (v > 0 and math.isfinite(v)) for v in out):
        raise ConfigError(name, "entries must be positive")
    return out


@dataclass(frozen=True)
class DemoConfig:
    bump: str = "bump"
    shifts: tuple[float, ...] = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0)
    t0: float = 0.25
    grid: tuple[int, int] = (16, 16)
    level: float = 2.0
    chirp_times: tuple[float, ...] = (1e-4, 3e-4, 1e-3, 3e-3, 1e-2)

    def __post_init__(self):
        object.__setattr__(self, "shifts", _floats("demo.shifts", self.shifts, positive=False))
        object.__setattr__(self, "t0", _positive("demo.t0", self.t0))
        object.__setattr__(self, "grid", _schedule("demo.grid", [self.grid])[0])
        object.__setattr__(self, "level", _positive("demo.level", self.level))
        object.__setattr__(self, "chirp_times", _floats("demo.chirp_times", self.chirp_times))
        _function("demo.bump", self.bump)


def _function(name, key):
    try:
        resolve(key)
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(name, str(e)) from None


@dataclass(frozen=True)
class ExperimentConfig:
    suite: str = "all"
    functions: tuple[str, ...] = ("gauss(1)", "bump")
    schedule: tuple[tuple[int, int], ...] = DEFAULT_SCHEDULE
    resolvent_schedule: tuple[tuple[int, int], ...] = RESOLVENT_SCHEDULE
    levels: tuple[float, ...] = DEFAULT_LEVELS
    order_levels: tuple[float, ...] = (1.0, 2.0, 4.0)
    lambda0: float = 1.0
    t0: float = 1.0
    n_times: int = 16
    method: str = "pade_expm"
    quad_rtol: float | None = None
    probe_density: int = DEFAULT_PROBE_DENSITY
    stability_trials: int = 10_000
    laplace_grids: int = 3
    laplace_times: int = 51
    decomposition_times: tuple[float, ...] = (0.25, 0.5)
    decomposition_grids: tuple[tuple[int, int], ...] = ((8, 32), (8, 64))
    out: str = "results"
    seed: int = 0
    demo: DemoConfig = field(default_factory=DemoConfig)

    def __post_init__(self):
        s = object.__setattr__
        if self.suite != "all" and self.suite not in SUITES:
            raise ConfigError("suite", f"unknown suite {self.suite!r}; expected one of {('all',) + SUITES}")
        if isinstance(self.functions, str) or not self.functions:
            raise ConfigError("functions", "expected a nonempty list of catalog names")
        s(self, "functions", tuple(self.functions))
        for k in self.functions:
            _function("functions", k)
        s(self, "schedule", _schedule("schedule", self.schedule))
        s(self, "resolvent_schedule", _schedule("resolvent_schedule", self.resolvent_schedule))
        s(self, "decomposition_grids", _schedule("decomposition_grids", self.decomposition_grids))
        s(self, "levels", tuple(sorted(set(_floats("levels", self.levels)))))
        s(self, "order_levels", _floats("order_levels", self.order_levels))
        if not set(self.order_levels) <= set(self.levels):
            raise ConfigError("order_levels", "must be a subset of levels")
        s(self, "lambda0", _positive("lambda0", self.lambda0))
        s(self, "t0", _positive("t0", self.t0))
        s(self, "n_times", _positive("n_times", self.n_times, int))
        if self.n_times < 2:
            raise ConfigError("n_times", "need at least 2 time points")
        if self.method not in METHODS:
            raise ConfigError("method", f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.quad_rtol is not None:
            v = _positive("quad_rtol", self.quad_rtol)
            if v >= 1e-6:
                raise ConfigError("quad_rtol", "must be below 1e-6")
            s(self, "quad_rtol", v)
        s(self, "probe_density", _positive("probe_density", self.probe_density, int))
        s(self, "stability_trials", _positive("stability_trials", self.stability_trials, int))
        if self.stability_trials < 100:
            raise ConfigError("stability_trials", "need at least 100 trials")
        s(self, "laplace_grids", _positive("laplace_grids", self.laplace_grids, int))
        s(self, "laplace_times", _positive("laplace_times", self.laplace_times, int))
        if self.laplace_times < 2:
            raise ConfigError("laplace_times", "need at least 2 time points")
        s(self, "decomposition_times", _floats("decomposition_times", self.decomposition_times))
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError("seed", "expected a nonnegative integer")
        if not isinstance(self.out, str) or not self.out:
            raise ConfigError("out", "expected a directory path")
        if isinstance(self.demo, dict):
            s(self, "demo", _build(DemoConfig, self.demo, "demo."))

    @property
    def suites(self) -> tuple[str, ...]:
        return SUITES if self.suite == "all" else (self.suite,)

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        """sha256 of the canonical JSON form, excluding the output directory."""
        d = self.to_dict()
        d.pop("out")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


def _build(cls, data: dict, prefix: str = ""):
    if not isinstance(data, dict):
        raise ConfigError(prefix.rstrip(".") or "config", "expected a JSON object")
    known = {f.name for f in fields(cls)}
    for k in data:
        if k not in known:
            raise ConfigError(prefix + k, "unknown field")
    try:
        return cls(**data)
    except ConfigError as e:
        if prefix and not e.field.startswith(prefix):
            raise ConfigError(prefix + e.field, str(e).split(": ", 1)[-1]) from None
        raise


def config_from_dict(data: dict, **overrides) -> ExperimentConfig:
    data = dict(data)
    data.update({k: v for k, v in overrides.items() if v is not None})
    return _build(ExperimentConfig, data)


def load_config(path: str | Path | None, **overrides) -> ExperimentConfig:
    if path is None:
        return config_from_dict({}, **overrides)
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError("config", f"cannot read {path}: {e.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("config", f"invalid JSON in {path}: {e}") from None
    return config_from_dict(data, **overrides)
