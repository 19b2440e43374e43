"""Experiment configuration: a flat key = value text format.

Keys are dotted paths (``model.service.kind = pareto``); ``#`` starts a
comment.  The file round-trips: ``parse(render(cfg))`` reproduces the
same key/value map.  Model validation (including the stability bound
rho < 1) happens at load time so a bad file fails before any work runs.

Example::

    model.arrival.kind = exponential
    model.arrival.rate = 0.5
    model.service.kind = pareto
    model.service.nu = 1.5
    model.service.x_m = 1.0
    model.discipline = ros
    run.n = 100000
    run.warmup = 1000
    run.seed = 42
    run.replications = 1
    analysis.x_grid = 100,1000,10000
    analysis.s_grid = 0.1,1,10
    analysis.confidence = 0.95
    output.dir = out
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from rosqueue import distributions
from rosqueue.desim import QueueModel
from rosqueue.distributions import ConfigurationError, TailDistribution

__all__ = ["ExperimentConfig", "parse_config", "load_config", "render_config"]

_DIST_ARGS = {
    "pareto": ("nu", "x_m"),
    "exponential": ("rate",),
    "deterministic": ("value",),
    "weibull": ("shape", "scale"),
}


def parse_config(text: str) -> dict[str, str]:
    """Parse the flat key = value format into an ordered dict of strings."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigurationError(f"line {lineno}: empty key or value in {raw!r}")
        out[key] = value
    return out


def render_config(entries: dict[str, str]) -> str:
    """Render a key/value map back to the text format (sorted keys)."""
    return "".join(f"{k} = {entries[k]}\n" for k in sorted(entries))


@dataclass
class ExperimentConfig:
    """Typed view over a parsed configuration."""

    entries: dict[str, str] = field(default_factory=dict)

    # -- low-level accessors -------------------------------------------------

    def get(self, key: str, default=None) -> str | None:
        return self.entries.get(key, default)

    def get_float(self, key: str, default: float | None = None) -> float:
        v = self.entries.get(key)
        if v is None:
            if default is None:
                raise ConfigurationError(f"missing required key {key!r}")
            return default
        try:
            return float(v)
        except ValueError as exc:
            raise ConfigurationError(f"key {key!r}: {v!r} is not a number") from exc

    def get_int(self, key: str, default: int | None = None) -> int:
        v = self.entries.get(key)
        if v is None:
            if default is None:
                raise ConfigurationError(f"missing required key {key!r}")
            return default
        try:
            return int(v)
        except ValueError as exc:
            raise ConfigurationError(f"key {key!r}: {v!r} is not an integer") from exc

    def get_floats(self, key: str, default: list[float] | None = None) -> np.ndarray:
        v = self.entries.get(key)
        if v is None:
            if default is None:
                raise ConfigurationError(f"missing required key {key!r}")
            return np.asarray(default, dtype=float)
        try:
            return np.asarray([float(t) for t in v.split(",") if t.strip()], dtype=float)
        except ValueError as exc:
            raise ConfigurationError(f"key {key!r}: {v!r} is not a comma list") from exc

    # -- model and run sections ----------------------------------------------

    def _distribution(self, section: str) -> TailDistribution:
        kind = self.entries.get(f"{section}.kind")
        if kind is None:
            raise ConfigurationError(f"missing required key '{section}.kind'")
        if kind not in _DIST_ARGS:
            raise ConfigurationError(
                f"'{section}.kind' must be one of {sorted(_DIST_ARGS)}, got {kind!r}"
            )
        args = [self.get_float(f"{section}.{name}") for name in _DIST_ARGS[kind]]
        made = getattr(distributions, f"make_{kind}")(*args)
        return made[0] if isinstance(made, tuple) else made

    def build_model(self) -> QueueModel:
        return QueueModel(
            arrival=self._distribution("model.arrival"),
            service=self._distribution("model.service"),
            discipline=self.entries.get("model.discipline", "fcfs"),
        )

    @property
    def n(self) -> int:
        return self.get_int("run.n")

    @property
    def warmup(self) -> int:
        return self.get_int("run.warmup", 0)

    @property
    def seed(self) -> int:
        return self.get_int("run.seed", 0)

    @property
    def replications(self) -> int:
        return self.get_int("run.replications", 1)

    @property
    def confidence(self) -> float:
        return self.get_float("analysis.confidence", 0.95)

    @property
    def out_dir(self) -> Path:
        return Path(self.entries.get("output.dir", "out"))

    def validate(self) -> "ExperimentConfig":
        self.build_model()
        if self.n <= self.warmup:
            raise ConfigurationError(
                f"run.n ({self.n}) must exceed run.warmup ({self.warmup})"
            )
        return self

    def render(self) -> str:
        return render_config(self.entries)


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigurationError(f"config file not found: {p}")
    return ExperimentConfig(parse_config(p.read_text())).validate()
