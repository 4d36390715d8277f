"""Experiment configuration: JSON in, validated dataclass out, and back."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

from .errors import ConfigError
from .measures import MeasureSpec, SingleTable, spec_from_config

EXPERIMENTS = ("drift", "entropy", "dimension", "conditional-dimension", "conservation", "pivotal", "self-test")


@dataclass
class ExperimentConfig:
    experiment: str
    measure: Optional[dict] = None
    n: int = 1000
    trials: int = 200
    depth: int = 24
    j_min: int = 2
    j_max: Optional[int] = None
    seed: int = 0
    out: str = "results"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError("experiment", f"must be one of {', '.join(EXPERIMENTS)}; got {self.experiment!r}")
        for name in ("n", "trials", "depth"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ConfigError(name, f"must be a positive integer, got {v!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError("seed", f"must be a nonnegative integer, got {self.seed!r}")
        if not isinstance(self.j_min, int) or self.j_min < 0:
            raise ConfigError("j_min", f"must be a nonnegative integer, got {self.j_min!r}")
        if self.j_max is not None and (not isinstance(self.j_max, int) or self.j_max <= self.j_min):
            raise ConfigError("j_max", f"must be an integer above j_min, got {self.j_max!r}")
        if not isinstance(self.params, dict):
            raise ConfigError("params", "must be an object")
        if self.experiment != "self-test":
            if not isinstance(self.measure, dict):
                raise ConfigError("measure", "a measure specification is required")
            try:
                build_measure(self.measure)
            except ConfigError:
                raise
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError("measure", str(exc)) from exc

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigError(sorted(extra)[0], "unknown field")
        if "experiment" not in data:
            raise ConfigError("experiment", "missing")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("<root>", f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_json(Path(path).read_text())

    def spec(self) -> MeasureSpec:
        return build_measure(self.measure)

    def param(self, name: str, default: Any) -> Any:
        return self.params.get(name, default)


def build_measure(cfg: dict) -> MeasureSpec:
    """Like :func:`spec_from_config`, plus ``SchottkyUniform`` shorthands for nested bases."""
    if not isinstance(cfg, dict):
        raise ConfigError("measure", "must be an object")
    v = cfg.get("variant")
    if v == "SchottkyUniform":
        from .pivotal.schottky import build_schottky_words

        words = build_schottky_words(int(cfg.get("rank", 2)), int(cfg.get("count", 200)),
                                     int(cfg.get("length", 81)), int(cfg.get("C", 4)), int(cfg.get("seed", 0)))
        return SingleTable.uniform(int(cfg.get("rank", 2)), words)
    nested = {k: build_measure(cfg[k]) for k in ("base", "first", "second", "inner") if isinstance(cfg.get(k), dict)}
    if nested and any(c.get("variant") == "SchottkyUniform" for c in (cfg[k] for k in nested)):
        from .measures import NoiseMixture, ProductMeasure, parse_number

        if v == "NoiseMixture":
            return NoiseMixture(parse_number(cfg["rho"]), nested["base"])
        if v == "ProductMeasure":
            return ProductMeasure(nested["first"], nested["second"])
        raise ConfigError("measure", f"SchottkyUniform is not supported inside {v}")
    if v is None:
        raise ConfigError("measure.variant", "missing")
    return spec_from_config(cfg)
