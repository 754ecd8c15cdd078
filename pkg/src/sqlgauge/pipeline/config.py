"""Run configuration: validation, dict/file round-trips."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import yaml

from ..gateway import ModelSpec
from ..metrics import DEFAULT_TAU, METRIC_NAMES


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    workload_id: str
    models: tuple[ModelSpec, ...]
    run_id: str = ""
    workload_version: int | None = None
    catalog_path: str = "catalog.json"
    metrics: tuple[str, ...] = METRIC_NAMES
    iterations: int = 1
    llm_id: str = ""
    temperature: float = 0.0
    tau: float = DEFAULT_TAU
    theta: float = 0.6
    scale_factors: tuple[int, ...] = (1,)
    alignment_target: dict | None = None
    seed: int = 0
    concurrency: int = 4
    cache: bool = True
    timing_repetitions: int = 3

    def __post_init__(self):
        if not self.workload_id:
            raise ConfigError("workload_id is required")
        if not self.models:
            raise ConfigError("at least one model is required")
        if not self.metrics:
            raise ConfigError("metrics must be non-empty")
        unknown = [m for m in self.metrics if m not in METRIC_NAMES]
        if unknown:
            raise ConfigError(f"unknown metrics: {unknown}")
        if len(set(self.metrics)) != len(self.metrics):
            raise ConfigError("metrics must not repeat")
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if not self.scale_factors:
            raise ConfigError("scale_factors must be non-empty")
        if list(self.scale_factors) != sorted(self.scale_factors):
            raise ConfigError("scale_factors must be sorted ascending")
        if any(f < 1 for f in self.scale_factors):
            raise ConfigError("scale factors must be >= 1")
        if len(set(self.scale_factors)) != len(self.scale_factors):
            raise ConfigError("scale_factors must not repeat")
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        if self.tau < 0:
            raise ConfigError("tau must be >= 0")
        if not 0.0 <= self.theta <= 1.0:
            raise ConfigError("theta must be within [0, 1]")
        if self.concurrency < 1:
            raise ConfigError("concurrency must be >= 1")
        if self.timing_repetitions < 1:
            raise ConfigError("timing_repetitions must be >= 1")
        model_ids = [m.model_id for m in self.models]
        if len(set(model_ids)) != len(model_ids):
            raise ConfigError("model_id values must be unique")

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        raw = dict(raw)
        model_dicts = raw.pop("models", [])
        if not isinstance(model_dicts, list):
            raise ConfigError("models must be a list")
        llm_id = raw.get("llm_id", "")
        temperature = raw.get("temperature", 0.0)
        models = []
        for entry in model_dicts:
            entry = dict(entry)
            # Config-level llm settings are defaults for each model.
            entry.setdefault("llm_id", llm_id)
            entry.setdefault("temperature", temperature)
            try:
                models.append(ModelSpec.from_dict(entry))
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"bad model entry {entry}: {exc}") from exc
        known = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        try:
            return cls(
                workload_id=raw.get("workload_id", ""),
                models=tuple(models),
                run_id=raw.get("run_id", ""),
                workload_version=raw.get("workload_version"),
                catalog_path=raw.get("catalog_path", "catalog.json"),
                metrics=tuple(raw.get("metrics", METRIC_NAMES)),
                iterations=int(raw.get("iterations", 1)),
                llm_id=llm_id,
                temperature=float(temperature),
                tau=float(raw.get("tau", DEFAULT_TAU)),
                theta=float(raw.get("theta", 0.6)),
                scale_factors=tuple(int(f) for f
                                    in raw.get("scale_factors", [1])),
                alignment_target=raw.get("alignment_target"),
                seed=int(raw.get("seed", 0)),
                concurrency=int(raw.get("concurrency", 4)),
                cache=bool(raw.get("cache", True)),
                timing_repetitions=int(raw.get("timing_repetitions", 3)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return {
            "workload_id": self.workload_id,
            "models": [m.to_dict() for m in self.models],
            "run_id": self.run_id,
            "workload_version": self.workload_version,
            "catalog_path": self.catalog_path,
            "metrics": list(self.metrics),
            "iterations": self.iterations,
            "llm_id": self.llm_id,
            "temperature": self.temperature,
            "tau": self.tau,
            "theta": self.theta,
            "scale_factors": list(self.scale_factors),
            "alignment_target": self.alignment_target,
            "seed": self.seed,
            "concurrency": self.concurrency,
            "cache": self.cache,
            "timing_repetitions": self.timing_repetitions,
        }


def load_config(path: str | Path) -> RunConfig:
    """Read a run config from a JSON or YAML file."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() in (".yml", ".yaml"):
        raw = yaml.safe_load(text)
    else:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    return RunConfig.from_dict(raw)
