"""YAML run configurations: parsing, schema validation and sweep expansion.

A configuration has a required ``model`` block and optional ``solve``,
``sim``, ``output`` and ``sweep`` blocks; see ``configs/`` for complete
examples and ``schema/config.schema.json`` for the exact grammar.  Batch
probabilities are sparse ``size: prob`` pairs; the largest size carrying
positive mass fixes ``b``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import yaml

from .arrivals import (
    BatchSizeDistribution,
    Deterministic,
    Erlang,
    Exponential,
    HyperExponential,
    InterArrivalModel,
)
from .charroots import ModelParams
from .errors import ConfigError
from .simulator import SimConfig

__all__ = [
    "RunConfig",
    "SweepSpec",
    "load_config",
    "parse_config",
    "inter_arrival_from_dict",
    "inter_arrival_to_dict",
    "params_to_dict",
]

_FAMILY_KEYS = {
    "exponential": {"rate"},
    "erlang": {"k", "rate", "phase_rate"},
    "deterministic": {"period", "rate"},
    "hyperexponential": {"probs", "rates"},
}


def _schema():
    text = resources.files("gixq").joinpath("schema/config.schema.json").read_text()
    return json.loads(text)


def inter_arrival_from_dict(d: dict, default_rate: float | None = None) -> InterArrivalModel:
    """Build an inter-arrival law; a missing rate falls back to ``default_rate``."""
    family = d.get("family")
    if family not in _FAMILY_KEYS:
        raise ConfigError(f"unknown inter-arrival family {family!r}")
    extra = set(d) - _FAMILY_KEYS[family] - {"family"}
    if extra:
        raise ConfigError(f"keys {sorted(extra)} do not apply to the {family} family")
    rate = d.get("rate", default_rate)
    if family == "exponential":
        if rate is None:
            raise ConfigError("exponential inter-arrivals need a rate")
        return Exponential(float(rate))
    if family == "erlang":
        if "k" not in d:
            raise ConfigError("erlang inter-arrivals need a phase count k")
        if "phase_rate" in d:
            if "rate" in d:
                raise ConfigError("give either rate (batch rate) or phase_rate for erlang, not both")
            return Erlang.from_phase_rate(int(d["k"]), float(d["phase_rate"]))
        if rate is None:
            raise ConfigError("erlang inter-arrivals need rate or phase_rate")
        return Erlang(int(d["k"]), float(rate))
    if family == "deterministic":
        if "period" in d:
            if "rate" in d:
                raise ConfigError("give either period or rate for deterministic, not both")
            return Deterministic(float(d["period"]))
        if rate is None:
            raise ConfigError("deterministic inter-arrivals need a period or rate")
        return Deterministic(1.0 / float(rate))
    probs, rates = d.get("probs"), d.get("rates")
    if probs is None or rates is None:
        raise ConfigError("hyperexponential inter-arrivals need probs and rates")
    total = math.fsum(probs)
    if abs(total - 1.0) > 1e-9:
        raise ConfigError(f"hyperexponential probs sum to {total!r}")
    return HyperExponential(tuple(p / total for p in probs), tuple(rates))


def inter_arrival_to_dict(ia: InterArrivalModel) -> dict:
    return {"family": ia.family, **ia.params}


def params_to_dict(p: ModelParams) -> dict:
    return {
        "inter_arrival": inter_arrival_to_dict(p.inter_arrival),
        "batch": {str(k): v for k, v in p.batch.as_mapping().items()},
        "mu": p.mu,
        "eta": p.eta,
        "delta": p.delta,
    }


@dataclass(frozen=True)
class SweepSpec:
    param: str
    grid: tuple[float, ...]
    base: ModelParams
    series: tuple[tuple[str, dict], ...]

    def __post_init__(self):
        if self.param not in ("lambda", "mu", "eta", "delta"):
            raise ConfigError(f"cannot sweep {self.param!r}")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ConfigError("sweep grid must be strictly increasing")

    def _apply(self, params: ModelParams, key: str, value) -> ModelParams:
        if key == "lambda":
            return params.replace(inter_arrival=params.inter_arrival.with_rate(float(value)))
        if key == "inter_arrival":
            return params.replace(inter_arrival=inter_arrival_from_dict(value, params.lam))
        return params.replace(**{key: float(value)})

    def points(self):
        """Yield ``(series_label, grid_value, ModelParams)`` in output order."""
        for label, overrides in self.series:
            p = self.base
            if "inter_arrival" in overrides:
                p = self._apply(p, "inter_arrival", overrides["inter_arrival"])
            for key, value in overrides.items():
                if key != "inter_arrival":
                    p = self._apply(p, key, value)
            for v in self.grid:
                yield label, v, self._apply(p, self.param, v)


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    truncation: int | None = None
    pmf_cutoff: float = 1e-14
    sim: dict = field(default_factory=dict)
    output_format: str = "csv"
    output_path: str | None = None
    precision: int = 8
    sweep: SweepSpec | None = None

    def sim_config(self, seed: int | None = None) -> SimConfig:
        opts = {k: v for k, v in self.sim.items() if k != "backend"}
        if "priority" in opts:
            opts["priority"] = tuple(opts["priority"])
        if seed is not None:
            opts["seed"] = seed
        return SimConfig(self.params, **opts)

    @property
    def backend(self) -> str | None:
        return self.sim.get("backend")


def _normalize(raw):
    """YAML may give integer batch keys; the schema wants strings."""
    if isinstance(raw, dict) and isinstance(raw.get("model"), dict):
        batch = raw["model"].get("batch")
        if isinstance(batch, dict):
            raw["model"]["batch"] = {str(k): v for k, v in batch.items()}
    return raw


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping")
    raw = _normalize(raw)
    try:
        jsonschema.validate(raw, _schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from None
    m = raw["model"]
    params = ModelParams(
        inter_arrival_from_dict(m["inter_arrival"]),
        BatchSizeDistribution.from_mapping({int(k): v for k, v in m["batch"].items()}),
        m["mu"],
        m.get("eta", 0.0),
        m.get("delta", 0.0),
    )
    solve = raw.get("solve", {})
    out = raw.get("output", {})
    sweep = None
    if "sweep" in raw:
        s = raw["sweep"]
        series = tuple(
            (entry["label"], {k: v for k, v in entry.items() if k != "label"})
            for entry in s.get("series", [{"label": "base"}])
        )
        sweep = SweepSpec(s["param"], tuple(float(v) for v in s["grid"]), params, series)
    return RunConfig(
        params=params,
        truncation=solve.get("truncation"),
        pmf_cutoff=solve.get("pmf_cutoff", 1e-14),
        sim=dict(raw.get("sim", {})),
        output_format=out.get("format", "csv"),
        output_path=out.get("path"),
        precision=out.get("precision", 8),
        sweep=sweep,
    )


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from None
    return parse_config(raw)
