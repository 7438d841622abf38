"""Run configuration: defaults, JSON-schema validation and seed overrides."""

from __future__ import annotations

import copy
import json
import math
from importlib import resources
from typing import Any

import jsonschema

from ..errors import ConfigError
from ..preimage import PreImageConfig

SCHEMA_VERSION = 1

DEFAULTS: dict[str, Any] = {
    "schema": SCHEMA_VERSION,
    "instance": {"kind": "maxcut-ring", "size": 4, "seed": 0, "graph": None},
    "circuit": {"ansatz": "alternating", "layers": 1, "parameters": "per-gate", "initial_state": "zero"},
    "training": {"size": 100, "distribution": "uniform", "low": 0.0, "high": 2 * math.pi, "scale": 1.0, "seed": 1},
    "state": {"theta0": "zero", "seed": 2, "target": None, "step": 0.5, "ratio_steps": [0.04, 0.02, 0.01]},
    "regression": {"method": "least-squares-batch", "probe_step": 1e-4},
    "kernel": {"kind": "rbf", "sigma": "auto", "degree": 2, "offset": 1.0, "retain": "auto"},
    "preimage": {
        "phi": 0.0,
        "max_iterations": 500,
        "tol": 1e-8,
        "restart": "grow-phi",
        "restart_factor": 10.0,
        "perturb_scale": 1e-2,
        "max_restarts": 3,
        "seed": 3,
    },
    "measurement": {"mode": "exact", "shots": 1024, "seed": 4},
    "validate": {"seed": 5, "corrupt_centering": False},
    "output": {"dir": "out", "format": "json"},
}

SEEDED_SECTIONS = ("instance", "training", "state", "preimage", "measurement", "validate")


def _schema(name: str) -> dict:
    return json.loads(resources.files("gatepath.schemas").joinpath(name).read_text())


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def make_config(overrides: dict | None = None, seed: int | None = None) -> dict:
    """Merge ``overrides`` over the defaults and validate.

    A run report (a document with a ``"config"`` key) is accepted as well, so
    a report alone is enough to repeat a run.
    """
    overrides = dict(overrides or {})
    if "config" in overrides and isinstance(overrides["config"], dict):
        overrides = overrides["config"]
    overrides.setdefault("schema", SCHEMA_VERSION)
    try:
        jsonschema.validate(overrides, _schema("config.schema.json"))
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {path}: {exc.message}") from exc
    cfg = _merge(DEFAULTS, overrides)
    if seed is not None:
        for section in SEEDED_SECTIONS:
            cfg[section]["seed"] = int(seed)
    training = cfg["training"]
    if training["distribution"] == "uniform" and not training["low"] < training["high"]:
        raise ConfigError("training.low must be below training.high")
    if cfg["instance"]["kind"] == "maxcut-ring" and cfg["instance"]["graph"] is None and cfg["instance"]["size"] < 2:
        raise ConfigError("ring size must be >= 2")
    return cfg


def load_config(path, seed: int | None = None) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    return make_config(doc, seed=seed)


def preimage_config(cfg: dict) -> PreImageConfig:
    p = cfg["preimage"]
    return PreImageConfig(
        phi=float(p["phi"]),
        max_iterations=int(p["max_iterations"]),
        tol=float(p["tol"]),
        restart=p["restart"],
        restart_factor=float(p["restart_factor"]),
        perturb_scale=float(p["perturb_scale"]),
        max_restarts=int(p["max_restarts"]),
        seed=int(p["seed"]),
    )
