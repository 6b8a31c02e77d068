"""Run configuration shared by the suite runner and the CLI."""
from __future__ import annotations

import copy
import json
from pathlib import Path

from ..errors import CFLViolation, ConfigError
from ..lattice import CFL_MAX
from ..models import MUTATIONS

DEFAULTS = {
    "theory": "ym",
    "algebra": "both",
    "seed": 0,
    "max_deriv": 2,
    "max_field_degree": 4,
    "trials": {
        "dhat": 20,
        "jacobi": 50,
        "star_assoc": 100,
        "star_kernels": 20,
    },
    "star": {"sites": 6, "max_deg": 3},
    "lattice": {
        "nx": 128,
        "nt": 256,
        "dx": 0.1,
        "dt": 0.05,
        "m": 0.5,
        "lambda0": 1.0,
        "tolerance": 0.2,
        "refine": 2,
    },
    "mutation": None,
    "output": "report.json",
    "dump": None,
}

THEORIES = ("ym", "scalar")
ALGEBRA_CHOICES = ("both", "su2", "abstract")


def _merge(base: dict, over: dict, path: str) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        where = f"{path}.{k}" if path else k
        if k not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"{where} must be an object")
            out[k] = _merge(base[k], v, where)
        else:
            out[k] = v
    return out


def _positive_int(cfg, path):
    node = cfg
    for p in path:
        node = node[p]
    if isinstance(node, bool) or not isinstance(node, int) or node <= 0:
        raise ConfigError(f"{'.'.join(path)} must be a positive integer, got {node!r}")


def _positive(cfg, path):
    node = cfg
    for p in path:
        node = node[p]
    if isinstance(node, bool) or not isinstance(node, (int, float)) or not node > 0:
        raise ConfigError(f"{'.'.join(path)} must be positive, got {node!r}")


def validate(cfg: dict) -> dict:
    if cfg["theory"] not in THEORIES:
        raise ConfigError(f"theory must be one of {THEORIES}")
    if cfg["algebra"] not in ALGEBRA_CHOICES:
        raise ConfigError(f"algebra must be one of {ALGEBRA_CHOICES}")
    if isinstance(cfg["seed"], bool) or not isinstance(cfg["seed"], int):
        raise ConfigError("seed must be an integer")
    for key in ("max_deriv", "max_field_degree"):
        _positive_int(cfg, (key,))
    if cfg["max_deriv"] > 2 or cfg["max_field_degree"] > 4:
        raise ConfigError("random functionals support derivative order <= 2 and field degree <= 4")
    if cfg["max_field_degree"] < 2:
        raise ConfigError("max_field_degree must be at least 2")
    for key in cfg["trials"]:
        _positive_int(cfg, ("trials", key))
    for key in cfg["star"]:
        _positive_int(cfg, ("star", key))
    lat = cfg["lattice"]
    for key in ("nx", "nt", "refine"):
        _positive_int(cfg, ("lattice", key))
    for key in ("dx", "dt", "tolerance"):
        _positive(cfg, ("lattice", key))
    for key in ("m", "lambda0"):
        if isinstance(lat[key], bool) or not isinstance(lat[key], (int, float)) or lat[key] < 0:
            raise ConfigError(f"lattice.{key} must be a non-negative number")
    if lat["refine"] < 2:
        raise ConfigError("lattice.refine must be at least 2")
    if lat["dt"] / lat["dx"] > CFL_MAX + 1e-12:
        raise CFLViolation(f"dt/dx = {lat['dt'] / lat['dx']:.4g} exceeds {CFL_MAX}")
    if cfg["mutation"] is not None and cfg["mutation"] not in MUTATIONS:
        raise ConfigError(f"unknown mutation {cfg['mutation']!r}; known: {sorted(MUTATIONS)}")
    return cfg


def make_config(overrides: dict | None = None) -> dict:
    """Defaults merged with overrides (unknown keys rejected), then validated."""
    return validate(_merge(DEFAULTS, overrides or {}, ""))


def load_config(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data
