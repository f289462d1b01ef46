"""JSON run configuration: defaults, dotted overrides and strict validation."""

from __future__ import annotations

import copy
import json
from typing import Any, Dict, Iterable, Optional, Set, Tuple

from .errors import ConfigError
from .system import HBAR
from .yukawa import (
    DEFAULT_SEPARATION,
    G_NEWTON,
    MEMBRANE_AREA,
    MEMBRANE_DENSITY,
    MEMBRANE_THICKNESS,
    IsotopePair,
)

DRIVE_FIELDS = ("omega_b", "omega_c", "delta_c_bare", "kappa_c", "g_c", "g_a", "omega_a", "power")

_ISO = IsotopePair()

DEFAULTS: Dict[str, Dict[str, Any]] = {
    "working": {"omega_b": 1e5, "delta_c": 1e5, "g_lin": 1e4},
    "modes": {"eps_crit": None},
    "solver": {"tol": 1e-10, "root_policy": "nearest", "max_iter": 100},
    "sweep": {"axis": "coupling", "start": None, "stop": None, "num": 201},
    "shift": {
        "delta_omega_b": -10.0,
        "coupling_policy": "critical_tracking",
        "g_min": 1e4,
        "shift_min": -30.0,
        "num": 201,
    },
    "inversion": {"delta_d_min": None, "bracket_lo": None, "bracket_hi": None, "rtol": 1e-10},
    "yukawa": {"alpha": 1.0, "lambda": 1e-9, "g_newton": G_NEWTON},
    "cylinder": {
        "radius": 1e-2,
        "thickness": 1e-3,
        "density": 8908.0,
        "separation": DEFAULT_SEPARATION,
        "regime_ratio": 10.0,
        "force": False,
    },
    "isotopes": {"rho_58": _ISO.rho_58, "rho_64": _ISO.rho_64},
    "oscillator": {
        "mass": None,
        "omega_b": None,
        "separation_a": DEFAULT_SEPARATION,
        "membrane_area": MEMBRANE_AREA,
        "membrane_thickness": MEMBRANE_THICKNESS,
        "membrane_density": MEMBRANE_DENSITY,
    },
    "quadrature": {"tol": 1e-6, "max_cells": 200000},
    "constraint": {"lambda_min": 3e-10, "lambda_max": 1e-6, "lambda_num": 200, "shift_floor": None},
    "figure": {
        "num": 201,
        "overshoot": 0.2,
        "g_over_omega_b": 0.5,
        "shifts": [-1.0, -5.0, -10.0],
        "fig5b_window": 10.0,
    },
}

# the drive block has no defaults except hbar: it is either fully given or absent
DRIVE_DEFAULTS = {"hbar": HBAR}

META_KEYS = {"config", "results"}


def _check_keys(section: str, given: Dict[str, Any], allowed: Iterable[str]):
    allowed = set(allowed)
    unknown = sorted(set(given) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(unknown)}")


def load_raw(path: Optional[str]) -> Dict[str, Any]:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    # a meta sidecar written by this tool can be fed back as a config
    if set(data) == META_KEYS:
        data = data["config"]
    return data


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(raw: Dict[str, Any], overrides: Iterable[str]) -> Dict[str, Any]:
    """Apply ``section.key=value`` strings; values are parsed as JSON when possible."""
    out = copy.deepcopy(raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        key, text = item.split("=", 1)
        parts = key.strip().split(".")
        if len(parts) != 2:
            raise ConfigError(f"override key {key!r} must be section.key")
        section, name = parts
        out.setdefault(section, {})
        if not isinstance(out[section], dict):
            raise ConfigError(f"[{section}] must be an object")
        out[section][name] = _parse_value(text)
    return out


def resolve(raw: Dict[str, Any]) -> Tuple[Dict[str, Any], Set[str]]:
    """Merge ``raw`` onto the defaults. Returns (config, sections the user set)."""
    allowed_sections = set(DEFAULTS) | {"drive"}
    _check_keys("top level", raw, allowed_sections)
    cfg = copy.deepcopy(DEFAULTS)
    for section, values in raw.items():
        if not isinstance(values, dict):
            raise ConfigError(f"[{section}] must be an object")
        if section == "drive":
            _check_keys("drive", values, DRIVE_FIELDS + tuple(DRIVE_DEFAULTS))
            missing = [f for f in DRIVE_FIELDS if f not in values]
            if missing:
                raise ConfigError(f"[drive] missing field(s): {', '.join(missing)}")
            cfg["drive"] = {**DRIVE_DEFAULTS, **values}
            continue
        _check_keys(section, values, DEFAULTS[section])
        cfg[section].update(values)
    return cfg, set(raw)


def number(cfg: Dict[str, Any], section: str, key: str, allow_none: bool = False):
    v = cfg[section][key]
    if v is None and allow_none:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"[{section}] {key} must be a number, got {v!r}")
    return float(v)
