"""Run-configuration loading and validation.

Configs are JSON with sections ``circuit`` or ``toy`` (exactly one),
``drive``, ``numerics``, ``sweep``, ``output``.  Validation reports the
offending key on failure.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import jsonschema

from .circuit import CircuitParams, DriveSpec, ToyParams

TWO_PI = 2.0 * math.pi

_number = {"type": "number"}
_positive = {"type": "number", "exclusiveMinimum": 0}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "circuit": {
            "type": "object",
            "additionalProperties": False,
            "required": ["C_a", "C_b", "C_c", "E_Ja", "E_Jb", "E_Jc", "alpha", "beta", "N"],
            "properties": {
                "C_a": _positive, "C_b": _positive, "C_c": _positive,
                "C_ab": _number, "C_bc": _number, "C_ac": _number,
                "E_Ja": _positive, "E_Jb": _positive, "E_Jc": _positive,
                "alpha": _number, "beta": _number,
                "N": {"type": "integer", "minimum": 1},
                "C_alpha": _number, "C_beta": _number,
                "mu_alpha": _number, "mu_beta": _number,
                "epsilon": _number,
            },
        },
        "toy": {
            "type": "object",
            "additionalProperties": False,
            "required": ["omega_a", "omega_b", "omega_c", "alpha_a", "alpha_b", "alpha_c"],
            "properties": {
                "omega_a": _positive, "omega_b": _positive, "omega_c": _positive,
                "alpha_a": _number, "alpha_b": _number, "alpha_c": _number,
                "g_ab": _number, "g_bc": _number, "g_ca": _number,
                "delta": _number,
            },
        },
        "drive": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "phi_ext_bar_over_2pi": _number,
                "delta_phi_over_2pi": {"type": "number", "minimum": 0},
                "delta": _number,
                "omega_d": {
                    "anyOf": [_positive, {"const": "calibrate"}],
                },
                "n_harmonics": {"type": "integer", "minimum": 1},
            },
        },
        "numerics": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dims": {
                    "type": "array",
                    "items": {"type": "integer", "minimum": 2},
                    "minItems": 3,
                    "maxItems": 3,
                },
                "propagator_tol": _positive,
                "grid_points": {"type": "integer", "minimum": 8},
                "overlap_threshold": {"type": "number", "minimum": 0, "maximum": 1},
                "den_tol": _positive,
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["axis", "start", "stop", "count"],
            "properties": {
                "axis": {"type": "string"},
                "start": _number,
                "stop": _number,
                "count": {"type": "integer", "minimum": 1},
                "axis2": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["axis", "values"],
                    "properties": {
                        "axis": {"type": "string"},
                        "values": {"type": "array", "items": _number, "minItems": 1},
                    },
                },
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "path": {"type": "string"},
                "format": {"const": "csv"},
            },
        },
    },
}

DEFAULT_NUMERICS = {
    "dims": [5, 5, 5],
    "propagator_tol": 1e-10,
    "grid_points": 128,
    "overlap_threshold": 0.5,
    "den_tol": 1e-3,
}

SWEEP_AXES_TOY = ("omega_c", "delta")
SWEEP_AXES_CIRCUIT = ("phi_ext_bar_over_2pi", "delta_phi_over_2pi")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Validated run description."""

    raw: dict
    model: object  # CircuitParams or ToyParams
    drive: DriveSpec
    calibrate: bool
    numerics: dict
    sweep: dict | None
    output: dict

    @property
    def is_circuit(self) -> bool:
        return isinstance(self.model, CircuitParams)


def _validate(data: dict) -> None:
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at key '{path}': {exc.message}") from exc
    present = [k for k in ("circuit", "toy") if k in data]
    if len(present) != 1:
        raise ConfigError(
            "exactly one of 'circuit' or 'toy' must be present, "
            f"found {present or 'neither'}"
        )


def parse_config(data: dict) -> RunConfig:
    """Validate a config dictionary and build the domain objects."""
    _validate(data)
    drive_cfg = dict(data.get("drive", {}))
    omega_d = drive_cfg.get("omega_d")
    calibrate = omega_d in (None, "calibrate")

    if "toy" in data:
        toy_cfg = dict(data["toy"])
        if "delta" in drive_cfg:
            toy_cfg["delta"] = drive_cfg["delta"]
        try:
            model = ToyParams(**toy_cfg)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid 'toy' section: {exc}") from exc
        drive = DriveSpec(
            omega_d=None if calibrate else float(omega_d),
            n_harmonics=int(drive_cfg.get("n_harmonics", 2)),
        )
        allowed = SWEEP_AXES_TOY
    else:
        try:
            model = CircuitParams(**data["circuit"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid 'circuit' section: {exc}") from exc
        drive = DriveSpec(
            phi_ext_bar=TWO_PI * float(drive_cfg.get("phi_ext_bar_over_2pi", 0.0)),
            delta_phi=TWO_PI * float(drive_cfg.get("delta_phi_over_2pi", 0.0)),
            omega_d=None if calibrate else float(omega_d),
            n_harmonics=int(drive_cfg.get("n_harmonics", 2)),
        )
        allowed = SWEEP_AXES_CIRCUIT

    numerics = dict(DEFAULT_NUMERICS)
    numerics.update(data.get("numerics", {}))

    sweep = data.get("sweep")
    if sweep is not None:
        if sweep["axis"] not in allowed:
            raise ConfigError(
                f"invalid config at key 'sweep.axis': {sweep['axis']!r} not in {allowed}"
            )
        if "axis2" in sweep and sweep["axis2"]["axis"] not in allowed:
            raise ConfigError(
                f"invalid config at key 'sweep.axis2.axis': "
                f"{sweep['axis2']['axis']!r} not in {allowed}"
            )

    output = dict(data.get("output", {}))
    return RunConfig(data, model, drive, calibrate, numerics, sweep, output)


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    return parse_config(data)
