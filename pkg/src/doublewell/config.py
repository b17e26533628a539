"""Run configuration: the JSON schema and its conversion to solver objects."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional

import jsonschema

from .core import DoubleBox, Grid, PotentialSpec, build_grid, potential_from_dict
from .errors import DomainError
from .gatesim import RampProfile
from .twobody import ContactInteraction

COMMANDS = ("spectrum", "tunnel", "twobody", "leveldiagram", "gate", "sweep")
SWEEP_PARAMS = ("barrier_height", "barrier_width", "a", "t_hold", "t_ramp")
SWEEP_QUANTITIES = ("levels", "tunneling", "phase")

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_count = {"type": "integer", "minimum": 0}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


POTENTIAL_SCHEMA = {
    "oneOf": [
        _obj({"variant": {"const": "infinite_box"}, "L": _pos}, ["variant"]),
        _obj({"variant": {"const": "double_box"}, "L": _pos, "barrier_width": _nonneg,
              "barrier_height": _nonneg}, ["variant"]),
        _obj({"variant": {"const": "biquartic"}, "alpha": _num, "beta": _num,
              "half_width": _pos, "center_offset": _num}, ["variant"]),
    ]
}

OPTION_SCHEMAS = {
    "spectrum": _obj({"k": {"type": "integer", "minimum": 1}, "export_states": {"type": "boolean"}}),
    "tunnel": _obj({"t_final": _pos, "dt": _pos, "store_every": {"type": "integer", "minimum": 1},
                    "periods": _pos}),
    "twobody": _obj({"k": {"type": "integer", "minimum": 1, "maximum": 12}}),
    "leveldiagram": _obj({"barrier_start": _nonneg, "barrier_stop": _nonneg, "count": _count}),
    "gate": _obj({"target_phase": _num, "calibrate": {"type": "boolean"},
                  "allow_wrap": {"type": "boolean"}, "dt": _pos, "adiabaticity": _pos,
                  "nodes": {"type": "integer", "minimum": 5}, "store_every": {"type": "integer", "minimum": 1}}),
    "sweep": _obj({"param": {"enum": list(SWEEP_PARAMS)}, "start": _num, "stop": _num,
                   "count": _count, "quantity": {"enum": list(SWEEP_QUANTITIES)},
                   "nodes": {"type": "integer", "minimum": 5}},
                  ["param", "start", "stop", "count"]),
}

CONFIG_SCHEMA = _obj({
    "command": {"enum": list(COMMANDS)},
    "potential": POTENTIAL_SCHEMA,
    "grid": _obj({"n": {"type": "integer"}, "x_min": _num, "x_max": _num}),
    "interaction": _obj({"a": _num}),
    "ramp": _obj({"V_high": _nonneg, "V_low": _nonneg, "t_ramp": _nonneg, "t_hold": _nonneg,
                  "shape": {"enum": ["smoothstep", "linear", "cosine"]}}),
    "output_dir": {"type": "string"},
    "seed": {"type": "integer"},
    "workers": {"type": "integer", "minimum": 1},
    "figures": {"type": "boolean"},
    "options": {"type": "object"},
})

DEFAULT_N = {"spectrum": 1000, "tunnel": 1000, "twobody": 64, "leveldiagram": 96,
             "gate": 96, "sweep": 96}
DEFAULT_POTENTIAL = {"variant": "double_box", "L": 1.0, "barrier_width": 0.2, "barrier_height": 500.0}


class ConfigError(DomainError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    potential: PotentialSpec
    grid: Grid
    interaction: ContactInteraction
    ramp: Optional[RampProfile]
    output_dir: str
    seed: int = 0
    workers: int = 1
    figures: bool = True
    options: dict = field(default_factory=dict)


def validate(data: Any, command: Optional[str] = None) -> RunConfig:
    """Schema-check ``data`` and build the solver objects; raises ConfigError."""
    try:
        jsonschema.validate(data, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{path}: {exc.message}") from None
    cmd = data.get("command", command)
    if command is not None and cmd != command:
        raise ConfigError(f"config is for command {cmd!r}, not {command!r}")
    if cmd is None:
        raise ConfigError("no command given")
    options = data.get("options", {})
    try:
        jsonschema.validate(options, OPTION_SCHEMAS[cmd])
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"options: {exc.message}") from None
    if "output_dir" not in data:
        raise ConfigError("output_dir is required (or pass --out)")
    try:
        potential = potential_from_dict(data.get("potential", DEFAULT_POTENTIAL))
        lo, hi = potential.domain()
        g = data.get("grid", {})
        grid = build_grid(g.get("n", DEFAULT_N[cmd]), g.get("x_min", lo), g.get("x_max", hi))
        interaction = ContactInteraction(float(data.get("interaction", {}).get("a", 0.5)))
        ramp = RampProfile(**data["ramp"]) if "ramp" in data else None
    except (DomainError, TypeError) as exc:
        raise ConfigError(str(exc)) from None

    needs_double_box = cmd in ("leveldiagram", "gate") or (
        cmd == "sweep" and (options.get("quantity", "levels") in ("levels", "phase")
                            or options.get("param") in ("barrier_width", "barrier_height")))
    if needs_double_box and not isinstance(potential, DoubleBox):
        raise ConfigError(f"{cmd} requires a double_box potential")
    if cmd == "sweep":
        quantity = options.get("quantity", "levels")
        if options["param"] in ("t_hold", "t_ramp") and quantity != "phase":
            raise ConfigError("t_hold/t_ramp sweeps require quantity 'phase'")
        if quantity == "phase" and ramp is None:
            raise ConfigError("phase sweeps require a ramp")
        if quantity == "phase" and options["param"] == "barrier_height":
            raise ConfigError("phase sweeps take the barrier heights from the ramp")
        if options["param"] in ("barrier_width", "barrier_height", "t_hold", "t_ramp") and min(
                options["start"], options["stop"]) < 0:
            raise ConfigError(f"{options['param']} must be non-negative")
    return RunConfig(cmd, potential, grid, interaction, ramp, data["output_dir"],
                     int(data.get("seed", 0)), int(data.get("workers", 1)),
                     bool(data.get("figures", True)), options)


def load(path, command: Optional[str] = None, overrides: Optional[dict] = None) -> RunConfig:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    return validate(data, command)
