"""Declarative run configuration (JSON) for the command-line tool.

Every section is optional; missing keys take the reference-device defaults.
Unknown keys anywhere are rejected before any computation starts.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import replace
from pathlib import Path

import jsonschema
import numpy as np

from . import cascade as cc
from . import coupled_mode as cm
from .device import reference_stages
from .errors import ConfigError
from .rfnet import BehavioralHighpass, FrequencyGrid


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


NUM = {"type": "number"}
POS = {"type": "number", "exclusiveMinimum": 0}

_STAGE = _obj({"n_cells": {"type": "integer", "minimum": 0}, "i0": POS, "r": {"type": "number", "minimum": 1},
               "c0": POS, "c_gnd": POS, "tan_delta": {"type": "number", "minimum": 0},
               "flux_period_scale": POS})

_GRID = _obj({"start_hz": {"type": "number", "minimum": 0}, "stop_hz": POS,
              "points": {"type": "integer", "minimum": 1}}, ("start_hz", "stop_hz", "points"))

SCHEMA = _obj({
    "stage1": _STAGE,
    "stage3": _STAGE,
    "applied_flux": NUM,
    "filter": _obj({
        "model": {"enum": ["behavioral", "morgan"]},
        "cutoff_hz": POS, "rolloff_db_per_ghz": POS, "stopband_floor_db": NUM,
        "passband_il_db": NUM, "return_loss_db": NUM, "min_phase": {"type": "boolean"},
        "l_f": POS, "c_f": POS, "n_stages": {"type": "integer", "minimum": 1},
    }),
    "pump": _obj({"frequency_hz": POS, "power_dbm": NUM,
                  "calibrate_to_db": {"type": ["number", "null"]},
                  "theta_max": POS}),
    "stage3_pump_derate_db": NUM,
    "interface_z_f": POS,
    "port_z": POS,
    "reverse_offset_db": NUM,
    "coherent_return_loss": {"type": "boolean"},
    "grid": _GRID,
    "flux_grid_points": {"type": "integer", "minimum": 2},
    "sweep": _obj({
        "variable": {"enum": ["stage1_length", "filter_impedance", "pump_power",
                              "applied_flux", "pump_frequency"]},
        "start": NUM, "stop": NUM, "step": NUM,
        "evaluator": {"enum": ["coupled_mode", "time_domain"]},
        "policy": {"enum": ["stage3_absorbs", "recalibrate_pump"]},
        "total_length": {"type": ["integer", "null"]},
        "target_gain_db": NUM, "theta_max": POS,
    }, ("variable", "start", "stop", "step")),
    "timedomain": _obj({
        "mode": {"enum": ["linear", "gain", "spm", "noise"]},
        "network": {"enum": ["stage1", "mtwpa"]},
        "n_cells": {"type": "integer", "minimum": 2},
        "flux": NUM,
        "ports": {"type": "array", "items": POS, "minItems": 2, "maxItems": 2},
        "signal_hz": {"type": "array", "items": POS, "minItems": 1},
        "signal_dbm": NUM,
        "pump_powers_dbm": {"type": "array", "items": NUM, "minItems": 1},
        "bin_hz": POS, "periods_dt": {"type": "integer", "minimum": 20},
        "dt": POS, "duration": POS, "ramp": {"type": "number", "minimum": 0},
        "settle_fraction": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        "temperature": {"type": "number", "minimum": 0}, "noise_bandwidth_hz": POS,
        "lossless": {"type": "boolean"},
    }),
    "noisefit": _obj({"data": {"type": "string"}, "bandwidth_hz": POS}),
    "seed": {"type": "integer", "minimum": 0},
    "output_dir": {"type": "string"},
})


def load(path) -> dict:
    """Read and validate a config file; errors name the line or key path."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return validate(raw)


def validate(raw: dict) -> dict:
    v = jsonschema.Draft202012Validator(SCHEMA)
    errs = sorted(v.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errs:
        e = errs[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"config {where}: {e.message}")
    g = raw.get("grid")
    if g and g["stop_hz"] <= g["start_hz"] and g["points"] > 1:
        raise ConfigError("config grid: stop_hz must exceed start_hz")
    return raw


def inputs_hash(raw: dict) -> str:
    return hashlib.sha256(json.dumps(raw, sort_keys=True).encode()).hexdigest()


def build_filter(raw: dict):
    f = dict(raw.get("filter", {}))
    model = f.pop("model", "behavioral")
    if model == "morgan":
        extra = set(f) - {"l_f", "c_f", "n_stages"}
        if extra:
            raise ConfigError(f"config filter: keys {sorted(extra)} do not apply to the morgan model")
        return cc.MorganFilter(**f)
    extra = set(f) - {"cutoff_hz", "rolloff_db_per_ghz", "stopband_floor_db",
                      "passband_il_db", "return_loss_db", "min_phase"}
    if extra:
        raise ConfigError(f"config filter: keys {sorted(extra)} do not apply to the behavioral model")
    return BehavioralHighpass(**f)


def build_mtwpa(raw: dict) -> cc.MtwpaConfig:
    s1d, s3d = raw.get("stage1", {}), raw.get("stage3", {})
    s1, s3 = reference_stages(s1d.get("n_cells", 350), s3d.get("n_cells", 350))
    s1 = replace(s1, **{k: v for k, v in s1d.items() if k != "n_cells"})
    s3 = replace(s3, **{k: v for k, v in s3d.items() if k != "n_cells"})
    p = raw.get("pump", {})
    pump = cm.PumpDrive.from_dbm(p.get("frequency_hz", 7.4e9), p.get("power_dbm", -75.0))
    kw = {k: raw[k] for k in ("applied_flux", "stage3_pump_derate_db", "interface_z_f", "port_z",
                              "reverse_offset_db", "coherent_return_loss") if k in raw}
    return cc.MtwpaConfig(s1, s3, build_filter(raw), pump=pump, **kw)


def grid_hz(raw: dict, default=(1e9, 14e9, 1301)) -> np.ndarray:
    g = raw.get("grid", {})
    start = g.get("start_hz", default[0])
    stop = g.get("stop_hz", default[1])
    n = g.get("points", default[2])
    return np.linspace(start, stop, n)


def build_grid(raw: dict, default=(1e9, 14e9, 1301)) -> FrequencyGrid:
    return FrequencyGrid.from_hz(grid_hz(raw, default))
