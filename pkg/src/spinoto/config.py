"""Run configuration: JSON files merged over per-command defaults and validated.

A config is a nested dict. Only the sections a command uses are read; the
fully resolved config is echoed into the run manifest, so a run can be
repeated from the manifest alone.
"""

import copy
import json

import jsonschema
import numpy as np

from .open_system.rates import DissipationParams
from .protocols import ModelSpec, ProtocolSpec, Rotation, fig4_initial_state
from . import spin

COMMANDS = ("oto", "distinguish", "time-ordered", "dissipative", "wigner", "lyapunov",
            "feasibility", "fig3", "fig4a", "fig4b")


class ConfigError(ValueError):
    pass


_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_rotation = {
    "type": "object",
    "properties": {"axis": {"enum": ["x", "y", "z"]}, "angle": _num},
    "required": ["axis", "angle"],
    "additionalProperties": False,
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "model": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["twisting", "kicked_top"]},
                "N": {"type": "integer", "minimum": 1},
                "chi": _pos,
                "k": _num,
                "p": _num,
            },
        },
        "initial": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["coherent", "dicke", "fig4"]},
                "theta": _num,
                "phi": _num,
                "m": _num,
                "y_sign": {"enum": [1, -1]},
            },
        },
        "V": _rotation,
        "W": _rotation,
        "times": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "start": {"type": "number", "minimum": 0},
                "stop": {"type": "number", "minimum": 0},
                "step": _pos,
                "values": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
            },
        },
        "dissipation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "eta": _pos,
                "d": _pos,
                "gamma": {"type": ["number", "null"], "minimum": 0},
                "mu": {"type": ["number", "null"], "minimum": 0},
                "photon_budget": {"type": "integer", "minimum": 0},
                "dissipate_during_kick": {"const": False},
            },
        },
        "n_traj": {"type": "integer", "minimum": 1},
        "master_seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "fig4a": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "N_values": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
                "n_kicks": {"type": "integer", "minimum": 1},
                "threshold": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            },
        },
        "wigner": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_theta": {"type": ["integer", "null"], "minimum": 2},
                "n_phi": {"type": ["integer", "null"], "minimum": 2},
            },
        },
        "lyapunov": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "k": {"type": "array", "items": _num, "minItems": 1},
                "p": _num,
                "n_steps": {"type": "integer", "minimum": 100},
                "renorm_every": {"type": "integer", "minimum": 1},
                "n_starts": {"type": "integer", "minimum": 1},
                "S": {"type": "number", "exclusiveMinimum": 1},
            },
        },
        "feasibility": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "eta": _pos,
                "N": {"type": "integer", "minimum": 1},
                "k": _pos,
                "Gamma": _pos,
                "Delta": _pos,
                "phi": {"type": ["number", "null"], "minimum": 0},
                "d": {"type": ["number", "null"], "exclusiveMinimum": 0},
            },
        },
    },
}

BASE = {
    "model": {"kind": "kicked_top", "N": 100, "chi": 1.0, "k": 3.0, "p": float(np.pi / 2)},
    "initial": {"kind": "fig4", "y_sign": 1},
    "V": {"axis": "z", "angle": 0.1},
    "W": {"axis": "z", "angle": 0.1},
    "times": {"start": 0, "stop": 20, "step": 1},
    "dissipation": {"eta": 100.0, "d": 20.0, "gamma": None, "mu": None, "photon_budget": 5,
                    "dissipate_during_kick": False},
    "n_traj": 200,
    "master_seed": 0,
    "fig4a": {"N_values": [50, 100, 200, 300, 400, 500], "n_kicks": 20, "threshold": 0.5},
    "wigner": {"n_theta": None, "n_phi": None},
    "lyapunov": {"k": [0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0], "p": float(np.pi / 2), "n_steps": 2000,
                 "renorm_every": 1, "n_starts": 50, "S": 50.0},
    "feasibility": {"eta": 100.0, "N": 100, "k": 3.0, "Gamma": 1.0, "Delta": 500.0, "phi": None, "d": 20.0},
}

# presets pin every model parameter; time grids and seeds listed in
# UNSTATED_DEFAULTS are free choices
PRESETS = {
    "fig3": {
        "model": {"kind": "twisting", "N": 50, "chi": 1.0},
        "initial": {"kind": "coherent", "theta": float(np.pi / 2), "phi": float(np.pi / 2)},
        "V": {"axis": "z", "angle": float(np.pi / 4)},
        "W": {"axis": "z", "angle": float(np.pi / 4)},
        "times": {"start": 0.0, "stop": 0.12, "step": 0.001},
    },
    "fig4a": {},
    "fig4b": {
        "model": {"kind": "kicked_top", "N": 100, "k": 3.0},
        "V": {"axis": "z", "angle": 0.1},
        "W": {"axis": "z", "angle": 0.1},
        "times": {"start": 0, "stop": 10, "step": 1},
        "dissipation": {"eta": 100.0, "d": 20.0, "photon_budget": 5},
        "n_traj": 200,
        "master_seed": 2024,
    },
}
UNSTATED_DEFAULTS = {
    "fig3": ["times"],
    "fig4a": [],
    "fig4b": ["times", "master_seed"],
}


def merge(base, override):
    out = copy.deepcopy(base)
    for key, val in (override or {}).items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def validate(cfg):
    """Raise ConfigError naming the offending field, e.g. ``model.N: ...``."""
    errors = sorted(jsonschema.Draft202012Validator(SCHEMA).iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        msgs = []
        for e in errors:
            path = ".".join(str(p) for p in e.absolute_path) or "<root>"
            msgs.append(f"{path}: {e.message}")
        raise ConfigError("; ".join(msgs))
    t = cfg["times"]
    if "values" not in t and t["stop"] < t["start"]:
        raise ConfigError("times.stop: must be >= times.start")
    if cfg["model"]["kind"] == "kicked_top":
        for v in _raw_grid(t):
            if abs(v - round(v)) > 1e-9:
                raise ConfigError("times: kicked_top times must be whole kick counts")
    return cfg


def resolve(command, user=None, seed=None):
    """Defaults, then preset, then user file, then CLI overrides; validated."""
    if command not in COMMANDS:
        raise ConfigError(f"command: unknown command {command!r}")
    cfg = merge(BASE, PRESETS.get(command, {}))
    cfg = merge(cfg, user)
    if seed is not None:
        cfg["master_seed"] = int(seed)
    return validate(cfg)


def load(path):
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"<file>: invalid JSON ({exc})") from None


def _raw_grid(t):
    if "values" in t:
        return np.asarray(t["values"], dtype=float)
    n = int(round((t["stop"] - t["start"]) / t["step"])) + 1
    return t["start"] + t["step"] * np.arange(n)


def time_grid(cfg):
    vals = _raw_grid(cfg["times"])
    if cfg["model"]["kind"] == "kicked_top":
        return [int(round(v)) for v in vals]
    return [float(v) for v in vals]


def build_model(cfg, N=None):
    m = cfg["model"]
    N = m["N"] if N is None else N
    return ModelSpec(m["kind"], N / 2, chi=m.get("chi", 1.0), k=m.get("k", 3.0), p=m.get("p", np.pi / 2))


def build_initial(cfg, S):
    ini = cfg["initial"]
    kind = ini.get("kind", "fig4")
    if kind == "fig4":
        return fig4_initial_state(S, y_sign=ini.get("y_sign", 1))
    if kind == "coherent":
        return spin.coherent_state(S, ini.get("theta", 0.0), ini.get("phi", 0.0))
    return spin.basis_state(S, ini.get("m", S))


def build_spec(cfg, N=None, angle=None):
    """ProtocolSpec from a config; ``angle`` overrides both V and W angles."""
    model = build_model(cfg, N)
    V = Rotation(cfg["V"]["axis"], cfg["V"]["angle"] if angle is None else angle)
    W = Rotation(cfg["W"]["axis"], cfg["W"]["angle"] if angle is None else angle)
    return ProtocolSpec(model, build_initial(cfg, model.S), V=V, W=W)


def build_dissipation(cfg):
    d = cfg["dissipation"]
    chi = cfg["model"].get("chi", 1.0)
    if d.get("gamma") is not None or d.get("mu") is not None:
        ref = DissipationParams(chi=chi, eta=d["eta"], d=d["d"])
        gamma = ref.gamma if d.get("gamma") is None else d["gamma"]
        mu = ref.mu if d.get("mu") is None else d["mu"]
        return DissipationParams.from_rates(gamma, mu, chi=chi, photon_budget=d["photon_budget"])
    return DissipationParams(chi=chi, eta=d["eta"], d=d["d"], photon_budget=d["photon_budget"])
