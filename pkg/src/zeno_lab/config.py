"""
Scenario configuration: strict JSON loading and validation.

Unknown keys are rejected. Every error is a ``ConfigError`` naming the
offending field with a dotted path (``protocol.n_measurements``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from .errors import ConfigError

SCENARIOS = ("linear_rabi", "gisin_two_level", "nlse_soliton", "custom_linear")
METHODS = ("rk4", "splitstep")
FORMATS = ("csv", "json")
MAX_SWEEP_POINTS = 10_000

MODEL_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "linear_rabi": {"alpha": 1.0},
    "gisin_two_level": {"alpha": 1.0, "lambda": 0.0, "omega": 0.0},
    "nlse_soliton": {
        "eta": 1.0,
        "u": 1.0,
        "a": 1.0,
        "b": 1.0,
        "x_min": -40.0,
        "x_max": 40.0,
        "n_points": 2048,
    },
    "custom_linear": {
        "hamiltonian_real": None,
        "hamiltonian_imag": None,
        "initial_state_real": None,
        "initial_state_imag": None,
    },
}

SWEEPABLE: Dict[str, Tuple[str, ...]] = {
    "linear_rabi": ("alpha",),
    "gisin_two_level": ("alpha", "lambda"),
    "nlse_soliton": ("b", "u", "eta"),
    "custom_linear": (),
}

_SECTIONS = ("scenario", "model", "protocol", "integrator", "output", "sweep")
_PROTOCOL_KEYS = ("total_time", "n_measurements", "collapse_mode", "trials", "seed")
_INTEGRATOR_KEYS = ("dt", "method")
_OUTPUT_KEYS = ("directory", "formats")


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    model: Dict[str, Any]
    total_time: float
    n_list: Tuple[int, ...]
    collapse_mode: str = "deterministic"
    trials: int = 10_000
    seed: int = 0
    dt: Optional[float] = None
    method: str = "rk4"
    out_dir: Optional[str] = None
    formats: Tuple[str, ...] = FORMATS
    sweep: Optional[Tuple[str, Tuple[float, ...]]] = None

    def to_dict(self) -> Dict[str, Any]:
        """Fully resolved config in the input schema; re-parses to an equal config."""
        d: Dict[str, Any] = {
            "scenario": self.scenario,
            "model": dict(self.model),
            "protocol": {
                "total_time": self.total_time,
                "n_measurements": list(self.n_list),
                "collapse_mode": self.collapse_mode,
                "trials": self.trials,
                "seed": self.seed,
            },
            "integrator": {"dt": self.dt, "method": self.method},
            "output": {"directory": self.out_dir, "formats": list(self.formats)},
        }
        if self.sweep is not None:
            d["sweep"] = {self.sweep[0]: list(self.sweep[1])}
        return d

    def with_overrides(self, **changes) -> "ScenarioConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes)


def _section(raw: Dict[str, Any], name: str, allowed) -> Dict[str, Any]:
    sec = raw.get(name, {})
    if sec is None:
        sec = {}
    if not isinstance(sec, dict):
        raise ConfigError(name, "must be an object")
    for key in sec:
        if key not in allowed:
            raise ConfigError(f"{name}.{key}", "unknown field")
    return sec


def _real(value, field: str, *, positive=False, nonneg=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(field, f"expected a number, got {value!r}")
    x = float(value)
    if not math.isfinite(x):
        raise ConfigError(field, "must be finite")
    if positive and not x > 0:
        raise ConfigError(field, "must be > 0")
    if nonneg and x < 0:
        raise ConfigError(field, "must be >= 0")
    return x


def _int(value, field: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(field, f"expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(field, f"must be >= {minimum}")
    return value


def _matrix(value, field: str, ndim: int):
    import numpy as np

    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(field, "expected a numeric array") from None
    if arr.ndim != ndim or arr.size == 0 or not np.all(np.isfinite(arr)):
        raise ConfigError(field, f"expected a finite non-empty {ndim}-d array")
    return arr.tolist()


def _model_section(scenario: str, raw: Dict[str, Any]) -> Dict[str, Any]:
    defaults = MODEL_DEFAULTS[scenario]
    sec = _section(raw, "model", defaults)
    model = dict(defaults)
    model.update(sec)
    if scenario == "custom_linear":
        for key in ("hamiltonian_real", "initial_state_real"):
            if model[key] is None:
                raise ConfigError(f"model.{key}", "required for custom_linear")
        for key in ("hamiltonian_real", "hamiltonian_imag"):
            if model[key] is not None:
                model[key] = _matrix(model[key], f"model.{key}", 2)
        for key in ("initial_state_real", "initial_state_imag"):
            if model[key] is not None:
                model[key] = _matrix(model[key], f"model.{key}", 1)
        return model
    for key, value in model.items():
        if key == "n_points":
            model[key] = _int(value, "model.n_points", 8)
        elif key in ("alpha", "lambda"):
            model[key] = _real(value, f"model.{key}", nonneg=True)
        elif key in ("eta", "a", "b"):
            model[key] = _real(value, f"model.{key}", positive=True)
        else:
            model[key] = _real(value, f"model.{key}")
    return model


def _sweep_section(scenario: str, raw) -> Optional[Tuple[str, Tuple[float, ...]]]:
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise ConfigError("sweep", "must be an object mapping one parameter to a list of values")
    if len(raw) != 1:
        raise ConfigError("sweep", f"exactly one parameter may be swept, got {len(raw)}")
    (param, values), = raw.items()
    if param not in SWEEPABLE[scenario]:
        raise ConfigError(f"sweep.{param}", f"not sweepable for {scenario}; choose from {SWEEPABLE[scenario]}")
    if not isinstance(values, list) or not values:
        raise ConfigError(f"sweep.{param}", "grid must be a non-empty list")
    if len(values) > MAX_SWEEP_POINTS:
        raise ConfigError(f"sweep.{param}", f"more than {MAX_SWEEP_POINTS} points")
    vals = tuple(_real(v, f"sweep.{param}") for v in values)
    return param, vals


def parse_config(raw: Dict[str, Any]) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    for key in raw:
        if key not in _SECTIONS:
            raise ConfigError(key, "unknown field")
    scenario = raw.get("scenario")
    if scenario not in SCENARIOS:
        raise ConfigError("scenario", f"must be one of {SCENARIOS}, got {scenario!r}")

    model = _model_section(scenario, raw)

    proto = _section(raw, "protocol", _PROTOCOL_KEYS)
    if "total_time" not in proto:
        raise ConfigError("protocol.total_time", "required")
    total_time = _real(proto["total_time"], "protocol.total_time", positive=True)
    n_raw = proto.get("n_measurements")
    if n_raw is None:
        raise ConfigError("protocol.n_measurements", "required")
    n_items = n_raw if isinstance(n_raw, list) else [n_raw]
    if not n_items:
        raise ConfigError("protocol.n_measurements", "list must not be empty")
    n_list = tuple(_int(n, "protocol.n_measurements", 1) for n in n_items)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ConfigError("protocol.n_measurements", "list must be strictly increasing")
    mode = proto.get("collapse_mode", "deterministic")
    if mode not in ("deterministic", "stochastic"):
        raise ConfigError("protocol.collapse_mode", "must be 'deterministic' or 'stochastic'")
    trials = _int(proto.get("trials", 10_000), "protocol.trials", 1)
    seed = _int(proto.get("seed", 0), "protocol.seed", 0)
    if seed >= 2**64:
        raise ConfigError("protocol.seed", "must fit in an unsigned 64-bit integer")

    integ = _section(raw, "integrator", _INTEGRATOR_KEYS)
    dt = integ.get("dt")
    if dt is not None:
        dt = _real(dt, "integrator.dt", positive=True)
        tau_min = total_time / n_list[-1]
        if dt > tau_min / 10.0:
            raise ConfigError("integrator.dt", f"must be <= tau/10 = {tau_min / 10:g} for the largest N")
    method = integ.get("method", "rk4")
    if method not in METHODS:
        raise ConfigError("integrator.method", f"must be one of {METHODS}")
    if method == "splitstep" and scenario != "nlse_soliton":
        raise ConfigError("integrator.method", "splitstep is only available for nlse_soliton")

    out = _section(raw, "output", _OUTPUT_KEYS)
    out_dir = out.get("directory")
    if out_dir is not None and not isinstance(out_dir, str):
        raise ConfigError("output.directory", "must be a string path")
    formats = out.get("formats", list(FORMATS))
    if not isinstance(formats, list) or not formats or any(f not in FORMATS for f in formats):
        raise ConfigError("output.formats", f"must be a non-empty subset of {FORMATS}")

    cfg = ScenarioConfig(
        scenario=scenario,
        model=model,
        total_time=total_time,
        n_list=n_list,
        collapse_mode=mode,
        trials=trials,
        seed=seed,
        dt=dt,
        method=method,
        out_dir=out_dir,
        formats=tuple(dict.fromkeys(formats)),
        sweep=_sweep_section(scenario, raw.get("sweep")),
    )
    validate_physics(cfg)
    return cfg


def validate_physics(cfg: ScenarioConfig) -> None:
    """Build the model once so physical invariants fail before any run."""
    from .runner import build_scenario

    points = [None] if cfg.sweep is None else [(cfg.sweep[0], v) for v in cfg.sweep[1]]
    for point in points:
        try:
            build_scenario(cfg, point)
        except ConfigError:
            raise
        except ValueError as exc:
            field = "model" if point is None else f"sweep.{point[0]}"
            raise ConfigError(field, str(exc)) from None


def load_config(path) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from None
    return parse_config(raw)
