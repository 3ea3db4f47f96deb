"""JSON configuration: device parameters, targets and transfer schedules."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .calibration import CrosstalkMatrix, LineResponse
from .coupling import CouplingTarget, make_schedule
from .errors import ValidationError
from .model import ChainConfig, ModulationSpec, QubitParams, TransferSchedule

_QUBIT_FIELDS = {
    "sweet_spot_freq",
    "operating_freq",
    "t1",
    "t2_star",
    "readout_fid_g",
    "readout_fid_e",
    "thermal_pop",
    "t1_sweet",
    "t2_star_sweet",
    "t2_echo_sweet",
}
_LINE_FIELDS = {"sample_rate", "rise_time", "ringing_amplitude", "ringing_frequency", "ringing_decay", "length"}


@dataclass
class Config:
    chain: ChainConfig
    target: Optional[CouplingTarget] = None
    uniform_t2_star: Optional[float] = None
    crosstalk: Optional[CrosstalkMatrix] = None
    line_response: Optional[LineResponse] = None
    schedule: Optional[TransferSchedule] = None
    raw: dict = field(default_factory=dict)


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"expected a number, got {value!r}", path)
    return float(value)


def _require(d: dict, key: str, path: str):
    if key not in d:
        raise ValidationError("missing required field", f"{path}.{key}" if path else key)
    return d[key]


def _qubit(d, path) -> QubitParams:
    if not isinstance(d, dict):
        raise ValidationError("expected an object", path)
    unknown = set(d) - _QUBIT_FIELDS
    if unknown:
        raise ValidationError(f"unknown field(s) {sorted(unknown)}", path)
    kw = {}
    for key in ("sweet_spot_freq", "operating_freq", "t1", "t2_star"):
        kw[key] = _number(_require(d, key, path), f"{path}.{key}")
    for key in _QUBIT_FIELDS - set(kw):
        if d.get(key) is not None:
            kw[key] = _number(d[key], f"{path}.{key}")
    try:
        return QubitParams(**kw)
    except ValidationError as exc:
        raise ValidationError(exc.message, f"{path}.{exc.path}" if exc.path else path) from None


def chain_from_dict(d: dict) -> ChainConfig:
    qubits_raw = _require(d, "qubits", "")
    if not isinstance(qubits_raw, list):
        raise ValidationError("expected a list", "qubits")
    qubits = [_qubit(q, f"qubits[{i}]") for i, q in enumerate(qubits_raw)]
    couplings = _require(d, "static_couplings", "")
    if not isinstance(couplings, list):
        raise ValidationError("expected a list", "static_couplings")
    couplings = [_number(g, f"static_couplings[{j}]") for j, g in enumerate(couplings)]
    return ChainConfig(tuple(qubits), tuple(couplings))


def target_from_dict(d: Optional[dict], n: int) -> Optional[CouplingTarget]:
    if d is None:
        return None
    if not isinstance(d, dict):
        raise ValidationError("expected an object", "target")
    kw = {}
    for key in ("duration", "base_coupling"):
        if d.get(key) is not None:
            kw[key] = _number(d[key], f"target.{key}")
    return CouplingTarget(n, **kw)


def schedule_to_dict(schedule: TransferSchedule) -> dict:
    return {
        "modulations": [
            {"amplitude": m.amplitude, "frequency": m.frequency, "phase": m.phase} for m in schedule.modulations
        ],
        "duration": schedule.duration,
        "effective_couplings": [[c.real, c.imag] for c in schedule.effective_couplings],
    }


def schedule_from_dict(d: dict, chain: ChainConfig) -> TransferSchedule:
    mods_raw = _require(d, "modulations", "schedule")
    mods = []
    for i, m in enumerate(mods_raw):
        p = f"schedule.modulations[{i}]"
        mods.append(
            ModulationSpec(
                _number(_require(m, "amplitude", p), f"{p}.amplitude"),
                _number(_require(m, "frequency", p), f"{p}.frequency"),
                _number(m.get("phase", 0.0), f"{p}.phase"),
            )
        )
    duration = _number(_require(d, "duration", "schedule"), "schedule.duration")
    sched = make_schedule(chain, mods, duration)
    if d.get("effective_couplings"):
        cached = TransferSchedule(
            sched.modulations, duration, tuple(complex(re, im) for re, im in d["effective_couplings"])
        )
        cached.check_against(chain, rtol=1e-9)
    return sched


def config_from_dict(d: dict) -> Config:
    if not isinstance(d, dict):
        raise ValidationError("configuration must be a JSON object")
    chain = chain_from_dict(d)
    target = target_from_dict(d.get("target"), chain.n)
    sim = d.get("simulation") or {}
    t2 = sim.get("uniform_t2_star")
    t2 = None if t2 is None else _number(t2, "simulation.uniform_t2_star")
    xt = None
    if d.get("crosstalk"):
        c = d["crosstalk"]
        if "correction" in c:
            xt = CrosstalkMatrix.from_correction(np.array(c["correction"], float))
        elif "response" in c:
            xt = CrosstalkMatrix.from_response(np.array(c["response"], float))
        else:
            raise ValidationError("give 'correction' or 'response'", "crosstalk")
        if xt.response.shape != (chain.n, chain.n):
            raise ValidationError(f"expected a {chain.n}x{chain.n} matrix", "crosstalk")
    line = None
    if d.get("line_response"):
        lr = d["line_response"]
        unknown = set(lr) - _LINE_FIELDS
        if unknown:
            raise ValidationError(f"unknown field(s) {sorted(unknown)}", "line_response")
        kw = {k: _number(v, f"line_response.{k}") for k, v in lr.items()}
        if "length" in kw:
            kw["length"] = int(kw["length"])
        line = LineResponse.parametric(**kw)
    sched = schedule_from_dict(d["schedule"], chain) if d.get("schedule") else None
    return Config(chain, target, t2, xt, line, sched, d)


def load_config(path) -> Config:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read configuration: {exc.strerror}", str(path)) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON at line {exc.lineno}: {exc.msg}", str(path)) from None
    return config_from_dict(data)


def default_config_dict() -> dict:
    text = resources.files("chainqst").joinpath("data/default_config.json").read_text()
    return json.loads(text)


def default_config() -> Config:
    return config_from_dict(default_config_dict())


def dump_json(obj, path) -> None:
    """Deterministic JSON (sorted keys, fixed float repr)."""
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
