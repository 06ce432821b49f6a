"""JSON configuration loading with key-path error reporting.

One document, three sections::

    {
      "swarm":    {"nyquist_rate_hz": ..., "resolution_hz": ...,
                   "clock_offset_policy": "none",
                   "nodes": [{"node_id": 0, "position_m": [x, y],
                              "decimation": r}, ...]},
      "scenario": {"snr_db": ... | null, "seed": ..., "capture_duration_s": ...,
                   "emitters": [{"carrier_hz": ..., "modulation": "tone",
                                 ...per-modulation fields...}, ...]},
      "policies": {"peak":   {"threshold_factor_db": ..., "max_peaks": ...},
                   "detect": {"threshold_db_below_peak": ...,
                              "absolute_threshold": ...},
                   "sweep":  {"snr_db": [...], "resolution_hz": [...]}}
    }

Field names mirror the dataclasses in scenario/sampler/evaluate. snr_db null
disables noise. The policies section and everything in it is optional.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, ValidationError
from .evaluate import Policies
from .sampler import PeakPolicy
from .scenario import EmitterSpec, NodeConfig, ScenarioConfig, SwarmConfig

DEFAULT_SWEEP_SNR_DB = [-10.0, -5.0, 0.0, 5.0, 10.0, 20.0]


@dataclass
class RunConfig:
    scenario: ScenarioConfig
    swarm: SwarmConfig
    policies: Policies
    sweep_snr_db: list[float] = field(default_factory=lambda: list(DEFAULT_SWEEP_SNR_DB))
    sweep_resolution_hz: list[float] = field(default_factory=list)


def _expect(mapping, key, path, required=True, default=None):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{path}: expected an object")
    if key not in mapping:
        if required:
            raise ConfigError(f"{path}.{key}: missing required key")
        return default
    return mapping[key]


def _number(value, path, allow_none=False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _parse_emitter(obj, path) -> EmitterSpec:
    kwargs = {"carrier_hz": _number(_expect(obj, "carrier_hz", path), f"{path}.carrier_hz")}
    if "modulation" in obj:
        kwargs["modulation"] = obj["modulation"]
    for key in (
        "bandwidth_hz",
        "power",
        "azimuth_rad",
        "pulse_start_s",
        "pulse_width_s",
        "chip_rate_hz",
        "sweep_rate_hz_per_s",
    ):
        if key in obj:
            kwargs[key] = _number(obj[key], f"{path}.{key}")
    try:
        return EmitterSpec(**kwargs)
    except ValidationError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_scenario(obj, path) -> ScenarioConfig:
    emitters_obj = _expect(obj, "emitters", path, required=False, default=[])
    if not isinstance(emitters_obj, list):
        raise ConfigError(f"{path}.emitters: expected a list")
    emitters = [
        _parse_emitter(e, f"{path}.emitters[{i}]") for i, e in enumerate(emitters_obj)
    ]
    snr = _number(_expect(obj, "snr_db", path, required=False), f"{path}.snr_db", allow_none=True)
    seed = _expect(obj, "seed", path, required=False, default=0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"{path}.seed: expected an integer, got {seed!r}")
    duration = _number(
        _expect(obj, "capture_duration_s", path), f"{path}.capture_duration_s"
    )
    try:
        return ScenarioConfig(
            emitters=emitters, snr_db=snr, seed=seed, capture_duration_s=duration
        )
    except ValidationError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_swarm(obj, path) -> SwarmConfig:
    nodes_obj = _expect(obj, "nodes", path)
    if not isinstance(nodes_obj, list):
        raise ConfigError(f"{path}.nodes: expected a list")
    nodes = []
    for i, n in enumerate(nodes_obj):
        npath = f"{path}.nodes[{i}]"
        node_id = _expect(n, "node_id", npath)
        position = _expect(n, "position_m", npath, required=False, default=[0.0, 0.0])
        decimation = _expect(n, "decimation", npath)
        if not isinstance(position, (list, tuple)) or len(position) != 2:
            raise ConfigError(f"{npath}.position_m: expected [x, y]")
        try:
            nodes.append(
                NodeConfig(
                    node_id=node_id,
                    position_m=(
                        _number(position[0], f"{npath}.position_m[0]"),
                        _number(position[1], f"{npath}.position_m[1]"),
                    ),
                    decimation=decimation,
                )
            )
        except ConfigError as exc:
            raise ConfigError(f"{npath}: {exc}") from exc
    try:
        return SwarmConfig(
            nyquist_rate_hz=_number(
                _expect(obj, "nyquist_rate_hz", path), f"{path}.nyquist_rate_hz"
            ),
            nodes=nodes,
            resolution_hz=_number(
                _expect(obj, "resolution_hz", path), f"{path}.resolution_hz"
            ),
            clock_offset_policy=_expect(
                obj, "clock_offset_policy", path, required=False, default="none"
            ),
        )
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_policies(obj, path):
    if obj is None:
        return Policies(), list(DEFAULT_SWEEP_SNR_DB), []
    peak_obj = _expect(obj, "peak", path, required=False, default={})
    try:
        peak = PeakPolicy(
            threshold_factor_db=_number(
                _expect(peak_obj, "threshold_factor_db", f"{path}.peak", required=False, default=10.0),
                f"{path}.peak.threshold_factor_db",
            ),
            max_peaks=_expect(peak_obj, "max_peaks", f"{path}.peak", required=False),
        )
    except ConfigError as exc:
        raise ConfigError(f"{path}.peak: {exc}") from exc
    detect_obj = _expect(obj, "detect", path, required=False, default={})
    policies = Policies(
        peak=peak,
        detect_threshold_db=_number(
            _expect(detect_obj, "threshold_db_below_peak", f"{path}.detect", required=False, default=10.0),
            f"{path}.detect.threshold_db_below_peak",
        ),
        detect_absolute=_number(
            _expect(detect_obj, "absolute_threshold", f"{path}.detect", required=False),
            f"{path}.detect.absolute_threshold",
            allow_none=True,
        ),
    )
    sweep_obj = _expect(obj, "sweep", path, required=False, default={})
    snr_values = _expect(sweep_obj, "snr_db", f"{path}.sweep", required=False, default=list(DEFAULT_SWEEP_SNR_DB))
    res_values = _expect(sweep_obj, "resolution_hz", f"{path}.sweep", required=False, default=[])
    for name, values in (("snr_db", snr_values), ("resolution_hz", res_values)):
        if not isinstance(values, list):
            raise ConfigError(f"{path}.sweep.{name}: expected a list of numbers")
    return (
        policies,
        [_number(v, f"{path}.sweep.snr_db[{i}]") for i, v in enumerate(snr_values)],
        [_number(v, f"{path}.sweep.resolution_hz[{i}]") for i, v in enumerate(res_values)],
    )


def parse_config(document: dict) -> RunConfig:
    scenario = _parse_scenario(_expect(document, "scenario", "config"), "scenario")
    swarm = _parse_swarm(_expect(document, "swarm", "config"), "swarm")
    policies, snr_values, res_values = _parse_policies(
        document.get("policies"), "policies"
    )
    _cross_validate(scenario, swarm)
    return RunConfig(
        scenario=scenario,
        swarm=swarm,
        policies=policies,
        sweep_snr_db=snr_values,
        sweep_resolution_hz=res_values,
    )


def _cross_validate(scenario: ScenarioConfig, swarm: SwarmConfig):
    snapshots = scenario.capture_duration_s * swarm.resolution_hz
    if abs(snapshots - round(snapshots)) > 1e-6 or round(snapshots) < 1:
        raise ConfigError(
            f"scenario.capture_duration_s: duration * resolution_hz = {snapshots} "
            f"must be a positive integer number of snapshots"
        )
    span = swarm.unambiguous_span_hz
    for i, e in enumerate(scenario.emitters):
        if e.carrier_hz > span:
            raise ConfigError(
                f"scenario.emitters[{i}].carrier_hz: {e.carrier_hz} exceeds the "
                f"unambiguous span {span}"
            )


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        document = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON: {exc}") from exc
    return parse_config(document)
