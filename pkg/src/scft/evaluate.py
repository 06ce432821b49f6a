"""Monte-Carlo harness: end-to-end trials, sweeps, and a brute-force oracle.

A trial runs the full chain (synthesize, decimate, report, fuse, decode,
detect) and greedily matches detections to the true carriers by nearest
frequency, one to one. Misses are counted separately instead of polluting the
frequency error with span-scale outliers. The relative RMSE normalizes the
matched-pair frequency error by the Nyquist rate and by the matched count.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .codebook import Codebook, build_codebook
from .decoder import Detection, decode_spectrum, detect
from .errors import ConfigError, MetricUndefinedError
from .sampler import PeakPolicy, average_periodogram, peak_search, snapshot_spectra, subsample
from .scenario import ScenarioConfig, SwarmConfig, compose_capture
from .swarm_link import SpectralReport, fuse, make_report

# Carriers are drawn above the lowest ~3% of the span; channels near DC carry
# degenerate, nearly all-zero codes.
LOW_BAND_FRACTION = 0.35 / 12.0

AXIS_KINDS = ("snr", "resolution")


@dataclass
class Policies:
    """Pipeline knobs shared by the harness and the CLI."""

    peak: PeakPolicy = field(default_factory=PeakPolicy)
    detect_threshold_db: float = 10.0
    detect_absolute: float | None = None
    off_grid: bool = False


@dataclass
class TrialResult:
    trial_index: int
    true_carriers_hz: np.ndarray
    detections: list[Detection]
    matched_pairs: list[tuple[float, float]]  # (true_hz, estimated_hz)
    n_misses: int
    n_false_alarms: int
    noise_floor_rel: float  # median off-carrier power / peak of an unthinned decode

    @property
    def estimated_carriers_hz(self) -> list[float]:
        return [d.frequency_hz for d in self.detections]


@dataclass
class PointStats:
    axis_value: float
    rmse_relative: float
    p_detect: float
    p_false_alarm: float
    k_trials: int
    noise_floor_rel: float


@dataclass
class EvalReport:
    axis_kind: str
    points: list[PointStats]
    k_trials: int
    base_seed: int
    runtime_s: float


def derive_seed(base_seed: int, *key: int) -> int:
    """Stable per-trial seed from (base_seed, point, trial)."""
    ss = np.random.SeedSequence([int(base_seed), *(int(k) for k in key)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _greedy_match(truths: np.ndarray, estimates: list[float]) -> list[tuple[int, int]]:
    """Nearest-frequency one-to-one matching; returns (truth_idx, estimate_idx)."""
    candidates = sorted(
        (abs(e - t), ti, ei)
        for ti, t in enumerate(truths)
        for ei, e in enumerate(estimates)
    )
    used_t: set[int] = set()
    used_e: set[int] = set()
    matches: list[tuple[int, int]] = []
    for _, ti, ei in candidates:
        if ti not in used_t and ei not in used_e:
            used_t.add(ti)
            used_e.add(ei)
            matches.append((ti, ei))
    return matches


def relative_rmse(trials: list[TrialResult], nyquist_rate_hz: float) -> float:
    """Root mean square matched-pair frequency error, normalized by the rate."""
    errors = [
        (est - true) ** 2 for trial in trials for true, est in trial.matched_pairs
    ]
    if not errors:
        raise MetricUndefinedError("no matched pairs; relative RMSE is undefined")
    return math.sqrt(sum(errors) / len(errors)) / nyquist_rate_hz


def node_spectra(scenario: ScenarioConfig, swarm: SwarmConfig) -> list:
    """Per-node capture, decimation, and snapshot FFTs."""
    out = []
    for node in swarm.nodes:
        capture = compose_capture(scenario, swarm, node.node_id)
        stream = subsample(capture, node.decimation)
        out.append(snapshot_spectra(stream, swarm.resolution_hz))
    return out


def acquire_reports(
    scenario: ScenarioConfig,
    swarm: SwarmConfig,
    policy: PeakPolicy | None = None,
) -> list[SpectralReport]:
    """Per-node capture, decimation, snapshot FFTs, and peak search."""
    return [
        make_report(spectra, peak_search(average_periodogram(spectra), policy))
        for spectra in node_spectra(scenario, swarm)
    ]


def _noise_floor_rel(powers: np.ndarray, truths: np.ndarray, resolution_hz: float) -> float:
    """Median decoded power away from the carriers, relative to the peak."""
    peak = float(powers.max(initial=0.0))
    if peak <= 0.0:
        return float("nan")
    mask = np.ones(powers.size, dtype=bool)
    channels = np.arange(powers.size)
    for f in truths:
        q = round(f / resolution_hz)
        mask &= np.abs(channels - q) > 1
    if not mask.any():
        return float("nan")
    return float(np.median(powers[mask]) / peak)


def run_trial(
    scenario: ScenarioConfig,
    swarm: SwarmConfig,
    policies: Policies | None = None,
    seed: int | None = None,
    codebook: Codebook | None = None,
    trial_index: int = 0,
    measure_floor: bool = True,
) -> TrialResult:
    """One full pipeline pass; deterministic given (configs, seed).

    With measure_floor, a second decode over unthinned (all-bin) reports
    measures the dense decoded noise floor relative to the peak; the
    operational decode still uses the thinned peak-search reports.
    """
    policies = policies or Policies()
    scen = scenario if seed is None else replace(scenario, seed=seed)
    cb = codebook if codebook is not None else build_codebook(swarm)

    spectra = node_spectra(scen, swarm)
    reports = [
        make_report(s, peak_search(average_periodogram(s), policies.peak))
        for s in spectra
    ]
    coded = fuse(reports, cb)
    estimate = decode_spectrum(coded, cb)
    detections = detect(
        estimate, policies.detect_threshold_db, policies.detect_absolute
    )
    estimate.detections = detections

    truths = np.array([e.carrier_hz for e in scen.emitters], dtype=float)
    estimates = [d.frequency_hz for d in detections]
    matches = _greedy_match(truths, estimates)
    pairs = [(float(truths[ti]), float(estimates[ei])) for ti, ei in matches]

    floor = float("nan")
    if measure_floor:
        full = [make_report(s, np.arange(s.m_points)) for s in spectra]
        dense = decode_spectrum(fuse(full, cb), cb)
        floor = _noise_floor_rel(dense.powers, truths, swarm.resolution_hz)

    return TrialResult(
        trial_index=trial_index,
        true_carriers_hz=truths,
        detections=detections,
        matched_pairs=pairs,
        n_misses=len(truths) - len(matches),
        n_false_alarms=len(estimates) - len(matches),
        noise_floor_rel=floor,
    )


def _draw_carriers(
    rng: np.random.Generator,
    count: int,
    span_hz: float,
    resolution_hz: float,
    off_grid: bool,
) -> np.ndarray:
    lo_hz = LOW_BAND_FRACTION * span_hz
    if off_grid:
        return rng.uniform(lo_hz, span_hz, size=count)
    q_span = round(span_hz / resolution_hz)
    q_lo = max(1, math.ceil(lo_hz / resolution_hz))
    if q_span - q_lo < count:
        raise ConfigError(
            f"cannot draw {count} distinct carriers from {q_span - q_lo} channels"
        )
    channels = rng.choice(np.arange(q_lo, q_span), size=count, replace=False)
    return np.sort(channels).astype(float) * resolution_hz


def sweep(
    axis_kind: str,
    axis_values: list[float],
    scenario: ScenarioConfig,
    swarm: SwarmConfig,
    policies: Policies | None = None,
    k_trials: int = 50,
    base_seed: int = 0,
) -> EvalReport:
    """K independent trials per axis point, carriers redrawn every trial.

    The configured emitters serve as templates; each trial replaces their
    carriers with fresh draws over the usable span (uniform on the channel
    grid, or continuous with policies.off_grid).
    """
    if axis_kind not in AXIS_KINDS:
        raise ConfigError(f"axis must be one of {AXIS_KINDS}, got {axis_kind!r}")
    if k_trials < 1:
        raise ConfigError(f"k_trials must be >= 1, got {k_trials}")
    if not axis_values:
        raise ConfigError("axis_values must not be empty")
    if not scenario.emitters:
        raise ConfigError("sweep needs at least one template emitter")
    policies = policies or Policies()

    t0 = time.perf_counter()
    points = []
    for pi, value in enumerate(axis_values):
        if axis_kind == "snr":
            swarm_pt = swarm
            scen_pt = replace(scenario, snr_db=float(value))
        else:
            swarm_pt = replace(swarm, resolution_hz=float(value))
            scen_pt = scenario
        cb = build_codebook(swarm_pt)
        span = swarm_pt.unambiguous_span_hz
        i_emitters = len(scen_pt.emitters)

        trials = []
        for k in range(k_trials):
            seed = derive_seed(base_seed, pi, k)
            rng = np.random.default_rng(seed)
            carriers = _draw_carriers(
                rng, i_emitters, span, swarm_pt.resolution_hz, policies.off_grid
            )
            emitters = [
                replace(e, carrier_hz=float(f))
                for e, f in zip(scen_pt.emitters, carriers)
            ]
            trial_scen = replace(scen_pt, emitters=emitters)
            trials.append(
                run_trial(trial_scen, swarm_pt, policies, seed, cb, trial_index=k)
            )

        matched = sum(len(t.matched_pairs) for t in trials)
        try:
            rmse = relative_rmse(trials, swarm_pt.nyquist_rate_hz)
        except MetricUndefinedError:
            rmse = float("nan")
        q_total = cb.q_total
        floors = [t.noise_floor_rel for t in trials if not math.isnan(t.noise_floor_rel)]
        points.append(
            PointStats(
                axis_value=float(value),
                rmse_relative=rmse,
                p_detect=matched / (k_trials * i_emitters),
                p_false_alarm=sum(t.n_false_alarms for t in trials)
                / (k_trials * max(q_total - i_emitters, 1)),
                k_trials=k_trials,
                noise_floor_rel=float(np.median(floors)) if floors else float("nan"),
            )
        )

    return EvalReport(
        axis_kind=axis_kind,
        points=points,
        k_trials=k_trials,
        base_seed=int(base_seed),
        runtime_s=time.perf_counter() - t0,
    )


def nyquist_oracle(
    scenario: ScenarioConfig,
    swarm: SwarmConfig,
    resolution_hz: float,
    rel_threshold_db: float = 10.0,
    policy: PeakPolicy | None = None,
) -> set[int]:
    """Ground-truth occupied channels from an undecimated capture.

    Runs the same snapshot FFT, averaged periodogram, and peak policy on the
    full-rate samples of the first node, then keeps channels within
    rel_threshold_db of the strongest, mirroring the decoder's detection cut.
    """
    node_id = swarm.nodes[0].node_id
    capture = compose_capture(scenario, swarm, node_id)
    spectra = snapshot_spectra(subsample(capture, 1), resolution_hz)
    periodogram = average_periodogram(spectra)
    hits = peak_search(periodogram, policy)
    if hits.size == 0:
        return set()
    floor = periodogram[hits].max() * 10.0 ** (-rel_threshold_db / 10.0)
    return {int(q) for q in hits if periodogram[q] >= floor}
