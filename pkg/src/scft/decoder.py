"""Spectrum decoding: cross-node covariance per channel, minimum-entry power.

Only a signal whose code matches the channel shows up in every node's bucket
for that channel, so every entry of the channel's covariance then carries the
signal power. Anything else leaves at least one entry at noise level (or at
exactly zero when some node's bucket is empty), and the minimum-magnitude
entry is taken as the channel power. Working with entry magnitudes makes the
decode invariant to per-node phase, which is what tolerates unsynchronized
node clocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codebook import Codebook
from .errors import DecodeError, ValidationError
from .swarm_link import CodedSpectrum


@dataclass
class ChannelCovariance:
    channel: int
    matrix: np.ndarray  # complex Hermitian, shape (P, P)


@dataclass
class Detection:
    channel: int
    frequency_hz: float
    power: float


@dataclass
class SpectrumEstimate:
    powers: np.ndarray  # real, length Q
    resolution_hz: float
    detections: list[Detection] = field(default_factory=list)


def _hermitize(r: np.ndarray) -> np.ndarray:
    return 0.5 * (r + np.conj(np.swapaxes(r, -1, -2)))


def channel_covariance(ys: CodedSpectrum, q: int) -> ChannelCovariance:
    """Snapshot-averaged covariance of one channel's cross-node amplitudes."""
    if not 0 <= q < ys.q_total:
        raise ValidationError(f"channel {q} outside [0, {ys.q_total})")
    v = ys.values[:, q, :]
    r = v @ v.conj().T / ys.snapshot_count
    return ChannelCovariance(channel=int(q), matrix=_hermitize(r))


def channel_power(r: ChannelCovariance) -> float:
    """Minimum magnitude over all entries of the covariance matrix."""
    return float(np.min(np.abs(r.matrix)))


def decode_spectrum(ys: CodedSpectrum, cb: Codebook) -> SpectrumEstimate:
    """Channel powers over the whole grid.

    Channels with any unoccupied node bucket decode to exactly zero without
    touching the covariance; this is what suppresses bucket-collision ghosts.
    """
    if ys.q_total != cb.q_total:
        raise DecodeError(
            f"coded spectrum has {ys.q_total} channels, codebook {cb.q_total}"
        )
    if ys.node_ids != cb.node_ids:
        try:
            cb = cb.restrict(ys.node_ids)
        except Exception as exc:
            raise DecodeError(
                f"coded spectrum nodes {ys.node_ids} do not match "
                f"codebook nodes {cb.node_ids}"
            ) from exc
    if ys.values.shape != (len(cb.node_ids), cb.q_total, ys.snapshot_count):
        raise DecodeError(f"values tensor has shape {ys.values.shape}")

    powers = np.zeros(cb.q_total)
    full = np.flatnonzero(ys.occupancy.all(axis=0))
    if full.size:
        v = ys.values[:, full, :]
        r = np.einsum("pcl,scl->cps", v, v.conj()) / ys.snapshot_count
        powers[full] = np.abs(_hermitize(r)).min(axis=(1, 2))
    return SpectrumEstimate(powers=powers, resolution_hz=cb.resolution_hz)


def detect(
    est: SpectrumEstimate,
    threshold_db_below_peak: float = 10.0,
    absolute_threshold: float | None = None,
) -> list[Detection]:
    """Channels above threshold, strongest first.

    The default threshold is relative to the strongest channel; passing
    absolute_threshold switches to a fixed power floor. An all-zero spectrum
    yields no detections.
    """
    powers = np.asarray(est.powers, dtype=float)
    if absolute_threshold is not None:
        threshold = float(absolute_threshold)
    else:
        peak = float(powers.max(initial=0.0))
        if peak <= 0.0:
            return []
        threshold = peak * 10.0 ** (-threshold_db_below_peak / 10.0)
    hits = np.flatnonzero((powers >= threshold) & (powers > 0.0))
    order = sorted(hits, key=lambda q: (-powers[q], q))
    return [
        Detection(channel=int(q), frequency_hz=q * est.resolution_hz, power=float(powers[q]))
        for q in order
    ]
