"""Per-node processing: decimation, snapshot FFTs, periodogram, peak search.

Decimation is plain sample skipping with no anti-alias filter; the aliasing
is the point, it folds the whole band into one small FFT. Snapshots are
contiguous rectangular windows of 1/resolution_hz seconds, so every node
shares the same bin spacing even though their FFT lengths differ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ValidationError


@dataclass
class SubNyquistStream:
    node_id: int
    samples: np.ndarray
    rate_hz: float


@dataclass
class SnapshotSpectra:
    """Per-snapshot FFTs of one node's stream, one row per snapshot."""

    node_id: int
    spectra: np.ndarray  # complex, shape (L, M)
    resolution_hz: float
    m_points: int

    @property
    def snapshot_count(self) -> int:
        return self.spectra.shape[0]


@dataclass
class FoldResult:
    folded_hz: float
    zone: int


@dataclass
class PeakPolicy:
    """Occupied-bin rule: floor estimate times a dB factor, optional peak cap."""

    floor_estimator: str = "median"
    threshold_factor_db: float = 10.0
    max_peaks: int | None = None

    def __post_init__(self):
        if self.floor_estimator != "median":
            raise ConfigError(f"unsupported floor_estimator {self.floor_estimator!r}")
        if self.threshold_factor_db <= 0:
            raise ConfigError(
                f"threshold_factor_db must be positive, got {self.threshold_factor_db}"
            )
        if self.max_peaks is not None and self.max_peaks < 1:
            raise ConfigError(f"max_peaks must be >= 1 or None, got {self.max_peaks}")


def subsample(capture, decimation: int) -> SubNyquistStream:
    """Keep every decimation-th sample. No filtering, aliasing is intentional."""
    r = decimation
    if not float(r).is_integer() or r < 1:
        raise ValidationError(f"decimation must be a positive integer, got {decimation!r}")
    r = int(r)
    rate = capture.rate_hz if hasattr(capture, "rate_hz") else capture.sample_rate_hz
    samples = np.asarray(capture.samples)
    return SubNyquistStream(
        node_id=capture.node_id,
        samples=samples[::r].copy(),
        rate_hz=rate / r,
    )


def snapshot_spectra(stream: SubNyquistStream, resolution_hz: float) -> SnapshotSpectra:
    """Unnormalized forward DFT of each whole window; a trailing partial window
    is discarded."""
    if resolution_hz <= 0:
        raise ValidationError(f"resolution_hz must be positive, got {resolution_hz}")
    m_exact = stream.rate_hz / resolution_hz
    m = round(m_exact)
    if m < 1 or abs(m_exact - m) > 1e-6 * m:
        raise ValidationError(
            f"stream rate {stream.rate_hz} is not an integer multiple of "
            f"resolution_hz {resolution_hz}"
        )
    samples = np.asarray(stream.samples)
    if samples.size < m:
        raise ValidationError(
            f"stream has {samples.size} samples, need at least one window of {m}"
        )
    n_windows = samples.size // m
    windows = samples[: n_windows * m].reshape(n_windows, m)
    return SnapshotSpectra(
        node_id=stream.node_id,
        spectra=np.fft.fft(windows, axis=1),
        resolution_hz=resolution_hz,
        m_points=m,
    )


def average_periodogram(spectra: SnapshotSpectra) -> np.ndarray:
    """Snapshot-averaged power per bin."""
    if spectra.spectra.shape[0] < 1:
        raise ValidationError("need at least one snapshot")
    return np.mean(np.abs(spectra.spectra) ** 2, axis=0)


def peak_search(periodogram: np.ndarray, policy: PeakPolicy | None = None) -> np.ndarray:
    """Occupied bins: power at least floor * 10**(db/10) above the median floor.

    Bins with exactly zero power never qualify, so an all-zero periodogram
    yields the empty set. With max_peaks set, only the strongest survive.
    Returned sorted ascending.
    """
    if policy is None:
        policy = PeakPolicy()
    p = np.asarray(periodogram, dtype=float)
    if p.size == 0:
        raise ValidationError("empty periodogram")
    floor = float(np.median(p))
    threshold = floor * 10.0 ** (policy.threshold_factor_db / 10.0)
    hits = np.flatnonzero((p >= threshold) & (p > 0.0))
    if policy.max_peaks is not None and hits.size > policy.max_peaks:
        strongest = np.argsort(-p[hits], kind="stable")[: policy.max_peaks]
        hits = np.sort(hits[strongest])
    return hits.astype(np.int64)


def fold_frequency(f_hz: float, f_sp_hz: float) -> FoldResult:
    """Alias a frequency into (-f_sp/2, f_sp/2]; zone counts removed multiples.

    folded_hz + zone * f_sp_hz reconstructs the input. The upper edge f_sp/2
    stays at +f_sp/2 with zone 0.
    """
    if f_sp_hz <= 0:
        raise ValidationError(f"f_sp_hz must be positive, got {f_sp_hz}")
    half = 0.5 * f_sp_hz
    k = math.ceil((f_hz - half) / f_sp_hz)
    folded = f_hz - k * f_sp_hz
    # float guard near the interval edges
    if folded > half:
        k += 1
        folded = f_hz - k * f_sp_hz
    elif folded <= -half:
        k -= 1
        folded = f_hz - k * f_sp_hz
    return FoldResult(folded_hz=folded, zone=int(k))
