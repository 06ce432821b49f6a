"""Report serialization and fusion: the only data the nodes ever exchange.

A node shares just its occupied bins and their per-snapshot complex
amplitudes, so the message size grows with occupancy, never with the size of
the monitored band.

Wire layout (little-endian, file extension .scft)
-------------------------------------------------
    magic           4 bytes  "SCFT"
    version         u16      1
    node_id         u16
    f_sp_hz         u64      node sampling rate, integer Hz
    m_points        u32      FFT length
    snapshot_count  u32      L
    bin_count       u32      |S|
    bins            u32 * |S|       strictly increasing
    amplitudes      f64 pairs (re, im), snapshot-major, L * |S| pairs
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .codebook import Codebook
from .errors import (
    BadMagicError,
    BinOrderError,
    FusionError,
    TruncatedPayloadError,
    UnsupportedVersionError,
    ValidationError,
    WireFormatError,
)
from .sampler import SnapshotSpectra

MAGIC = b"SCFT"
WIRE_VERSION = 1
FILE_EXTENSION = ".scft"

_HEADER = struct.Struct("<4sHHQIII")


@dataclass
class SpectralReport:
    """One node's occupied bins with per-snapshot complex amplitudes."""

    node_id: int
    f_sp_hz: float
    m_points: int
    snapshot_count: int
    occupied_bins: np.ndarray  # int, sorted strictly increasing, in [0, M)
    amplitudes: np.ndarray  # complex, shape (L, |S|)

    def __post_init__(self):
        self.occupied_bins = np.asarray(self.occupied_bins, dtype=np.int64)
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.ndim != 2 or self.amplitudes.shape != (
            self.snapshot_count,
            self.occupied_bins.size,
        ):
            raise ValidationError(
                f"amplitudes shape {self.amplitudes.shape} does not match "
                f"({self.snapshot_count}, {self.occupied_bins.size})"
            )
        if self.occupied_bins.size:
            if np.any(np.diff(self.occupied_bins) <= 0):
                raise ValidationError("occupied_bins must be strictly increasing")
            if self.occupied_bins[0] < 0 or self.occupied_bins[-1] >= self.m_points:
                raise ValidationError(
                    f"occupied_bins must lie in [0, {self.m_points})"
                )


@dataclass
class CodedSpectrum:
    """Fused swarm observation: occupancy mask and amplitudes per (node, channel).

    values is nonzero only where occupancy is set; each occupancy row repeats
    with the node's FFT length along the channel axis.
    """

    q_total: int
    snapshot_count: int
    node_ids: list[int]
    occupancy: np.ndarray  # bool, shape (P, Q)
    values: np.ndarray  # complex, shape (P, Q, L)


def make_report(spectra: SnapshotSpectra, occupied_bins: np.ndarray) -> SpectralReport:
    """Bundle a node's occupied bins with their snapshot amplitudes."""
    bins = np.asarray(occupied_bins, dtype=np.int64)
    return SpectralReport(
        node_id=spectra.node_id,
        f_sp_hz=spectra.m_points * spectra.resolution_hz,
        m_points=spectra.m_points,
        snapshot_count=spectra.snapshot_count,
        occupied_bins=bins,
        amplitudes=spectra.spectra[:, bins],
    )


def encoded_size(bin_count: int, snapshot_count: int) -> int:
    return _HEADER.size + 4 * bin_count + 16 * snapshot_count * bin_count


def encode_report(report: SpectralReport) -> bytes:
    """Serialize a report to the wire layout, bit-exact and deterministic."""
    f_sp = round(report.f_sp_hz)
    if abs(report.f_sp_hz - f_sp) > 1e-6 or f_sp < 0:
        raise ValidationError(
            f"f_sp_hz must be a nonnegative integer number of Hz, got {report.f_sp_hz}"
        )
    header = _HEADER.pack(
        MAGIC,
        WIRE_VERSION,
        report.node_id,
        f_sp,
        report.m_points,
        report.snapshot_count,
        report.occupied_bins.size,
    )
    bins = report.occupied_bins.astype("<u4").tobytes()
    amps = np.empty((report.snapshot_count, report.occupied_bins.size, 2), dtype="<f8")
    amps[:, :, 0] = report.amplitudes.real
    amps[:, :, 1] = report.amplitudes.imag
    return header + bins + amps.tobytes()


def decode_report(data: bytes) -> SpectralReport:
    """Parse wire bytes back into a report; rejects anything malformed."""
    if len(data) < _HEADER.size:
        if data[: len(MAGIC)] != MAGIC[: len(data)]:
            raise BadMagicError("stream does not start with the report magic")
        raise TruncatedPayloadError(
            f"header needs {_HEADER.size} bytes, got {len(data)}"
        )
    magic, version, node_id, f_sp, m_points, n_snap, n_bins = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}")
    if version != WIRE_VERSION:
        raise UnsupportedVersionError(f"unsupported version {version}")
    expected = encoded_size(n_bins, n_snap)
    if len(data) < expected:
        raise TruncatedPayloadError(f"payload needs {expected} bytes, got {len(data)}")
    if len(data) > expected:
        raise WireFormatError(f"{len(data) - expected} trailing bytes after payload")
    off = _HEADER.size
    bins = np.frombuffer(data, dtype="<u4", count=n_bins, offset=off).astype(np.int64)
    if bins.size and np.any(np.diff(bins) <= 0):
        raise BinOrderError("bin indices are not strictly increasing")
    off += 4 * n_bins
    flat = np.frombuffer(data, dtype="<f8", count=2 * n_snap * n_bins, offset=off)
    pairs = flat.reshape(n_snap, n_bins, 2)
    amplitudes = pairs[:, :, 0] + 1j * pairs[:, :, 1]
    try:
        return SpectralReport(
            node_id=node_id,
            f_sp_hz=float(f_sp),
            m_points=m_points,
            snapshot_count=n_snap,
            occupied_bins=bins,
            amplitudes=amplitudes,
        )
    except ValidationError as exc:
        raise WireFormatError(str(exc)) from exc


def fuse(
    reports: list[SpectralReport],
    cb: Codebook,
    allow_missing: bool = False,
) -> CodedSpectrum:
    """Scatter every report onto the channel grid through the sensing codes.

    A channel is occupied at a node when the node's code bin for that channel
    appears in the node's report; its value is then that bin's amplitude,
    otherwise exactly zero. The result does not depend on report order. By
    default every codebook node must report; with allow_missing=True absent
    nodes are dropped (their codebook rows removed, shrinking the span).
    """
    by_node: dict[int, SpectralReport] = {}
    for r in reports:
        if r.node_id in by_node:
            raise FusionError(f"duplicate report for node {r.node_id}")
        if r.node_id not in cb.node_ids:
            raise FusionError(f"report for unknown node {r.node_id}; have {cb.node_ids}")
        by_node[r.node_id] = r

    missing = [i for i in cb.node_ids if i not in by_node]
    if missing:
        if not allow_missing:
            raise FusionError(f"missing reports for nodes {missing}")
        cb = cb.restrict([i for i in cb.node_ids if i in by_node])

    counts = {by_node[i].snapshot_count for i in cb.node_ids}
    if len(counts) != 1:
        raise FusionError(f"snapshot counts differ across reports: {sorted(counts)}")
    n_snap = counts.pop()

    for row, node_id in enumerate(cb.node_ids):
        rep = by_node[node_id]
        m = cb.m_points[row]
        if rep.m_points != m:
            raise FusionError(
                f"node {node_id}: report has {rep.m_points} bins, codebook expects {m}"
            )
        f_sp = m * cb.resolution_hz
        if abs(rep.f_sp_hz - f_sp) > 1e-6 * f_sp:
            raise FusionError(
                f"node {node_id}: report rate {rep.f_sp_hz} does not match "
                f"codebook rate {f_sp}"
            )

    p = len(cb.node_ids)
    occupancy = np.zeros((p, cb.q_total), dtype=bool)
    values = np.zeros((p, cb.q_total, n_snap), dtype=complex)
    all_bins = cb.bins()
    for row, node_id in enumerate(cb.node_ids):
        rep = by_node[node_id]
        s = rep.occupied_bins
        if s.size == 0:
            continue
        bins_row = all_bins[row]
        pos = np.searchsorted(s, bins_row)
        pos_c = np.minimum(pos, s.size - 1)
        occupied = s[pos_c] == bins_row
        occupancy[row] = occupied
        values[row, occupied, :] = rep.amplitudes[:, pos_c[occupied]].T

    return CodedSpectrum(
        q_total=cb.q_total,
        snapshot_count=n_snap,
        node_ids=list(cb.node_ids),
        occupancy=occupancy,
        values=values,
    )
