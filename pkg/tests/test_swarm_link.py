import math
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scft.codebook import build_codebook
from scft.errors import (
    BadMagicError,
    BinOrderError,
    FusionError,
    TruncatedPayloadError,
    UnsupportedVersionError,
    ValidationError,
    WireFormatError,
)
from scft.sampler import SnapshotSpectra
from scft.scenario import NodeConfig, SwarmConfig
from scft.swarm_link import (
    SpectralReport,
    decode_report,
    encode_report,
    encoded_size,
    fuse,
    make_report,
)


def report_of(node_id, m, bins, amplitudes, f_sp=None):
    amplitudes = np.asarray(amplitudes, dtype=complex)
    return SpectralReport(
        node_id=node_id,
        f_sp_hz=float(f_sp if f_sp is not None else m),
        m_points=m,
        snapshot_count=amplitudes.shape[0],
        occupied_bins=np.asarray(bins, dtype=np.int64),
        amplitudes=amplitudes,
    )


def random_report(rng):
    m = int(rng.integers(2, 40))
    n_bins = int(rng.integers(0, m + 1))
    bins = np.sort(rng.choice(m, size=n_bins, replace=False))
    n_snap = int(rng.integers(1, 6))
    amps = rng.standard_normal((n_snap, n_bins)) + 1j * rng.standard_normal((n_snap, n_bins))
    return report_of(int(rng.integers(0, 100)), m, bins, amps, f_sp=m * 5)


def swarm_3x4():
    return SwarmConfig(
        nyquist_rate_hz=12.0,
        resolution_hz=1.0,
        nodes=[NodeConfig(0, (0.0, 0.0), 4), NodeConfig(1, (1.5, 0.0), 3)],
    )


# ---------------------------------------------------------------- wire format


def test_empty_report_is_header_only():
    r = report_of(3, 8, [], np.zeros((2, 0)))
    data = encode_report(r)
    assert len(data) == 28
    back = decode_report(data)
    assert back.node_id == 3 and back.occupied_bins.size == 0
    assert back.snapshot_count == 2


def test_single_amplitude_layout():
    r = report_of(1, 4, [2], [[1.0 + 0.0j]])
    data = encode_report(r)
    bin_idx = struct.unpack_from("<I", data, 28)[0]
    re, im = struct.unpack_from("<dd", data, 32)
    assert (bin_idx, re, im) == (2, 1.0, 0.0)


def test_round_trip_randomized():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        r = random_report(rng)
        back = decode_report(encode_report(r))
        assert back.node_id == r.node_id
        assert back.f_sp_hz == r.f_sp_hz
        assert back.m_points == r.m_points
        np.testing.assert_array_equal(back.occupied_bins, r.occupied_bins)
        np.testing.assert_array_equal(back.amplitudes, r.amplitudes)


@given(seed=st.integers(min_value=0, max_value=10**6))
@settings(max_examples=100)
def test_round_trip_property(seed):
    r = random_report(np.random.default_rng(seed))
    assert decode_report(encode_report(r)).amplitudes.shape == r.amplitudes.shape
    np.testing.assert_array_equal(decode_report(encode_report(r)).amplitudes, r.amplitudes)


def test_size_bound():
    rng = np.random.default_rng(5)
    for _ in range(50):
        r = random_report(rng)
        s = r.occupied_bins.size
        n = r.snapshot_count
        data = encode_report(r)
        assert len(data) == encoded_size(s, n)
        assert len(data) <= 32 + 4 * s + 16 * n * s


def test_corrupted_magic():
    data = bytearray(encode_report(report_of(0, 4, [1], [[1j]])))
    data[0] = ord("X")
    with pytest.raises(BadMagicError):
        decode_report(bytes(data))


def test_unsupported_version():
    data = bytearray(encode_report(report_of(0, 4, [1], [[1j]])))
    data[4] = 99
    with pytest.raises(UnsupportedVersionError):
        decode_report(bytes(data))


def test_truncated_payload():
    data = encode_report(report_of(0, 4, [1, 3], [[1j, 2.0]]))
    with pytest.raises(TruncatedPayloadError):
        decode_report(data[:-5])
    with pytest.raises(TruncatedPayloadError):
        decode_report(data[:10])


def test_trailing_garbage_rejected():
    data = encode_report(report_of(0, 4, [1], [[1j]]))
    with pytest.raises(WireFormatError):
        decode_report(data + b"\x00")


def test_non_increasing_bins_rejected():
    good = encode_report(report_of(0, 8, [1, 2], [[1j, 2.0]]))
    swapped = bytearray(good)
    b1 = swapped[28:32]
    swapped[28:32] = swapped[32:36]
    swapped[32:36] = b1
    with pytest.raises(BinOrderError):
        decode_report(bytes(swapped))


def test_report_validation():
    with pytest.raises(ValidationError):
        report_of(0, 4, [1, 1], [[1j, 2.0]])  # repeated bin
    with pytest.raises(ValidationError):
        report_of(0, 4, [5], [[1j]])  # bin beyond M
    with pytest.raises(ValidationError):
        report_of(0, 4, [1], np.zeros((2, 3)))  # shape mismatch
    with pytest.raises(ValidationError):
        encode_report(report_of(0, 4, [1], [[1j]], f_sp=4.5))  # fractional Hz


# ---------------------------------------------------------------- fusion


def test_fuse_empty_reports():
    swarm = swarm_3x4()
    cb = build_codebook(swarm)
    reports = [
        report_of(0, 3, [], np.zeros((2, 0)), f_sp=3),
        report_of(1, 4, [], np.zeros((2, 0)), f_sp=4),
    ]
    coded = fuse(reports, cb)
    assert not coded.occupancy.any()
    assert not coded.values.any()


def test_fuse_toy_occupancy():
    # node 0 (M=3) reports bin 2, node 1 (M=4) reports bin 1
    swarm = swarm_3x4()
    cb = build_codebook(swarm)
    reports = [
        report_of(0, 3, [2], [[5.0 + 0j]], f_sp=3),
        report_of(1, 4, [1], [[7.0 + 0j]], f_sp=4),
    ]
    coded = fuse(reports, cb)
    # bin 2 of M=3 recurs at q = 2, 5, 8, 11; bin 1 of M=4 at q = 1, 5, 9
    np.testing.assert_array_equal(np.flatnonzero(coded.occupancy[0]), [2, 5, 8, 11])
    np.testing.assert_array_equal(np.flatnonzero(coded.occupancy[1]), [1, 5, 9])
    np.testing.assert_array_equal(coded.occupancy[:, 5], [True, True])
    np.testing.assert_array_equal(coded.occupancy[:, 2], [True, False])
    np.testing.assert_array_equal(coded.occupancy[:, 9], [False, True])
    assert coded.values[0, 5, 0] == 5.0
    assert coded.values[1, 5, 0] == 7.0
    assert coded.values[1, 2, 0] == 0.0


def test_fuse_order_independent():
    swarm = swarm_3x4()
    cb = build_codebook(swarm)
    r0 = report_of(0, 3, [1], [[1j], [2.0]], f_sp=3)
    r1 = report_of(1, 4, [0, 3], [[1.0, 2.0], [3.0, 4.0]], f_sp=4)
    a = fuse([r0, r1], cb)
    b = fuse([r1, r0], cb)
    np.testing.assert_array_equal(a.occupancy, b.occupancy)
    np.testing.assert_array_equal(a.values, b.values)
    assert a.node_ids == b.node_ids


def test_fuse_occupancy_row_periodicity():
    rng = np.random.default_rng(9)
    swarm = swarm_3x4()
    cb = build_codebook(swarm)
    for _ in range(20):
        reports = []
        for node_id, m in ((0, 3), (1, 4)):
            n_bins = int(rng.integers(0, m + 1))
            bins = np.sort(rng.choice(m, size=n_bins, replace=False))
            amps = rng.standard_normal((2, n_bins)) + 0j
            reports.append(report_of(node_id, m, bins, amps, f_sp=m))
        coded = fuse(reports, cb)
        for row, m in enumerate((3, 4)):
            occ = coded.occupancy[row]
            np.testing.assert_array_equal(occ, np.tile(occ[:m], 12 // m))
        # values nonzero only where occupied
        assert not coded.values[~coded.occupancy].any()


def test_fuse_missing_node():
    swarm = swarm_3x4()
    cb = build_codebook(swarm)
    r0 = report_of(0, 3, [1], [[1j]], f_sp=3)
    with pytest.raises(FusionError):
        fuse([r0], cb)
    coded = fuse([r0], cb, allow_missing=True)
    assert coded.node_ids == [0]
    assert coded.occupancy.shape == (1, 12)


def test_fuse_duplicate_node():
    swarm = swarm_3x4()
    cb = build_codebook(swarm)
    r0 = report_of(0, 3, [1], [[1j]], f_sp=3)
    with pytest.raises(FusionError):
        fuse([r0, r0], cb)


def test_fuse_mismatched_snapshots():
    swarm = swarm_3x4()
    cb = build_codebook(swarm)
    r0 = report_of(0, 3, [1], [[1j]], f_sp=3)
    r1 = report_of(1, 4, [1], [[1j], [2.0]], f_sp=4)
    with pytest.raises(FusionError):
        fuse([r0, r1], cb)


def test_fuse_mismatched_rate():
    swarm = swarm_3x4()
    cb = build_codebook(swarm)
    r0 = report_of(0, 3, [1], [[1j]], f_sp=6)  # wrong rate for M=3 on a 1 Hz grid
    r1 = report_of(1, 4, [1], [[1j]], f_sp=4)
    with pytest.raises(FusionError):
        fuse([r0, r1], cb)


def test_make_report_extracts_amplitudes():
    spectra = SnapshotSpectra(
        node_id=1,
        spectra=np.array([[1.0, 2.0, 3.0, 4.0], [5.0, 6.0, 7.0, 8.0]], dtype=complex),
        resolution_hz=1.0,
        m_points=4,
    )
    rep = make_report(spectra, np.array([1, 3]))
    assert rep.f_sp_hz == 4.0
    np.testing.assert_array_equal(rep.amplitudes, [[2.0, 4.0], [6.0, 8.0]])
