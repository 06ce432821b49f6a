import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scft.errors import ValidationError
from scft.sampler import (
    FoldResult,
    PeakPolicy,
    SubNyquistStream,
    average_periodogram,
    fold_frequency,
    peak_search,
    snapshot_spectra,
    subsample,
)


def stream(samples, rate=12.0, node_id=0):
    return SubNyquistStream(node_id=node_id, samples=np.asarray(samples, dtype=complex), rate_hz=rate)


# ---------------------------------------------------------------- subsample


def test_subsample_indexing():
    s = stream(np.arange(12))
    out = subsample(s, 3)
    np.testing.assert_array_equal(out.samples, [0, 3, 6, 9])
    assert out.rate_hz == 4.0


def test_subsample_identity():
    s = stream(np.arange(7))
    out = subsample(s, 1)
    np.testing.assert_array_equal(out.samples, s.samples)
    assert out.rate_hz == s.rate_hz


def test_subsample_rejects_bad_decimation():
    with pytest.raises(ValidationError):
        subsample(stream(np.arange(4)), 0)
    with pytest.raises(ValidationError):
        subsample(stream(np.arange(4)), -2)


@given(
    n=st.integers(min_value=1, max_value=200),
    a=st.integers(min_value=1, max_value=6),
    b=st.integers(min_value=1, max_value=6),
)
def test_subsample_composes(n, a, b):
    s = stream(np.arange(n))
    once = subsample(s, a * b)
    twice = subsample(subsample(s, a), b)
    np.testing.assert_array_equal(once.samples, twice.samples)
    assert once.rate_hz == pytest.approx(twice.rate_hz)


def test_subsampled_tone_lands_on_folded_bin():
    # global bin 5 on a 12-channel grid, decimation 4 (M = 3): peak at 5 mod 3 = 2
    n = np.arange(24)
    x = np.exp(2j * np.pi * 5 * n / 12.0)
    sub = subsample(stream(x), 4)
    spec = snapshot_spectra(sub, 1.0)
    assert np.argmax(np.abs(spec.spectra[0])) == 2


# ---------------------------------------------------------------- snapshots


def test_snapshot_dc():
    spec = snapshot_spectra(stream(np.ones(4), rate=4.0), 1.0)
    np.testing.assert_allclose(spec.spectra[0], [4, 0, 0, 0], atol=1e-12)


def test_snapshot_on_grid_tone():
    x = np.exp(2j * np.pi * np.arange(4) / 4.0)
    spec = snapshot_spectra(stream(x, rate=4.0), 1.0)
    mags = np.abs(spec.spectra[0])
    assert mags[1] == pytest.approx(4.0, rel=1e-12)
    np.testing.assert_allclose(np.delete(mags, 1), 0.0, atol=1e-12)


def test_snapshot_partitioning_drops_tail():
    spec = snapshot_spectra(stream(np.arange(11), rate=4.0), 1.0)
    assert spec.spectra.shape == (2, 4)
    assert spec.m_points == 4


def test_snapshot_too_short():
    with pytest.raises(ValidationError):
        snapshot_spectra(stream(np.arange(3), rate=4.0), 1.0)


def test_snapshot_parseval():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    spec = snapshot_spectra(stream(x, rate=16.0), 1.0)
    for row, win in zip(spec.spectra, x.reshape(4, 16)):
        lhs = np.sum(np.abs(row) ** 2)
        rhs = 16 * np.sum(np.abs(win) ** 2)
        assert lhs == pytest.approx(rhs, rel=1e-10)


# ---------------------------------------------------------------- periodogram


def test_periodogram_single_snapshot():
    spec = snapshot_spectra(stream([1, 1j, -1, -1j], rate=4.0), 1.0)
    np.testing.assert_allclose(average_periodogram(spec), np.abs(spec.spectra[0]) ** 2)


def test_periodogram_averages_power():
    s = snapshot_spectra(stream(np.zeros(8), rate=4.0), 1.0)
    s.spectra = np.array([[1.0 + 0j, 0, 0, 0], [1j, 0, 0, 0]])
    np.testing.assert_allclose(average_periodogram(s), [1.0, 0, 0, 0])


def test_periodogram_noise_level():
    # unit-variance complex noise: mean periodogram per bin is M * sigma^2
    rng = np.random.default_rng(42)
    m, n_snap = 256, 100
    x = (rng.standard_normal(m * n_snap) + 1j * rng.standard_normal(m * n_snap)) / np.sqrt(2)
    spec = snapshot_spectra(stream(x, rate=float(m)), 1.0)
    p = average_periodogram(spec)
    assert np.mean(p) == pytest.approx(m, rel=0.02)
    # per-bin values concentrate around M at 1/sqrt(L) relative spread
    assert np.all(np.abs(p - m) < 5 * m / np.sqrt(n_snap))


# ---------------------------------------------------------------- peak search


def test_peak_search_single_dominant_bin():
    hits = peak_search(np.array([100.0, 1.0, 1.0, 1.0]), PeakPolicy())
    np.testing.assert_array_equal(hits, [0])


def test_peak_search_flat_is_empty():
    hits = peak_search(np.full(16, 3.0), PeakPolicy())
    assert hits.size == 0


def test_peak_search_all_zero_is_empty():
    hits = peak_search(np.zeros(8), PeakPolicy())
    assert hits.size == 0


def test_peak_search_max_peaks_cap():
    p = np.array([0.0, 50.0, 1.0, 90.0, 1.0, 70.0, 1.0, 1.0])
    policy = PeakPolicy(threshold_factor_db=10.0, max_peaks=2)
    hits = peak_search(p, policy)
    np.testing.assert_array_equal(hits, [3, 5])


def test_peak_search_false_alarm_rate():
    # noise-only: fewer than 1% of bins cross a 10 dB-over-median threshold
    m, n_snap = 300, 100
    false_alarms = 0
    total = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        x = (rng.standard_normal(m * n_snap) + 1j * rng.standard_normal(m * n_snap)) / np.sqrt(2)
        spec = snapshot_spectra(stream(x, rate=float(m)), 1.0)
        hits = peak_search(average_periodogram(spec), PeakPolicy())
        false_alarms += hits.size
        total += m
    assert false_alarms / total < 0.01


@given(gamma_low=st.floats(min_value=0.5, max_value=6.0), gamma_step=st.floats(min_value=0.1, max_value=10.0))
@settings(max_examples=50)
def test_peak_search_monotone_in_threshold(gamma_low, gamma_step):
    rng = np.random.default_rng(7)
    p = rng.exponential(size=64)
    lo = peak_search(p, PeakPolicy(threshold_factor_db=gamma_low))
    hi = peak_search(p, PeakPolicy(threshold_factor_db=gamma_low + gamma_step))
    assert set(hi).issubset(set(lo))


# ---------------------------------------------------------------- folding


def test_fold_in_first_zone():
    assert fold_frequency(1.0, 3.0) == FoldResult(1.0, 0)


def test_fold_second_zone():
    assert fold_frequency(5.0, 3.0) == FoldResult(-1.0, 2)


def test_fold_wideband_example():
    r = fold_frequency(10.5e9, 4e9)
    assert r.folded_hz == -1.5e9
    assert r.zone == 3


def test_fold_boundary_stays_positive():
    r = fold_frequency(1.5, 3.0)
    assert r == FoldResult(1.5, 0)
    r = fold_frequency(-1.5, 3.0)
    assert r.folded_hz == 1.5 and r.zone == -1


@given(f=st.integers(min_value=-10**9, max_value=10**9), fsp=st.integers(min_value=1, max_value=10**6))
def test_fold_round_trip_exact(f, fsp):
    r = fold_frequency(float(f), float(fsp))
    assert r.folded_hz + r.zone * float(fsp) == float(f)
    assert -fsp / 2 < r.folded_hz <= fsp / 2


def test_aliasing_theorem_exhaustive():
    # noiseless on-grid tone at global bin q: subsampled snapshot FFT peaks at
    # q mod M, for every q on the grid and both toy decimations
    q_total = 12
    n = np.arange(4 * q_total)
    for r, m in ((4, 3), (3, 4)):
        for q in range(q_total):
            x = np.exp(2j * np.pi * q * n / q_total)
            sub = subsample(stream(x), r)
            spec = snapshot_spectra(sub, 1.0)
            mags = np.abs(spec.spectra[0])
            assert np.argmax(mags) == q % m
            assert mags[q % m] == pytest.approx(m, rel=1e-9)
