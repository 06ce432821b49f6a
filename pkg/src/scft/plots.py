"""Figure rendering for the CLI report paths (PNG next to each CSV)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .codebook import Codebook
from .decoder import SpectrumEstimate
from .evaluate import EvalReport

_DB_FLOOR = -140.0


def _to_db(powers: np.ndarray) -> np.ndarray:
    peak = powers.max(initial=0.0)
    if peak <= 0.0:
        return np.full(powers.shape, _DB_FLOOR)
    rel = powers / peak
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(rel)
    return np.maximum(db, _DB_FLOOR)


def save_spectrum_plot(est: SpectrumEstimate, path, title: str = "decoded spectrum"):
    freqs = np.arange(est.powers.size) * est.resolution_hz
    fig, ax = plt.subplots(figsize=(9, 4))
    ax.plot(freqs / 1e9 if freqs[-1] >= 1e9 else freqs, _to_db(est.powers), lw=0.8)
    if est.detections:
        dx = np.array([d.frequency_hz for d in est.detections])
        dy = _to_db(est.powers)[[d.channel for d in est.detections]]
        ax.plot(dx / 1e9 if freqs[-1] >= 1e9 else dx, dy, "v", color="C3", ms=6)
    ax.set_xlabel("frequency (GHz)" if freqs[-1] >= 1e9 else "frequency (Hz)")
    ax.set_ylabel("decoded power (dB rel. peak)")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep_plot(report: EvalReport, path):
    x = [p.axis_value for p in report.points]
    rmse = [p.rmse_relative for p in report.points]
    pd = [p.p_detect for p in report.points]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(x, rmse, "o-", color="C0", label="relative RMSE")
    ax.set_yscale("symlog", linthresh=1e-9)
    if report.axis_kind == "resolution":
        ax.set_xscale("log")
        ax.set_xlabel("bucket bandwidth (Hz)")
    else:
        ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("relative RMSE")
    ax2 = ax.twinx()
    ax2.plot(x, pd, "s--", color="C2", label="P(detect)")
    ax2.set_ylabel("detection probability")
    ax2.set_ylim(-0.05, 1.05)
    lines = ax.get_lines() + ax2.get_lines()
    ax.legend(lines, [ln.get_label() for ln in lines], loc="best")
    ax.set_title(f"{report.k_trials} trials per point")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_codebook_plot(cb: Codebook, path):
    fig, ax = plt.subplots(figsize=(9, 2.2 + 0.4 * len(cb.node_ids)))
    im = ax.imshow(cb.codes, aspect="auto", interpolation="nearest", cmap="viridis")
    ax.set_yticks(range(len(cb.node_ids)))
    ax.set_yticklabels([f"node {i} (M={m})" for i, m in zip(cb.node_ids, cb.m_points)])
    ax.set_xlabel("channel")
    ax.set_title("sensing codes (signed folded bin)")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
