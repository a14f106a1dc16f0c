"""Figure rendering for the report paths: rate curves and error-rate sweeps.

Everything draws off-screen (Agg) and saves straight to file next to the
delimited output.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .analysis import RateCurvePoint
from .simulate import SimResult


def _setup_style() -> None:
    plt.rcParams.update(
        {
            "font.size": 9,
            "axes.labelsize": 10,
            "legend.fontsize": 8,
            "figure.figsize": (5.2, 3.6),
            "figure.dpi": 120,
            "savefig.dpi": 200,
            "savefig.bbox": "tight",
            "axes.grid": True,
            "grid.alpha": 0.3,
            "grid.linestyle": "--",
            "lines.linewidth": 1.2,
        }
    )


def plot_rate_curves(
    points: list[RateCurvePoint],
    path: str,
    gamma: float | None = None,
    crossing_db: float | None = None,
) -> str:
    """Shaped/uniform achievable-rate curves plus the frame-efficiency line."""
    _setup_style()
    snr = [p.snr_db for p in points]
    fig, ax = plt.subplots()
    ax.plot(snr, [p.r_hdd_shaped for p in points], label="shaped rate", color="tab:blue")
    ax.plot(snr, [p.r_hdd_uniform for p in points], label="uniform rate", color="tab:red")
    label = "2H(A) + 2γ" if gamma is None else f"2H(A) + {2 * gamma:.4f}"
    ax.plot(snr, [p.se_frame for p in points], label=label, color="tab:green", linestyle=":")
    if crossing_db is not None:
        ax.axvline(crossing_db, color="k", linewidth=0.8, alpha=0.6)
        ax.annotate(f"crossing {crossing_db:.2f} dB", (crossing_db, ax.get_ylim()[0]),
                    textcoords="offset points", xytext=(4, 8), fontsize=8)
    ax.set_xlabel("SNR [dB]")
    ax.set_ylabel("rate [bit/channel use]")
    ax.legend()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_sim_result(result: SimResult, path: str, target_pe: float | None = None) -> str:
    """Block error probability vs SNR with its confidence band."""
    _setup_style()
    pts = sorted(result.points, key=lambda p: p.snr_db)
    snr = [p.snr_db for p in pts]
    pe = [max(p.pe, 1e-12) for p in pts]
    err_lo = [max(p.pe - p.ci_low, 0.0) for p in pts]
    err_hi = [max(p.ci_high - p.pe, 0.0) for p in pts]
    fig, ax = plt.subplots()
    ax.errorbar(snr, pe, yerr=[err_lo, err_hi], marker="o", capsize=3,
                label=f"{result.signaling} / {result.mode}")
    if target_pe is not None:
        ax.axhline(target_pe, color="k", linewidth=0.8, alpha=0.6, label="target")
    ax.set_yscale("log")
    ax.set_xlabel("SNR [dB]")
    ax.set_ylabel("block error probability")
    ax.legend()
    fig.savefig(path)
    plt.close(fig)
    return path
