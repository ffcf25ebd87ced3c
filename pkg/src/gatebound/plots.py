"""Static SVG figures; derived artifacts that never feed back into the CSVs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

LOG_FLOOR = 1e-12  # keeps log-scale axes finite at perfect fidelity


def _clamp(y):
    return np.maximum(np.asarray(y, dtype=float), LOG_FLOOR)


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def plot_bound_curve(path, curve: np.ndarray) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(curve[:, 0], _clamp(curve[:, 1]), "k-")
    ax.set_xlabel("time-bandwidth uncertainty (rad)")
    ax.set_ylabel("infidelity upper bound")
    ax.grid(True, which="both", alpha=0.3)
    _save(fig, path)


def plot_frequency_curves(path, series: dict[float, np.ndarray]) -> None:
    """One bound curve per gate time; x axis in MHz."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for gate_time_ns, rows in sorted(series.items()):
        ax.semilogy(
            rows[:, 0] / 1e6, _clamp(rows[:, 1]), label=f"T = {gate_time_ns:g} ns"
        )
    ax.set_xlabel("uncertainty frequency (MHz)")
    ax.set_ylabel("infidelity upper bound")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    _save(fig, path)


def plot_pulses(path, channels: np.ndarray, gate_time: float, v_max: float) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    n_channels, n_pulses = channels.shape
    edges = np.linspace(0.0, gate_time, n_pulses + 1)
    for j in range(n_channels):
        ax.stairs(channels[j], edges, label=f"channel {j}")
    ax.axhline(v_max, color="gray", ls="--", lw=0.8)
    ax.axhline(-v_max, color="gray", ls="--", lw=0.8)
    ax.set_xlabel("time")
    ax.set_ylabel("control amplitude")
    ax.legend()
    _save(fig, path)


def plot_ensemble(path, curve: np.ndarray, records) -> None:
    """Bound curve with the observed (bound, infidelity) scatter overlaid."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(curve[:, 0], _clamp(curve[:, 1]), "k-", label="limit bound")
    ok = [r for r in records if r.error is None]
    toms = [r.t_omega_bnd for r in ok]
    ax.semilogy(
        toms,
        _clamp([r.infidelity_wc_low for r in ok]),
        ".",
        ms=4,
        alpha=0.6,
        label="worst-case lower-bound infidelity",
    )
    exact = [r for r in ok if r.infidelity_wc_exact is not None]
    if exact:
        ax.semilogy(
            [r.t_omega_bnd for r in exact],
            _clamp([r.infidelity_wc_exact for r in exact]),
            "x",
            ms=4,
            alpha=0.6,
            label="worst-case infidelity",
        )
    ax.set_xlabel("effective time-bandwidth uncertainty (rad)")
    ax.set_ylabel("infidelity")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    _save(fig, path)


def plot_infidelity_distributions(path, samples) -> None:
    """Sorted infidelity curves per bath dimension for the bound comparison."""
    fig, ax = plt.subplots(figsize=(6, 4))
    dims = sorted({s.n_b for s in samples})
    styles = {dims[i]: ls for i, ls in zip(range(len(dims)), ["-", "--", ":", "-."])}
    for n_b in dims:
        rows = [s for s in samples if s.n_b == n_b]
        ls = styles[n_b]
        ax.semilogy(
            _clamp(sorted(s.infidelity_avg_low for s in rows)),
            "r" + ls,
            label=f"average lower bound, n_B={n_b}",
        )
        ax.semilogy(
            _clamp(sorted(s.infidelity_nuc for s in rows)),
            "b" + ls,
            label=f"nuclear bound, n_B={n_b}",
        )
        ax.axhline(rows[0].infidelity_bound, color="k", ls=ls, lw=1.0)
    ax.set_xlabel("sample (sorted)")
    ax.set_ylabel("infidelity")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7)
    _save(fig, path)
