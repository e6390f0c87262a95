"""Figures written next to the CSV outputs.

Everything renders through the Agg/SVG backends with fixed metadata so that
repeated runs produce identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .analysis import ReturnMap  # noqa: E402
from .core import TICK_MS  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "firingcell",
    "svg.fonttype": "none",
}


def plot_return_map(rmap: ReturnMap, path: Path, max_ms: float = 200.0, title: str | None = None) -> Path:
    """Scatter of I(n+1) against I(n) in a fixed square viewport."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4, 4))
        if rmap.points:
            pts = np.asarray(rmap.points)
            ax.plot(pts[:, 0], pts[:, 1], "o", ms=3, mfc="none", mec="k", mew=0.8)
        ax.plot([0, max_ms], [0, max_ms], color="0.8", lw=0.6, zorder=0)
        ax.set_xlim(0, max_ms)
        ax.set_ylim(0, max_ms)
        ax.set_aspect("equal")
        ax.set_xlabel("I(n) [ms]")
        ax.set_ylabel("I(n+1) [ms]")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
    return path


def plot_traces(record, cell: str, path: Path, threshold: float | None = None) -> Path:
    """Input arrivals, body potential and the memory value of each input."""
    scenario = record.manifest["scenario"]
    model = scenario["model"]
    threshold = model["v_threshold"] if threshold is None else threshold
    n_comp = record.memory[cell].shape[1]
    trained = {t["compartment"] for e in scenario["stimulus"]["episodes"] for t in e["trains"] if t["cell"] == cell}
    t_ms = np.arange(record.total_ticks) * TICK_MS

    with plt.rc_context(STYLE):
        fig, (ax_in, ax_v) = plt.subplots(
            2, 1, figsize=(9, 5), sharex=True, gridspec_kw={"height_ratios": [2, 1.3]}
        )
        arrivals: dict[int, list[float]] = {}
        for tick, targets in record.inputs.items():
            for cid, i in targets:
                if cid == cell:
                    arrivals.setdefault(i, []).append(tick * TICK_MS)
        for i, times in sorted(arrivals.items()):
            ax_in.vlines(times, i - 0.35, i + 0.35, lw=1.2 if i in trained else 0.4, color="k")
        final = record.memory[cell][-1]
        for i in range(n_comp):
            ax_in.text(-0.01, i, f"{final[i]:.1f}", transform=ax_in.get_yaxis_transform(), ha="right",
                       va="center", fontsize=7)
        ax_in.set_ylim(n_comp - 0.5, -0.5)
        ax_in.set_yticks([])
        ax_in.set_ylabel("input / memory", labelpad=28)

        v = record.vbody[cell]
        ax_v.plot(t_ms, v, lw=0.5, color="k")
        spikes = np.asarray(record.spikes[cell], dtype=int)
        if spikes.size:
            ax_v.vlines(spikes * TICK_MS, threshold, threshold + 20, lw=0.6, color="k")
        ax_v.axhline(threshold, ls="--", lw=0.6, color="0.5")
        ax_v.axhline(model["v_rest"], ls=":", lw=0.6, color="0.5")
        ax_v.set_ylabel("V body [mV]")
        ax_v.set_xlabel("time [ms]")
        fig.tight_layout()
        fig.savefig(path, dpi=120, metadata={"Software": None})
        plt.close(fig)
    return path
