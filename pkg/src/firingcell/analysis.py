"""Interspike intervals, firing rates and Poincaré return maps, plus CSV I/O."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import TICK_MS, TICKS_PER_SECOND


@dataclass(frozen=True)
class IsiSequence:
    intervals: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.intervals)

    @property
    def ms(self) -> list[float]:
        return [i * TICK_MS for i in self.intervals]

    def variance_ms(self) -> float:
        if len(self.intervals) < 2:
            return 0.0
        return float(np.var(np.asarray(self.intervals, dtype=float) * TICK_MS))


@dataclass(frozen=True)
class ReturnMap:
    points: tuple[tuple[float, float], ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.points)

    def distinct_points(self, resolution_ms: float = TICK_MS) -> int:
        """Number of distinct (I(n), I(n+1)) pairs after snapping to ``resolution_ms``."""
        return len({(round(a / resolution_ms), round(b / resolution_ms)) for a, b in self.points})


def isi(spike_ticks: Sequence[int]) -> IsiSequence:
    ticks = list(spike_ticks)
    if any(b <= a for a, b in zip(ticks, ticks[1:])):
        raise ValueError("spike ticks must be strictly increasing")
    return IsiSequence(tuple(b - a for a, b in zip(ticks, ticks[1:])))


def return_map(seq: IsiSequence) -> ReturnMap:
    iv = seq.intervals
    return ReturnMap(tuple((a * TICK_MS, b * TICK_MS) for a, b in zip(iv, iv[1:])))


def rate(spike_ticks: Iterable[int], window_ticks: int, total_ticks: int | None = None) -> list[float]:
    """Firing rate in Hz for each complete window of ``window_ticks``.

    ``total_ticks`` defaults to just past the last spike.
    """
    if window_ticks < 1:
        raise ValueError("window_ticks must be >= 1")
    ticks = list(spike_ticks)
    if total_ticks is None:
        total_ticks = (max(ticks) + 1) if ticks else window_ticks
    n = max(1, total_ticks // window_ticks)
    counts = [0] * n
    for t in ticks:
        k = t // window_ticks
        if 0 <= k < n:
            counts[k] += 1
    scale = TICKS_PER_SECOND / window_ticks
    return [c * scale for c in counts]


def mean_rate(spike_ticks: Iterable[int], start: int, stop: int) -> float:
    if stop <= start:
        raise ValueError("empty window")
    count = sum(1 for t in spike_ticks if start <= t < stop)
    return count * TICKS_PER_SECOND / (stop - start)


def describe(spike_ticks: Sequence[int]) -> dict:
    seq = isi(spike_ticks)
    rmap = return_map(seq)
    return {
        "n_spikes": len(spike_ticks),
        "n_intervals": len(seq),
        "distinct_points": rmap.distinct_points(),
        "isi_variance_ms2": seq.variance_ms(),
    }


# -- CSV ------------------------------------------------------------------

def _ms(x: float) -> str:
    return f"{x:.1f}"


def _mv(x: float) -> str:
    return f"{x:.6f}"


def write_spikes(path: Path, spikes: Mapping[str, Sequence[int]]) -> None:
    rows = sorted((t, cid) for cid, ticks in spikes.items() for t in ticks)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tick", "cell_id"])
        w.writerows(rows)


def read_spikes(path: Path) -> dict[str, list[int]]:
    """Read ``spikes.csv``.  A missing ``cell_id`` column means a single cell ``fc``."""
    out: dict[str, list[int]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "tick" not in reader.fieldnames:
            raise ValueError(f"{path}: expected a 'tick' column")
        for row in reader:
            out.setdefault(row.get("cell_id") or "fc", []).append(int(row["tick"]))
    return {cid: sorted(ticks) for cid, ticks in out.items()}


def write_isi(path: Path, spikes: Mapping[str, Sequence[int]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cell_id", "n", "interval_ticks", "interval_ms"])
        for cid in sorted(spikes):
            for n, iv in enumerate(isi(spikes[cid]).intervals):
                w.writerow([cid, n, iv, _ms(iv * TICK_MS)])


def write_poincare(path: Path, spikes: Mapping[str, Sequence[int]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cell_id", "I_n_ms", "I_n1_ms"])
        for cid in sorted(spikes):
            for a, b in return_map(isi(spikes[cid])).points:
                w.writerow([cid, _ms(a), _ms(b)])


def write_rates(path: Path, spikes: Mapping[str, Sequence[int]], window_ticks: int, total_ticks: int) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cell_id", "start_tick", "stop_tick", "rate_hz"])
        for cid in sorted(spikes):
            for k, hz in enumerate(rate(spikes[cid], window_ticks, total_ticks)):
                w.writerow([cid, k * window_ticks, (k + 1) * window_ticks, _ms(hz)])


def write_memory(path: Path, memory: Mapping[str, np.ndarray]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tick", "cell_id", "input", "memory"])
        for cid in sorted(memory):
            trace = memory[cid]
            for t in range(trace.shape[0]):
                for i, v in enumerate(trace[t]):
                    w.writerow([t, cid, i, _mv(v)])


def write_vbody(path: Path, vbody: Mapping[str, np.ndarray]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tick", "cell_id", "v_mv"])
        for cid in sorted(vbody):
            for t, v in enumerate(vbody[cid]):
                w.writerow([t, cid, _mv(v)])
