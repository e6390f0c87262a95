"""Deterministic periodic spike trains for external inputs."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np

from .core import TICKS_PER_SECOND
from .errors import ConfigError


@dataclass(frozen=True)
class TrainSpec:
    """A periodic train aimed at one compartment.

    Spike ticks are ``start_tick + phase_ticks + round(k * 2000 / frequency_hz)``
    inside ``[start_tick, stop_tick)``.  ``jitter`` > 0 displaces each spike by
    a seeded uniform integer in ``[-jitter, jitter]``.
    """

    cell: str
    compartment: int
    frequency_hz: float
    start_tick: int
    stop_tick: int
    phase_ticks: int = 0
    jitter: int = 0

    def __post_init__(self):
        if self.frequency_hz <= 0:
            raise ConfigError("frequency_hz must be positive")
        if self.frequency_hz > TICKS_PER_SECOND:
            raise ConfigError(f"frequency {self.frequency_hz} Hz has a period shorter than one tick")
        if self.start_tick >= self.stop_tick:
            raise ConfigError("start_tick must be below stop_tick")
        if self.phase_ticks < 0 or self.jitter < 0:
            raise ConfigError("phase_ticks and jitter must be non-negative")

    @property
    def target(self) -> tuple[str, int]:
        return (self.cell, self.compartment)

    @property
    def period_ticks(self) -> float:
        return TICKS_PER_SECOND / self.frequency_hz

    def to_dict(self) -> dict:
        return asdict(self)


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def generate(spec: TrainSpec, seed: int = 0) -> list[int]:
    """Ordered, strictly increasing spike ticks for ``spec``.

    Without jitter the seed is ignored.
    """
    period = spec.period_ticks
    origin = spec.start_tick + spec.phase_ticks
    ticks = []
    k = 0
    while True:
        t = origin + _round_half_up(k * period)
        if t >= spec.stop_tick:
            break
        ticks.append(t)
        k += 1
    if spec.jitter == 0 or not ticks:
        return ticks

    rng = np.random.default_rng([seed, _target_key(spec)])
    offsets = rng.integers(-spec.jitter, spec.jitter + 1, size=len(ticks))
    moved = {t + int(d) for t, d in zip(ticks, offsets)}
    return sorted(t for t in moved if spec.start_tick <= t < spec.stop_tick)


def _target_key(spec: TrainSpec) -> int:
    # stable across processes, unlike hash()
    key = 0
    for ch in f"{spec.cell}/{spec.compartment}":
        key = (key * 131 + ord(ch)) % (2**31)
    return key


def schedule(trains: Iterable[TrainSpec], seed: int = 0) -> dict[int, list[tuple[str, int]]]:
    """Merge trains into ``{tick: [(cell, compartment), ...]}`` in a fixed order."""
    out: dict[int, list[tuple[str, int]]] = {}
    for spec in trains:
        for t in generate(spec, seed):
            out.setdefault(t, []).append(spec.target)
    for targets in out.values():
        targets.sort()
    return out


def baseline_trains(
    cell: str,
    kinds: list[str],
    total_ticks: int,
    excitatory_hz: float = 25.0,
    inhibitory_hz: float = 10.0,
    phase_step_ticks: int = 3,
) -> list[TrainSpec]:
    """One ongoing train per input, phase-offset by ``index * phase_step_ticks``."""
    trains = []
    for i, kind in enumerate(kinds):
        hz = excitatory_hz if kind == "excitatory" else inhibitory_hz
        if hz <= 0:
            continue
        trains.append(TrainSpec(cell, i, hz, 0, total_ticks, phase_ticks=i * phase_step_ticks))
    return trains
