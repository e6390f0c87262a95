"""Single firing-cell dynamics.

A cell is a string of dendritic compartments feeding one body.  Every tick
(0.5 ms) all registers shift, arriving spikes add a PSP kernel into their
compartment's register, and the weighted sum of the current register slots
is compared against the firing threshold.  A spike zeroes every PSP register
and blocks the cell for ``refractory_ticks_total`` ticks.
"""

from __future__ import annotations

import math
import warnings
from operator import mul
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import ConfigError, KernelTruncationWarning
from .plasticity import (
    LtpConfig,
    PotentiationState,
    ltp_gate_check,
    potentiation_decay,
    potentiation_multiplier,
)
from .registers import HISTORY, REGISTER_LENGTH, RegisterBank, RegisterView, ShiftRegister

TICK_MS = 0.5
TICKS_PER_SECOND = 2000

EXCITATORY = "excitatory"
INHIBITORY = "inhibitory"
KINDS = (EXCITATORY, INHIBITORY)


def check_kind(kind: str) -> str:
    if kind not in KINDS:
        raise ConfigError(f"unknown synapse kind {kind!r}")
    return kind


@dataclass
class TickClock:
    tick_index: int = 0
    tick_duration: float = TICK_MS

    @property
    def time_ms(self) -> float:
        return self.tick_index * self.tick_duration

    def advance(self) -> int:
        self.tick_index += 1
        return self.tick_index


def min_psp(v_threshold: float, e_k: float, n_inputs: int) -> float:
    """Smallest single PSP: the threshold-to-E_K span shared across all inputs."""
    if n_inputs < 1:
        raise ConfigError("n_inputs must be at least 1")
    if v_threshold <= e_k:
        raise ConfigError("v_threshold must lie above e_k")
    return (v_threshold - e_k) / n_inputs


def effective_epsp_amplitude(min_psp: float, enhancement: float) -> float:
    if min_psp <= 0:
        raise ConfigError("min_psp must be positive")
    if enhancement < 1:
        raise ConfigError("enhancement must be >= 1")
    return min_psp * enhancement


@dataclass(frozen=True)
class PSPKernel:
    kind: str
    samples: tuple[float, ...]

    @property
    def peak(self) -> float:
        return max(self.samples, key=abs)


def make_kernel(
    kind: str,
    amplitude: float,
    rise_ticks: int = 2,
    decay_half_life_ticks: float = 6.0,
    length: int = REGISTER_LENGTH,
) -> PSPKernel:
    """Linear rise to ``amplitude`` over ``rise_ticks``, then geometric decay.

    Sample 0 is the arrival tick and is always 0.  Inhibitory kernels are the
    negated excitatory shape.
    """
    check_kind(kind)
    if amplitude <= 0:
        raise ConfigError("kernel amplitude must be positive")
    if not 1 <= rise_ticks <= length - 1:
        raise ConfigError(f"rise_ticks must be in [1, {length - 1}]")
    if decay_half_life_ticks <= 0:
        raise ConfigError("decay_half_life_ticks must be positive")

    sign = 1.0 if kind == EXCITATORY else -1.0
    samples = []
    for k in range(length):
        if k < rise_ticks:
            v = amplitude * k / rise_ticks
        elif k == rise_ticks:
            v = amplitude
        else:
            v = amplitude * 0.5 ** ((k - rise_ticks) / decay_half_life_ticks)
        samples.append(sign * v)
    if abs(samples[-1]) > 0.01 * amplitude:
        warnings.warn(
            f"{kind} kernel truncated at {abs(samples[-1]):.3g} mV "
            f"({100 * abs(samples[-1]) / amplitude:.1f}% of amplitude)",
            KernelTruncationWarning,
            stacklevel=2,
        )
    return PSPKernel(kind, tuple(samples))


def linear_weights(n: int, proximal: float = 1.0, distal: float = 0.6) -> list[float]:
    if n == 1:
        return [proximal]
    return [proximal + (distal - proximal) * i / (n - 1) for i in range(n)]


@dataclass
class Compartment:
    """One dendrite segment.  The PSP register is a live view into the cell's bank."""

    index: int
    kind: str
    weight: float
    psp_register: RegisterView
    potentiation: PotentiationState = field(default_factory=PotentiationState)
    neuromod_register: ShiftRegister = field(
        default_factory=lambda: ShiftRegister(REGISTER_LENGTH, HISTORY)
    )

    @property
    def calcium_register(self) -> ShiftRegister:
        return self.potentiation.calcium

    @property
    def memory(self) -> float:
        return self.potentiation.memory

    @property
    def potentiation_timer(self) -> int:
        return self.potentiation.timer


class FiringCell:
    """A firing cell with excitatory or inhibitory output polarity."""

    def __init__(
        self,
        kinds: Sequence[str],
        *,
        epsp_amplitude: float,
        ipsp_amplitude: float,
        weights: Sequence[float] | None = None,
        v_rest: float = -80.0,
        v_threshold: float = -50.0,
        e_k: float = -90.0,
        refractory_ticks_total: int = 3,
        rise_ticks: int = 2,
        decay_half_life_ticks: float = 6.0,
        spread: float = 0.5,
        ltp: LtpConfig | None = None,
        kind: str = EXCITATORY,
        name: str = "fc",
    ):
        n = len(kinds)
        if n < 1:
            raise ConfigError("a cell needs at least one compartment")
        for k in kinds:
            check_kind(k)
        self.kind = check_kind(kind)
        self.name = name
        self.ltp = ltp if ltp is not None else LtpConfig()
        if not e_k < v_rest < self.ltp.gate_mv < v_threshold:
            raise ConfigError("need e_k < v_rest < local gate < v_threshold")
        if refractory_ticks_total < 0:
            raise ConfigError("refractory_ticks_total must be non-negative")
        if not 0 < spread < 1:
            raise ConfigError("spread must lie in (0, 1)")
        if weights is None:
            weights = linear_weights(n)
        weights = [float(w) for w in weights]
        if len(weights) != n:
            raise ConfigError(f"expected {n} weights, got {len(weights)}")
        if any(not 0 < w <= 1 for w in weights):
            raise ConfigError("weights must lie in (0, 1]")
        if any(b > a for a, b in zip(weights, weights[1:])):
            raise ConfigError("weights must be non-increasing with distance from the body")

        self.v_rest = v_rest
        self.v_threshold = v_threshold
        self.e_k = e_k
        self.refractory_ticks_total = refractory_ticks_total
        self.refractory_remaining = 0
        self.epsp_amplitude = epsp_amplitude
        self.ipsp_amplitude = ipsp_amplitude
        self.spread = spread
        self.rise_ticks = rise_ticks
        self.decay_half_life_ticks = decay_half_life_ticks
        self.clock = TickClock()

        self.kernels = {
            EXCITATORY: make_kernel(EXCITATORY, epsp_amplitude, rise_ticks, decay_half_life_ticks),
            INHIBITORY: make_kernel(INHIBITORY, ipsp_amplitude, rise_ticks, decay_half_life_ticks),
        }
        self._psp = RegisterBank(n)
        self.compartments = [
            Compartment(i, k, w, self._psp.view(i)) for i, (k, w) in enumerate(zip(kinds, weights))
        ]
        self.weights = weights
        self._spread_rows = [[spread ** abs(i - j) for j in range(n)] for i in range(n)]
        self._samples = [self.kernels[k].samples for k in kinds]
        self._excitatory = [k == EXCITATORY for k in kinds]
        self._states = [c.potentiation for c in self.compartments]
        self._potentiated: list[int] = []
        self.last_potential = v_rest
        # bumped whenever any memory value may have changed
        self.memory_version = 0

    def __len__(self) -> int:
        return len(self.compartments)

    @property
    def v_local_threshold(self) -> float:
        return self.ltp.gate_mv

    @property
    def floor(self) -> float:
        """Lowest register deviation allowed (E_K relative to rest)."""
        return self.e_k - self.v_rest

    def body_potential(self) -> float:
        v = self.v_rest + sum(map(mul, self.weights, self._psp.now()))
        return v if v > self.e_k else self.e_k

    def local_potential(self, i: int) -> float:
        v = self.v_rest + sum(map(mul, self._spread_rows[i], self._psp.now()))
        return v if v > self.e_k else self.e_k

    def multiplier(self, i: int) -> float:
        if not self._excitatory[i]:
            return 1.0
        return potentiation_multiplier(self._states[i], self.ltp)

    def memory(self) -> list[float]:
        return [s.memory for s in self._states]

    def step(self, arrivals: Iterable = ()) -> bool:
        """Advance one tick.  ``arrivals`` holds compartment indices or (index, scale) pairs."""
        self._psp.shift()
        if self._potentiated:
            states = self._states
            still = []
            for i in self._potentiated:
                st = states[i]
                st.shift()
                if st.timer > 1:
                    st.timer -= 1  # same as potentiation_decay while the charge stays put
                    still.append(i)
                else:
                    potentiation_decay(st)
            if len(still) != len(self._potentiated):
                self.memory_version += 1
            self._potentiated = still

        spike = False
        if self.refractory_remaining > 0:
            # arrivals during refraction are lost, registers stay at rest
            self.refractory_remaining -= 1
            self.last_potential = self.body_potential()
        else:
            if arrivals:
                self._receive(arrivals)
            v = self.last_potential = self.body_potential()
            if v >= self.v_threshold:
                spike = True
                self._psp.reset()
                self.refractory_remaining = self.refractory_ticks_total
        self.clock.tick_index += 1
        return spike

    def _receive(self, arrivals: Iterable) -> None:
        floor = self.e_k - self.v_rest
        excitatory, states, samples, add = self._excitatory, self._states, self._samples, self._psp.add
        hit = []
        for a in arrivals:
            if a.__class__ is tuple:
                i, scale = a
            else:
                i, scale = a, 1.0
            if excitatory[i]:
                st = states[i]
                if st.timer > 0:
                    scale *= potentiation_multiplier(st, self.ltp)
                hit.append(i)
                # non-negative samples cannot push a slot below the floor
                add(i, samples[i], scale)
            else:
                add(i, samples[i], scale, floor)
        if not hit:
            return
        for i in sorted(set(hit)) if len(hit) > 1 else hit:
            st = states[i]
            was_active = st.timer > 0
            before = st.charge
            ltp_gate_check(st, self.local_potential(i), self.ltp)
            if st.charge != before:
                self.memory_version += 1
            if st.timer > 0 and not was_active:
                self._potentiated.append(i)
        self._potentiated.sort()

    def __repr__(self) -> str:
        kinds = "".join("E" if e else "I" for e in self._excitatory)
        return f"FiringCell(name={self.name!r}, kind={self.kind!r}, compartments={kinds!r})"


def deposit_spike(
    compartment: Compartment,
    kernel: PSPKernel,
    multiplier: float = 1.0,
    floor: float | None = -10.0,
) -> Compartment:
    """Superpose ``multiplier * kernel`` onto the compartment's PSP register.

    Slots are clamped from below at ``floor`` (E_K minus the resting potential).
    """
    if multiplier < 1:
        raise ConfigError("multiplier must be >= 1")
    compartment.psp_register.add(kernel.samples, multiplier, floor)
    return compartment


def body_potential(cell: FiringCell) -> float:
    return cell.body_potential()


def local_potential(cell: FiringCell, i: int) -> float:
    if not 0 <= i < len(cell):
        raise IndexError(i)
    return cell.local_potential(i)


def step(cell: FiringCell, arrivals: Iterable = ()) -> tuple[bool, FiringCell]:
    arrivals = list(arrivals)
    for a in arrivals:
        i = a[0] if isinstance(a, tuple) else a
        if not 0 <= i < len(cell):
            raise IndexError(f"arrival for unknown compartment {i}")
    return cell.step(arrivals), cell


def upper_bound(cell: FiringCell) -> float:
    """Largest body potential reachable: every register at peak with maximal potentiation."""
    peak = cell.epsp_amplitude * cell.ltp.max_multiplier
    span = sum(cell.kernels[EXCITATORY].samples)
    # a register holds at most one arrival per tick, so its slot 0 is bounded by the kernel sum
    per_register = max(peak, span * cell.ltp.max_multiplier)
    return cell.v_rest + sum(w for w, e in zip(cell.weights, cell._excitatory) if e) * per_register


def ticks_to_ms(ticks: float) -> float:
    return ticks * TICK_MS


def ms_to_ticks(ms: float) -> int:
    return math.floor(ms / TICK_MS + 0.5)
