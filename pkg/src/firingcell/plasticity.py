"""Per-synapse long-term potentiation.

A presynaptic arrival that coincides with a local potential at or above the
gate deposits one quantum of calcium charge.  Accumulated charge ``Q`` sets

* how long the potentiation lasts: ``round(a * Q**b)`` ticks, and
* how strongly later EPSPs on that input are scaled: ``1 + min(c * Q, cap)``.

When the timer runs out the charge and the memory value drop to zero in one
step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .registers import HISTORY, REGISTER_LENGTH, ShiftRegister


@dataclass(frozen=True)
class LtpConfig:
    gate_mv: float = -70.0
    charge_quantum: float = 1.0
    duration_scale: float = 200.0
    duration_exponent: float = 1.5
    strength_gain: float = 0.05
    strength_cap: float = 2.0

    def __post_init__(self):
        if self.charge_quantum <= 0:
            raise ConfigError("charge_quantum must be positive")
        if self.duration_scale <= 0:
            raise ConfigError("duration_scale must be positive")
        if self.duration_exponent < 1:
            raise ConfigError("duration_exponent must be >= 1")
        if self.strength_gain <= 0:
            raise ConfigError("strength_gain must be positive")
        if self.strength_cap < 0:
            raise ConfigError("strength_cap must be non-negative")

    @property
    def max_multiplier(self) -> float:
        return 1.0 + self.strength_cap

    def duration(self, charge: float) -> int:
        """Potentiation period in ticks for accumulated ``charge`` (at least 1)."""
        return max(1, math.floor(self.duration_scale * charge ** self.duration_exponent + 0.5))


@dataclass
class PotentiationState:
    """LTP bookkeeping for one compartment.

    ``charge`` is the total outstanding calcium: whatever is still inside the
    calcium register plus ``carried``, the part that has already shifted out.
    """

    calcium: ShiftRegister = field(default_factory=lambda: ShiftRegister(REGISTER_LENGTH, HISTORY))
    charge: float = 0.0
    carried: float = 0.0
    timer: int = 0
    memory: float = 0.0

    @property
    def active(self) -> bool:
        return self.timer > 0

    def shift(self) -> None:
        # Charge leaving the register is carried, so shifting never changes Q.
        out = self.calcium.shift()
        if out:
            self.carried += out

    def clear(self) -> None:
        self.calcium.reset()
        self.charge = 0.0
        self.carried = 0.0
        self.timer = 0
        self.memory = 0.0


def ltp_gate_check(state: PotentiationState, v_local: float, config: LtpConfig) -> PotentiationState:
    """Open the NMDA-like gate if the local potential reached ``gate_mv``.

    Call only on ticks where a spike arrived at this compartment.
    """
    if v_local < config.gate_mv:
        return state
    state.calcium[0] = state.calcium[0] + config.charge_quantum
    state.charge = state.carried + state.calcium.total()
    state.timer = config.duration(state.charge)
    state.memory = state.charge
    return state


def potentiation_multiplier(state: PotentiationState, config: LtpConfig) -> float:
    if state.timer <= 0:
        return 1.0
    return 1.0 + min(config.strength_gain * state.charge, config.strength_cap)


def potentiation_decay(state: PotentiationState) -> PotentiationState:
    """Count the potentiation timer down by one tick; expire at zero."""
    if state.timer <= 0:
        return state
    state.timer -= 1
    if state.timer == 0:
        state.clear()
    else:
        state.memory = state.charge
    return state
