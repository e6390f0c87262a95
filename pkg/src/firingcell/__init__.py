"""Discrete-time simulator of the firing-cell neuron model."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    EXCITATORY,
    INHIBITORY,
    TICK_MS,
    Compartment,
    FiringCell,
    PSPKernel,
    TickClock,
    body_potential,
    deposit_spike,
    effective_epsp_amplitude,
    local_potential,
    make_kernel,
    min_psp,
    step,
)
from .errors import ConfigError, KernelTruncationWarning  # noqa: E402
from .plasticity import LtpConfig, PotentiationState  # noqa: E402
from .registers import ShiftRegister  # noqa: E402
