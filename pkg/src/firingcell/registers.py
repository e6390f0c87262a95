"""Fixed-length shift registers backed by ring buffers.

Two shift directions are supported:

``history``
    slot 0 holds the newest value; a shift moves slot k to slot k+1, drops
    slot L-1 and writes the fill value into slot 0.  Used for calcium charge.

``delay``
    slot 0 holds the value for the current tick and slot k the value k ticks
    ahead; a shift moves slot k+1 to slot k, drops slot 0 and writes the fill
    value into slot L-1.  Used for postsynaptic potential registers, so that a
    kernel added at slot k becomes current exactly k shifts later.

Shifts are O(1): only the head index moves, and a register known to be all
zeros is not touched at all.
"""

from __future__ import annotations

from array import array
from typing import Iterable, Sequence

REGISTER_LENGTH = 30

HISTORY = "history"
DELAY = "delay"
_MODES = (HISTORY, DELAY)


def _check_mode(mode: str) -> str:
    if mode not in _MODES:
        raise ValueError(f"unknown register mode {mode!r}, expected one of {_MODES}")
    return mode


class ShiftRegister:
    """A single register of ``length`` real-valued slots."""

    __slots__ = ("_buf", "_head", "_mode", "_live")

    def __init__(self, length: int = REGISTER_LENGTH, mode: str = HISTORY):
        if length < 1:
            raise ValueError("register length must be positive")
        self._buf = [0.0] * length
        self._head = 0
        self._mode = _check_mode(mode)
        # shifts left before every written value has fallen off; 0 means all zeros
        self._live = 0

    @classmethod
    def from_slots(cls, slots: Sequence[float], mode: str = HISTORY) -> "ShiftRegister":
        reg = cls(len(slots), mode)
        reg._buf = [float(v) for v in slots]
        reg._live = len(slots) if any(reg._buf) else 0
        return reg

    @property
    def mode(self) -> str:
        return self._mode

    def __len__(self) -> int:
        return len(self._buf)

    def _phys(self, k: int) -> int:
        n = len(self._buf)
        if not -n <= k < n:
            raise IndexError(k)
        k %= n
        if self._mode == HISTORY:
            return (self._head - k) % n
        return (self._head + k) % n

    def __getitem__(self, k: int) -> float:
        return self._buf[self._phys(k)]

    def __setitem__(self, k: int, value: float) -> None:
        self._buf[self._phys(k)] = float(value)
        self._live = len(self._buf)

    @property
    def slots(self) -> list[float]:
        return [self._buf[self._phys(k)] for k in range(len(self._buf))]

    def total(self) -> float:
        return sum(self._buf)

    def shift(self, fill: float = 0.0) -> float:
        """Advance one tick and return the value that fell off the end."""
        if not self._live and not fill:
            return 0.0
        n = len(self._buf)
        self._live = n if fill else self._live - 1
        if self._mode == HISTORY:
            self._head = (self._head + 1) % n
            out = self._buf[self._head]
            self._buf[self._head] = fill
        else:
            out = self._buf[self._head]
            self._buf[self._head] = fill
            self._head = (self._head + 1) % n
        return out

    def reset(self) -> None:
        self._buf = [0.0] * len(self._buf)
        self._live = 0

    def add(self, samples: Iterable[float], scale: float = 1.0, floor: float | None = None) -> None:
        """Add ``scale * samples[k]`` into slot k, optionally clamping from below."""
        self._live = len(self._buf)
        for k, s in enumerate(samples):
            p = self._phys(k)
            v = self._buf[p] + s * scale
            if floor is not None and v < floor:
                v = floor
            self._buf[p] = v

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ShiftRegister):
            return NotImplemented
        return self._mode == other._mode and self.slots == other.slots

    def __repr__(self) -> str:
        return f"ShiftRegister(mode={self._mode!r}, slots={self.slots!r})"


_INDEX_CACHE: dict[tuple[int, int], list[list[list[int]]]] = {}


def _bank_index(width: int, length: int) -> list[list[list[int]]]:
    """``table[head][i][k]``: flat position of slot k of register i."""
    key = (width, length)
    table = _INDEX_CACHE.get(key)
    if table is None:
        table = [[[((h + k) % length) * width + i for k in range(length)] for i in range(width)]
                 for h in range(length)]
        _INDEX_CACHE[key] = table
    return table


class RegisterBank:
    """``width`` delay-mode registers sharing one head.

    Storage is one flat array of ``length`` rows, one row per slot, so a shift
    of every register in the bank clears a single row.  Keeping the doubles
    contiguous matters once thousands of cells are stepped in turn.
    """

    __slots__ = ("width", "length", "_buf", "_head", "_zero", "_index")

    def __init__(self, width: int, length: int = REGISTER_LENGTH):
        self.width = width
        self.length = length
        self._buf = array("d", bytes(8 * width * length))
        self._zero = array("d", bytes(8 * width))
        self._head = 0
        self._index = _bank_index(width, length)

    def now(self) -> array:
        """Slot 0 of every register (a copy)."""
        a = self._head * self.width
        return self._buf[a:a + self.width]

    def shift(self) -> None:
        a = self._head * self.width
        self._buf[a:a + self.width] = self._zero
        self._head = (self._head + 1) % self.length

    def reset(self) -> None:
        self._buf = array("d", bytes(8 * self.width * self.length))

    def slot(self, i: int, k: int) -> float:
        return self._buf[((self._head + k) % self.length) * self.width + i]

    def slots(self, i: int) -> list[float]:
        buf = self._buf
        return [buf[j] for j in self._index[self._head][i]]

    def add(self, i: int, samples: Sequence[float], scale: float = 1.0, floor: float | None = None) -> None:
        buf = self._buf
        positions = self._index[self._head][i]
        if floor is None:
            if scale == 1.0:
                for j, s in zip(positions, samples):
                    buf[j] += s
            else:
                for j, s in zip(positions, samples):
                    buf[j] += s * scale
            return
        for j, s in zip(positions, samples):
            v = buf[j] + s * scale
            buf[j] = v if v > floor else floor

    def view(self, i: int) -> "RegisterView":
        return RegisterView(self, i)


class RegisterView:
    """Live read/add access to one register of a :class:`RegisterBank`.

    Shifting and resetting happen on the whole bank, never per view.
    """

    __slots__ = ("bank", "index")
    mode = DELAY

    def __init__(self, bank: RegisterBank, index: int):
        self.bank = bank
        self.index = index

    def __len__(self) -> int:
        return self.bank.length

    def __getitem__(self, k: int) -> float:
        if not 0 <= k < self.bank.length:
            raise IndexError(k)
        return self.bank.slot(self.index, k)

    @property
    def slots(self) -> list[float]:
        return self.bank.slots(self.index)

    def total(self) -> float:
        return sum(self.slots)

    def add(self, samples: Sequence[float], scale: float = 1.0, floor: float | None = None) -> None:
        self.bank.add(self.index, samples, scale, floor)

    def __repr__(self) -> str:
        return f"RegisterView(index={self.index}, slots={self.slots!r})"
