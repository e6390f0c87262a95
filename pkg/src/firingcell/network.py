"""Multi-cell wiring and the global tick scheduler.

Spikes travel along connections with an integer delay of at least one tick,
so everything delivered at tick t is known before any cell steps at t and
the cells can be stepped in any order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .core import FiringCell
from .errors import ConfigError


@dataclass(frozen=True)
class Connection:
    source: str
    target: tuple[str, int]
    delay_ticks: int = 1


class Network:
    def __init__(self, cells: Mapping[str, FiringCell], connections: Iterable[Connection] = ()):
        self.cells = dict(cells)
        self.connections = list(connections)
        self.tick = 0
        self._pending: dict[int, list[tuple[str, int]]] = {}
        self._outgoing: dict[str, list[Connection]] = {cid: [] for cid in self.cells}
        for k, conn in enumerate(self.connections):
            self._check(conn, f"connections[{k}]")
            self._outgoing[conn.source].append(conn)

    def _check(self, conn: Connection, path: str) -> None:
        if conn.source not in self.cells:
            raise ConfigError(f"unknown source cell {conn.source!r}", path)
        self.check_target(conn.target, path)
        if conn.delay_ticks < 1:
            raise ConfigError("delay_ticks must be >= 1", path)
        src = self.cells[conn.source]
        cid, i = conn.target
        if self.cells[cid].compartments[i].kind != src.kind:
            raise ConfigError(
                f"{src.kind} cell {conn.source!r} cannot drive "
                f"{self.cells[cid].compartments[i].kind} compartment {i} of {cid!r}",
                path,
            )

    def check_target(self, target: tuple[str, int], path: str = "target") -> None:
        cid, i = target
        if cid not in self.cells:
            raise ConfigError(f"unknown target cell {cid!r}", path)
        if not 0 <= i < len(self.cells[cid]):
            raise ConfigError(f"cell {cid!r} has no compartment {i}", path)

    def in_flight(self) -> list[tuple[int, tuple[str, int]]]:
        return sorted((t, tgt) for t, tgts in self._pending.items() for tgt in tgts)

    def step(self, external: Iterable[tuple[str, int]] = ()) -> dict[str, bool]:
        """Deliver due spikes, step every cell once, and route new spikes."""
        t = self.tick
        due = self._pending.pop(t, [])
        due.extend(external)
        per_cell: dict[str, list[int]] = {}
        for cid, i in due:
            per_cell.setdefault(cid, []).append(i)
        empty: tuple = ()
        fired = {}
        for cid, cell in self.cells.items():
            arrivals = per_cell.get(cid, empty)
            if len(arrivals) > 1:
                # delivery order must not depend on how the spikes were produced
                arrivals.sort()
            fired[cid] = cell.step(arrivals)
        for cid, spiked in fired.items():
            if spiked:
                for conn in self._outgoing[cid]:
                    self._pending.setdefault(t + conn.delay_ticks, []).append(conn.target)
        self.tick = t + 1
        return fired


def network_step(state: Network, external: Iterable[tuple[str, int]] = ()) -> tuple[dict[str, bool], Network]:
    return state.step(external), state
