"""Scenario loading, simulation runs and result recording.

A scenario is a JSON document (``schema_version`` 1).  Every key is optional
except ``cells``; :func:`resolve` fills in all defaults so the resolved dict,
stored in each run's manifest, reproduces the run exactly.
"""

from __future__ import annotations

import copy
import datetime as _dt
import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .core import EXCITATORY, INHIBITORY, KINDS, FiringCell, effective_epsp_amplitude, linear_weights, min_psp
from .errors import ConfigError
from .network import Connection, Network
from .plasticity import LtpConfig
from .stimulus import TrainSpec, schedule

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
PRESETS = ("epsp5", "epsp7")

DEFAULT_MODEL = {
    "v_rest": -80.0,
    "v_threshold": -50.0,
    "e_k": -90.0,
    "refractory_ticks": 3,
    "n_inputs": None,
    "enhancement": 2.0,
    "ipsp_enhancement": 1.0,
    "kernel": {"rise_ticks": 2, "decay_half_life_ticks": 6.0},
    "spread": 0.5,
    "weights": {"proximal": 1.0, "distal": 0.6},
    "ltp": {
        "gate_mv": -70.0,
        "charge_quantum": 1.0,
        "duration_scale": 200.0,
        "duration_exponent": 1.5,
        "strength_gain": 0.05,
        "strength_cap": 2.0,
    },
}

DEFAULT_BASELINE = {
    "cells": None,
    "excitatory_hz": 60.0,
    "excitatory_hz_step": 3.0,
    "inhibitory_hz": 10.0,
    "phase_step_ticks": 3,
    "overrides": [],
}

DEFAULT_RECORDING = {"rate_window_ticks": 200, "figures": True, "poincare_max_ms": 200.0}


class SchemaError(ConfigError):
    """The scenario's schema version is not supported."""


def _merge(defaults: dict, given: dict | None, path: str) -> dict:
    given = {} if given is None else given
    if not isinstance(given, dict):
        raise ConfigError("expected a mapping", path)
    unknown = set(given) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", path)
    out = {}
    for key, dval in defaults.items():
        if isinstance(dval, dict):
            out[key] = _merge(dval, given.get(key), f"{path}.{key}")
        else:
            out[key] = copy.deepcopy(given.get(key, dval))
    return out


def _kinds(spec: Any, path: str) -> list[str]:
    if isinstance(spec, str):
        table = {"E": EXCITATORY, "I": INHIBITORY}
        try:
            return [table[c] for c in spec]
        except KeyError as exc:
            raise ConfigError(f"compartment code {exc.args[0]!r} is not E or I", path) from None
    if isinstance(spec, list):
        for k in spec:
            if k not in KINDS:
                raise ConfigError(f"unknown compartment kind {k!r}", path)
        return list(spec)
    raise ConfigError("compartments must be an E/I string or a list of kinds", path)


def _int(value: Any, path: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"expected an integer, got {value!r}", path)
    if minimum is not None and value < minimum:
        raise ConfigError(f"must be >= {minimum}", path)
    return value


def resolve(raw: dict) -> dict:
    """Validate a scenario dict and return it with every default filled in."""
    if not isinstance(raw, dict):
        raise ConfigError("scenario must be a mapping")
    if "scenario" in raw and "schema_version" not in raw:
        raw = raw["scenario"]  # a run manifest
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})", "schema_version")
    known = {"schema_version", "name", "seed", "total_ticks", "model", "cells", "connections", "stimulus", "recording", "analysis"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", "<root>")

    out: dict[str, Any] = {"schema_version": SCHEMA_VERSION}
    out["name"] = str(raw.get("name", "scenario"))
    out["seed"] = _int(raw.get("seed", 0), "seed")
    total = out["total_ticks"] = _int(raw.get("total_ticks", 5000), "total_ticks", 1)
    model = out["model"] = _merge(DEFAULT_MODEL, raw.get("model"), "model")

    cells_raw = raw.get("cells")
    if not isinstance(cells_raw, list):
        raise ConfigError("expected a list of cells", "cells")
    cells = []
    seen = set()
    for k, c in enumerate(cells_raw):
        path = f"cells[{k}]"
        if not isinstance(c, dict) or "id" not in c or "compartments" not in c:
            raise ConfigError("each cell needs 'id' and 'compartments'", path)
        cid = str(c["id"])
        if cid in seen:
            raise ConfigError(f"duplicate cell id {cid!r}", path)
        seen.add(cid)
        kinds = _kinds(c["compartments"], f"{path}.compartments")
        kind = c.get("kind", EXCITATORY)
        if kind not in KINDS:
            raise ConfigError(f"unknown cell kind {kind!r}", f"{path}.kind")
        weights = c.get("weights")
        if weights is None:
            weights = linear_weights(len(kinds), model["weights"]["proximal"], model["weights"]["distal"])
        cells.append({"id": cid, "kind": kind, "compartments": "".join("E" if x == EXCITATORY else "I" for x in kinds),
                      "weights": [float(w) for w in weights]})
    out["cells"] = cells
    by_id = {c["id"]: c for c in cells}

    def target(obj: dict, path: str) -> tuple[str, int]:
        cid = str(obj.get("cell", cells[0]["id"] if len(cells) == 1 else None))
        if cid not in by_id:
            raise ConfigError(f"unknown cell {cid!r}", path)
        i = _int(obj.get("compartment"), f"{path}.compartment", 0)
        if i >= len(by_id[cid]["compartments"]):
            raise ConfigError(f"cell {cid!r} has no compartment {i}", f"{path}.compartment")
        return cid, i

    conns = []
    for k, c in enumerate(raw.get("connections", [])):
        path = f"connections[{k}]"
        src = str(c.get("source"))
        if src not in by_id:
            raise ConfigError(f"unknown source cell {src!r}", path)
        cid, i = target(c.get("target", {}), f"{path}.target")
        conns.append({"source": src, "target": {"cell": cid, "compartment": i},
                      "delay_ticks": _int(c.get("delay_ticks", 1), f"{path}.delay_ticks", 1)})
    out["connections"] = conns

    stim_raw = raw.get("stimulus", {}) or {}
    unknown = set(stim_raw) - {"baseline", "trains", "episodes"}
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", "stimulus")
    baseline = stim_raw.get("baseline", {})
    if baseline is None:
        baseline = {"cells": []}
    baseline = _merge(DEFAULT_BASELINE, baseline, "stimulus.baseline")
    if baseline["cells"] is None:
        baseline["cells"] = [c["id"] for c in cells]
    for cid in baseline["cells"]:
        if cid not in by_id:
            raise ConfigError(f"unknown cell {cid!r}", "stimulus.baseline.cells")
    overrides = []
    for k, o in enumerate(baseline["overrides"]):
        path = f"stimulus.baseline.overrides[{k}]"
        cid, i = target(o, path)
        extra = set(o) - {"cell", "compartment", "frequency_hz", "phase_ticks", "enabled"}
        if extra:
            raise ConfigError(f"unknown keys {sorted(extra)}", path)
        entry = {"cell": cid, "compartment": i}
        for key in ("frequency_hz", "phase_ticks", "enabled"):
            if key in o:
                entry[key] = o[key]
        overrides.append(entry)
    baseline["overrides"] = overrides

    def train(obj: dict, path: str, start: int, stop: int) -> dict:
        cid, i = target(obj, path)
        extra = set(obj) - {"cell", "compartment", "frequency_hz", "phase_ticks", "start_tick", "stop_tick", "jitter"}
        if extra:
            raise ConfigError(f"unknown keys {sorted(extra)}", path)
        t = {"cell": cid, "compartment": i, "frequency_hz": float(obj.get("frequency_hz", 0)),
             "phase_ticks": _int(obj.get("phase_ticks", 0), f"{path}.phase_ticks", 0),
             "start_tick": _int(obj.get("start_tick", start), f"{path}.start_tick", 0),
             "stop_tick": _int(obj.get("stop_tick", stop), f"{path}.stop_tick", 1),
             "jitter": _int(obj.get("jitter", 0), f"{path}.jitter", 0)}
        if not 0 <= t["start_tick"] < t["stop_tick"] <= total:
            raise ConfigError(f"window [{t['start_tick']}, {t['stop_tick']}) outside [0, {total})", path)
        try:
            _train_spec(t)
        except ConfigError as exc:
            raise ConfigError(exc.reason, path) from None
        return t

    trains = [train(t, f"stimulus.trains[{k}]", 0, total) for k, t in enumerate(stim_raw.get("trains", []))]
    episodes = []
    for k, e in enumerate(stim_raw.get("episodes", [])):
        path = f"stimulus.episodes[{k}]"
        start = _int(e.get("start_tick"), f"{path}.start_tick", 0)
        stop = _int(e.get("stop_tick"), f"{path}.stop_tick", 1)
        if not start < stop <= total:
            raise ConfigError(f"episode window [{start}, {stop}) outside [0, {total})", path)
        episodes.append({"name": str(e.get("name", f"episode{k}")), "start_tick": start, "stop_tick": stop,
                         "trains": [train(t, f"{path}.trains[{j}]", start, stop) for j, t in enumerate(e.get("trains", []))]})
    out["stimulus"] = {"baseline": baseline, "trains": trains, "episodes": episodes}
    out["recording"] = _merge(DEFAULT_RECORDING, raw.get("recording"), "recording")
    _int(out["recording"]["rate_window_ticks"], "recording.rate_window_ticks", 1)

    analysis = dict(raw.get("analysis") or {})
    if "pre_window" not in analysis or "post_window" not in analysis:
        train_ep = next((e for e in episodes if e["name"] == "training"), episodes[0] if episodes else None)
        if train_ep is not None:
            analysis.setdefault("pre_window", [0, train_ep["start_tick"]])
            analysis.setdefault("post_window", [train_ep["stop_tick"], total])
        else:
            analysis.setdefault("pre_window", [0, total // 2])
            analysis.setdefault("post_window", [total // 2, total])
    for key in ("pre_window", "post_window"):
        a, b = analysis[key]
        if not 0 <= a < b <= total:
            raise ConfigError(f"window [{a}, {b}) outside [0, {total})", f"analysis.{key}")
    out["analysis"] = {"pre_window": list(analysis["pre_window"]), "post_window": list(analysis["post_window"])}

    derived(out)  # checks amplitudes
    build_network(out)  # checks topology
    return out


def derived(scenario: dict) -> dict[str, dict[str, float]]:
    """Per-cell EPSP/IPSP amplitudes from the minimal-PSP rule."""
    m = scenario["model"]
    out = {}
    for c in scenario["cells"]:
        n = m["n_inputs"] if m["n_inputs"] is not None else len(c["compartments"])
        try:
            base = min_psp(m["v_threshold"], m["e_k"], n)
            out[c["id"]] = {
                "n_inputs": n,
                "min_psp_mv": base,
                "enhancement": m["enhancement"],
                "epsp_mv": effective_epsp_amplitude(base, m["enhancement"]),
                "ipsp_mv": effective_epsp_amplitude(base, m["ipsp_enhancement"]),
            }
        except ConfigError as exc:
            raise ConfigError(exc.reason, "model") from None
    return out


def _train_spec(t: dict) -> TrainSpec:
    return TrainSpec(t["cell"], t["compartment"], t["frequency_hz"], t["start_tick"], t["stop_tick"],
                     t["phase_ticks"], t["jitter"])


def build_network(scenario: dict) -> Network:
    m = scenario["model"]
    amps = derived(scenario)
    try:
        ltp = LtpConfig(**m["ltp"])
        cells = {}
        for c in scenario["cells"]:
            kinds = _kinds(c["compartments"], "cells")
            cells[c["id"]] = FiringCell(
                kinds,
                epsp_amplitude=amps[c["id"]]["epsp_mv"],
                ipsp_amplitude=amps[c["id"]]["ipsp_mv"],
                weights=c["weights"],
                v_rest=m["v_rest"],
                v_threshold=m["v_threshold"],
                e_k=m["e_k"],
                refractory_ticks_total=m["refractory_ticks"],
                rise_ticks=m["kernel"]["rise_ticks"],
                decay_half_life_ticks=m["kernel"]["decay_half_life_ticks"],
                spread=m["spread"],
                ltp=ltp,
                kind=c["kind"],
                name=c["id"],
            )
    except ConfigError as exc:
        raise ConfigError(exc.reason, exc.path or "model") from None
    conns = [Connection(c["source"], (c["target"]["cell"], c["target"]["compartment"]), c["delay_ticks"])
             for c in scenario["connections"]]
    return Network(cells, conns)


def train_specs(scenario: dict) -> list[TrainSpec]:
    """Every stimulus train of a resolved scenario, baseline first."""
    total = scenario["total_ticks"]
    b = scenario["stimulus"]["baseline"]
    overrides = {(o["cell"], o["compartment"]): o for o in b["overrides"]}
    specs = []
    for c in scenario["cells"]:
        if c["id"] not in b["cells"]:
            continue
        for i, code in enumerate(c["compartments"]):
            o = overrides.get((c["id"], i), {})
            if not o.get("enabled", True):
                continue
            if code == "E":
                hz = b["excitatory_hz"] + b["excitatory_hz_step"] * i
            else:
                hz = b["inhibitory_hz"]
            hz = o.get("frequency_hz", hz)
            if hz <= 0:
                continue
            phase = o.get("phase_ticks", i * b["phase_step_ticks"])
            specs.append(TrainSpec(c["id"], i, float(hz), 0, total, phase))
    specs.extend(_train_spec(t) for t in scenario["stimulus"]["trains"])
    for e in scenario["stimulus"]["episodes"]:
        specs.extend(_train_spec(t) for t in e["trains"])
    return specs


@dataclass
class RecordSet:
    total_ticks: int
    spikes: dict[str, list[int]]
    vbody: dict[str, np.ndarray]
    memory: dict[str, np.ndarray]
    inputs: dict[int, list[tuple[str, int]]] = field(default_factory=dict)
    manifest: dict = field(default_factory=dict)

    @property
    def cell_ids(self) -> list[str]:
        return list(self.spikes)


def manifest_of(scenario: dict) -> dict:
    return {
        "scenario": scenario,
        "derived": derived(scenario),
        "seed": scenario["seed"],
        "code_version": __version__,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def run(scenario: dict) -> RecordSet:
    """Simulate a scenario (raw or resolved) for ``total_ticks``."""
    scenario = resolve(scenario)
    net = build_network(scenario)
    total = scenario["total_ticks"]
    inputs = schedule(train_specs(scenario), scenario["seed"])
    ids = list(net.cells)
    cells = [net.cells[c] for c in ids]
    spikes: dict[str, list[int]] = {c: [] for c in ids}
    v_rows: list[list[float]] = [[] for _ in ids]
    mem_rows: list[list[list[float]]] = [[] for _ in ids]
    versions = [-1] * len(ids)
    current = [c.memory() for c in cells]
    empty: list = []
    for t in range(total):
        fired = net.step(inputs.get(t, empty))
        for k, cell in enumerate(cells):
            if fired[ids[k]]:
                spikes[ids[k]].append(t)
            v_rows[k].append(cell.last_potential)
            if cell.memory_version != versions[k]:
                versions[k] = cell.memory_version
                current[k] = cell.memory()
            mem_rows[k].append(current[k])
    vbody = {c: np.asarray(v_rows[k], dtype=float) for k, c in enumerate(ids)}
    memory = {c: np.asarray(mem_rows[k], dtype=float).reshape(total, len(cells[k])) for k, c in enumerate(ids)}
    return RecordSet(total, spikes, vbody, memory, inputs, manifest_of(scenario))


def compare(record: RecordSet, pre_window=None, post_window=None, cell: str | None = None) -> dict:
    """Mean rates and per-input memory for a pre and a post window."""
    from .analysis import mean_rate

    an = record.manifest.get("scenario", {}).get("analysis", {})
    pre = tuple(pre_window or an["pre_window"])
    post = tuple(post_window or an["post_window"])
    for a, b in (pre, post):
        if not 0 <= a < b <= record.total_ticks:
            raise ValueError(f"window [{a}, {b}) outside the run")
    if pre[0] < post[1] and post[0] < pre[1]:
        raise ValueError("pre and post windows overlap")
    cid = cell or record.cell_ids[0]
    spk = record.spikes[cid]
    mem = record.memory[cid]
    mem_pre = mem[pre[1] - 1].tolist()
    mem_post = mem[post[1] - 1].tolist()
    return {
        "cell": cid,
        "pre_window": list(pre),
        "post_window": list(post),
        "pre_duration_ms": (pre[1] - pre[0]) * 0.5,
        "post_duration_ms": (post[1] - post[0]) * 0.5,
        "pre_spikes": sum(1 for t in spk if pre[0] <= t < pre[1]),
        "post_spikes": sum(1 for t in spk if post[0] <= t < post[1]),
        "pre_rate_hz": mean_rate(spk, *pre),
        "post_rate_hz": mean_rate(spk, *post),
        "memory_pre": mem_pre,
        "memory_post": mem_post,
        "memory_delta": [b - a for a, b in zip(mem_pre, mem_post)],
    }


def preset(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}", "preset")
    text = resources.files("firingcell").joinpath("presets", f"{name}.json").read_text()
    return json.loads(text)


def load(path: str | Path) -> dict:
    """Read and resolve a scenario or manifest file.  I/O errors propagate as OSError/ValueError."""
    with open(path) as fh:
        raw = json.load(fh)
    return resolve(raw)


def write_outputs(record: RecordSet, out: str | Path, figures: bool | None = None) -> Path:
    from . import analysis

    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    scenario = record.manifest["scenario"]
    rec = scenario["recording"]
    analysis.write_spikes(out / "spikes.csv", record.spikes)
    analysis.write_isi(out / "isi.csv", record.spikes)
    analysis.write_poincare(out / "poincare.csv", record.spikes)
    analysis.write_rates(out / "rates.csv", record.spikes, rec["rate_window_ticks"], record.total_ticks)
    analysis.write_memory(out / "memory.csv", record.memory)
    analysis.write_vbody(out / "vbody.csv", record.vbody)

    summary = {"cells": {}}
    for cid in record.cell_ids:
        entry = analysis.describe(record.spikes[cid])
        entry.update(compare(record, cell=cid))
        summary["cells"][cid] = entry
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    (out / "manifest.json").write_text(json.dumps(record.manifest, indent=2, sort_keys=True) + "\n")

    if rec["figures"] if figures is None else figures:
        from . import plotting

        for cid in record.cell_ids:
            suffix = "" if len(record.cell_ids) == 1 else f"_{cid}"
            plotting.plot_return_map(
                analysis.return_map(analysis.isi(record.spikes[cid])),
                out / f"poincare{suffix}.svg",
                max_ms=rec["poincare_max_ms"],
            )
            plotting.plot_traces(record, cid, out / f"traces{suffix}.png")
    log.info("wrote outputs to %s", out)
    return out
