"""Acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line with the measured numbers
and then asserts.  Run ``python tests/test_acceptance.py`` for the summary
alone, or ``pytest tests/test_acceptance.py -s`` to see the lines under pytest.
"""

import copy
import statistics
import sys
import time

import numpy as np
import pytest

from firingcell import harness
from firingcell.analysis import isi, return_map
from firingcell.core import EXCITATORY, INHIBITORY, FiringCell, effective_epsp_amplitude, min_psp
from firingcell.network import Connection, Network
from firingcell.stimulus import TrainSpec, schedule

from oracles import convolved_body, kernel_formula


@pytest.fixture
def report(capsys):
    def _report(criterion, ok, detail):
        with capsys.disabled():
            sys.stdout.write(f"\n{'PASS' if ok else 'FAIL'} [{criterion}] {detail}\n")
        assert ok, detail
    return _report


@pytest.fixture(scope="module")
def epsp5():
    return harness.run(harness.preset("epsp5"))


@pytest.fixture(scope="module")
def epsp7():
    return harness.run(harness.preset("epsp7"))


def test_c1_parameter_reproduction(report):
    t0 = time.perf_counter()
    amp = effective_epsp_amplitude(min_psp(-50.0, -90.0, 16), 2.0)
    elapsed = time.perf_counter() - t0
    via_preset = harness.derived(harness.resolve(harness.preset("epsp5")))["fc"]["epsp_mv"]
    ok = amp == 5.0 and via_preset == 5.0 and elapsed < 1e-3
    report("1 parameters", ok, f"EPSP={amp!r} mV (preset {via_preset!r}), {elapsed * 1e6:.1f} us")


def _random_cell(rng, name="fc"):
    n = int(rng.integers(1, 9))
    kinds = [EXCITATORY if rng.random() < 0.75 else INHIBITORY for _ in range(n)]
    kinds[0] = EXCITATORY
    weights = sorted(rng.uniform(0.3, 1.0, n), reverse=True)
    return FiringCell(kinds, epsp_amplitude=float(rng.uniform(2.0, 40.0)), ipsp_amplitude=float(rng.uniform(1.0, 10.0)),
                      weights=weights, rise_ticks=int(rng.integers(1, 4)),
                      decay_half_life_ticks=float(rng.uniform(2.0, 10.0)), name=name)


def test_c2_refraction_invariant(report):
    rng = np.random.default_rng(20240601)
    scenarios, violations, total_spikes, ticks = 10_000, 0, 0, 60
    for s in range(scenarios):
        if s % 10 == 0:
            # small networks so that recurrent deliveries are covered as well
            cells = {k: _random_cell(rng, k) for k in ("a", "b")}
            conns = [Connection(src, (dst, 0), int(rng.integers(1, 4))) for src, dst in (("a", "b"), ("b", "a"))]
            net = Network(cells, conns)
        else:
            net = Network({"fc": _random_cell(rng)})
        density = rng.uniform(0.05, 0.9)
        spikes = {cid: [] for cid in net.cells}
        for t in range(ticks):
            ext = [(cid, i) for cid, cell in net.cells.items() for i in range(len(cell)) if rng.random() < density]
            for cid, fired in net.step(ext).items():
                if fired:
                    spikes[cid].append(t)
        for train in spikes.values():
            total_spikes += len(train)
            violations += sum(1 for a, b in zip(train, train[1:]) if b - a < 4)
    ok = violations == 0 and total_spikes > scenarios
    report("2 refraction", ok, f"{scenarios} scenarios, {total_spikes} spikes, {violations} intervals < 4 ticks")


def test_c3_convolution_oracle(report):
    rng = np.random.default_rng(7)
    schedules, ticks, worst, gate_opened = 1000, 200, 0.0, 0
    t0 = time.perf_counter()
    for _ in range(schedules):
        n = int(rng.integers(1, 17))
        kinds = [EXCITATORY if rng.random() < 0.7 else INHIBITORY for _ in range(n)]
        weights = sorted(rng.uniform(0.2, 1.0, n), reverse=True)
        rise, half = int(rng.integers(1, 5)), float(rng.uniform(1.5, 12.0))
        arrivals = {i: sorted(set(rng.integers(0, ticks, int(rng.integers(0, 25))).tolist())) for i in range(n)}
        # the largest number of arrivals inside one register span bounds every deflection
        all_ticks = np.sort(np.concatenate([np.asarray(v, dtype=int) for v in arrivals.values()] + [np.zeros(0, int)]))
        overlap = max([int(np.searchsorted(all_ticks, t + 30) - k) for k, t in enumerate(all_ticks)] or [1])
        amp = 9.5 / overlap
        cell = FiringCell(kinds, epsp_amplitude=amp, ipsp_amplitude=amp, weights=weights, rise_ticks=rise,
                          decay_half_life_ticks=half)
        kernels = {i: kernel_formula(amp, rise, half, sign=1.0 if k == EXCITATORY else -1.0) for i, k in enumerate(kinds)}
        expected = convolved_body(-80.0, weights, kernels, arrivals, ticks)
        by_tick = {}
        for i, ts in arrivals.items():
            for t in ts:
                by_tick.setdefault(t, []).append(i)
        trace = np.empty(ticks)
        for t in range(ticks):
            assert not cell.step(by_tick.get(t, ()))
            trace[t] = cell.last_potential
        worst = max(worst, float(np.max(np.abs(trace - expected))))
        gate_opened += any(cell.memory())
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and gate_opened == 0 and elapsed < 10.0
    report("3 convolution", ok, f"{schedules} schedules, max |error| {worst:.2e} mV, "
                                f"gate opened {gate_opened}x, {elapsed:.2f} s")


def test_c4_training_effect(report):
    t0 = time.perf_counter()
    rec = harness.run(harness.preset("epsp5"))
    elapsed = time.perf_counter() - t0
    s = harness.compare(rec)
    raw = harness.preset("epsp5")
    raw["stimulus"]["episodes"][0]["trains"] = []
    base = harness.compare(harness.run(raw))
    trained = (7, 8, 9)
    mem_ok = all(s["memory_post"][i] > s["memory_pre"][i] for i in trained)
    untrained_ok = all(s["memory_delta"][i] <= base["memory_delta"][i] for i in range(16) if i not in trained)
    rate_ok = s["post_rate_hz"] > s["pre_rate_hz"] and min(s["pre_spikes"], s["post_spikes"]) >= 5
    ok = mem_ok and untrained_ok and rate_ok and elapsed < 1.0
    report("4 training", ok,
           f"rate {s['pre_rate_hz']:.2f} -> {s['post_rate_hz']:.2f} Hz ({s['pre_spikes']}/{s['post_spikes']} spikes), "
           f"memory 7-9 {[s['memory_post'][i] for i in trained]}, "
           f"untrained max delta {max(s['memory_delta'][i] for i in range(16) if i not in trained)}, {elapsed:.2f} s")


def test_c5_amplitude_effect(report, epsp5, epsp7):
    a, b = harness.compare(epsp5), harness.compare(epsp7)
    ok = b["pre_rate_hz"] > a["pre_rate_hz"] and b["post_rate_hz"] > a["post_rate_hz"]
    report("5 amplitude", ok, f"pre {a['pre_rate_hz']:.2f} vs {b['pre_rate_hz']:.2f} Hz, "
                              f"post {a['post_rate_hz']:.2f} vs {b['post_rate_hz']:.2f} Hz (5 mV vs 7 mV)")


def test_c6_return_map(report, epsp5):
    periodic = {"schema_version": 1, "name": "periodic", "total_ticks": 5000, "cells": [{"id": "fc", "compartments": "E"}],
                "stimulus": {"baseline": {"excitatory_hz": 50.0, "excitatory_hz_step": 0.0}}}
    rec = harness.run(periodic)
    single = return_map(isi(rec.spikes["fc"])).distinct_points()
    rich = return_map(isi(epsp5.spikes["fc"])).distinct_points()
    ok = single == 1 and len(rec.spikes["fc"]) > 2 and rich >= 5
    report("6 return map", ok, f"periodic drive: {single} point ({len(rec.spikes['fc'])} spikes), epsp5: {rich} points")


@pytest.mark.parametrize("name", harness.PRESETS)
def test_c7_determinism(report, tmp_path, name):
    for d in ("a", "b"):
        harness.write_outputs(harness.run(harness.preset(name)), tmp_path / d, figures=False)
    files = ("spikes.csv", "poincare.csv", "memory.csv")
    same = [(tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes() for f in files]
    report(f"7 determinism {name}", all(same), ", ".join(f"{f} {'identical' if s else 'DIFFERS'}" for f, s in zip(files, same)))


def test_c8_phase_sensitivity(report, epsp5):
    raw = harness.preset("epsp5")
    raw["stimulus"]["baseline"]["overrides"] = [{"compartment": 0, "phase_ticks": 1}]
    shifted = harness.run(raw).spikes["fc"]
    ok = set(shifted) != set(epsp5.spikes["fc"])
    diff = len(set(shifted) ^ set(epsp5.spikes["fc"]))
    report("8 phase", ok, f"input 0 phase 0 -> 1 tick: {diff} spike ticks differ")


def test_c9_performance(report):
    scenario = harness.resolve(harness.preset("epsp5"))
    harness.run(copy.deepcopy(scenario))
    times = []
    for _ in range(7):
        t0 = time.perf_counter()
        harness.run(copy.deepcopy(scenario))
        times.append(time.perf_counter() - t0)
    preset_s = statistics.median(times)

    # 1000 copies of the preset cell, each on its own phase-staggered baseline, wired at random
    rng = np.random.default_rng(0)
    proto = harness.build_network(scenario).cells["fc"]
    n_cells, ticks = 1000, 400
    ids = [f"c{k}" for k in range(n_cells)]
    net = Network({cid: copy.deepcopy(proto) for cid in ids},
                  [Connection(cid, (ids[int(rng.integers(0, n_cells))], int(rng.integers(0, 13))), int(rng.integers(1, 6)))
                   for cid in ids for _ in range(4)])
    specs = []
    for cid in ids:
        offset = int(rng.integers(0, 40))
        specs.extend(TrainSpec(cid, i, 60.0 + 3.0 * i if i < 13 else 10.0, 0, ticks, offset + 3 * i) for i in range(16))
    drive = schedule(specs)
    fired = 0
    t0 = time.perf_counter()
    for t in range(ticks):
        fired += sum(net.step(drive.get(t, ())).values())
    elapsed = time.perf_counter() - t0
    throughput = ticks * n_cells * 16 / elapsed
    ok = preset_s < 0.1 and throughput >= 1e6
    report("9 performance", ok, f"preset median {preset_s * 1e3:.1f} ms, network {throughput / 1e6:.2f}M "
                                f"compartment-updates/s ({fired} spikes)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
