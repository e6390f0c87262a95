import json

import pytest

from firingcell.cli import main

DETERMINISTIC = ["spikes.csv", "isi.csv", "poincare.csv", "rates.csv", "memory.csv", "vbody.csv", "summary.json",
                 "poincare.svg", "traces.png"]


def test_validate_preset(capsys):
    assert main(["validate", "--preset", "epsp5"]) == 0
    assert "EPSP=5.0 mV" in capsys.readouterr().out
    assert main(["validate", "--preset", "epsp7"]) == 0
    assert "EPSP=7.0 mV" in capsys.readouterr().out


def test_replicate_is_reproducible(tmp_path):
    for d in ("a", "b"):
        assert main(["replicate", "--preset", "epsp5", "--seed", "1", "--out", str(tmp_path / d)]) == 0
    for name in DETERMINISTIC:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["seed"] == 1 and manifest["derived"]["fc"]["epsp_mv"] == 5.0


def test_analyze(tmp_path):
    (tmp_path / "spikes.csv").write_text("tick,cell_id\n10,fc\n30,fc\n50,fc\n")
    assert main(["analyze", str(tmp_path / "spikes.csv"), "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "poincare.csv").read_text().splitlines()[1] == "fc,10.0,10.0"
    assert (tmp_path / "o" / "poincare.svg").exists()


def test_run_config_file(tmp_path):
    cfg = {"schema_version": 1, "total_ticks": 200, "cells": [{"id": "fc", "compartments": "EEI"}]}
    path = tmp_path / "s.json"
    path.write_text(json.dumps(cfg))
    before = path.read_bytes()
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "o"), "--no-figures"]) == 0
    assert path.read_bytes() == before
    assert (tmp_path / "o" / "spikes.csv").exists()
    assert not (tmp_path / "o" / "traces.png").exists()


@pytest.mark.parametrize("argv_fn, code", [
    (lambda p: [], 2),
    (lambda p: ["replicate", "--preset", "nope", "--out", str(p)], 2),
    (lambda p: ["run", "--config", str(p / "missing.json"), "--out", str(p)], 3),
    (lambda p: ["analyze", str(p / "missing.csv")], 3),
    (lambda p: ["validate", "--config", str(p / "bad.json")], 4),
    (lambda p: ["validate", "--config", str(p / "v2.json")], 4),
])
def test_exit_codes(tmp_path, capsys, argv_fn, code):
    (tmp_path / "bad.json").write_text(json.dumps({"schema_version": 1, "cells": "x"}))
    (tmp_path / "v2.json").write_text(json.dumps({"schema_version": 2}))
    assert main(argv_fn(tmp_path)) == code
