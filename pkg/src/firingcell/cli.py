"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 unreadable config or input file,
4 invalid config or unsupported schema, 5 simulation failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import analysis, harness
from .errors import ConfigError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_UNREADABLE = 3
EXIT_INVALID = 4
EXIT_FAILED = 5


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="firingcell", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a scenario and print its derived amplitudes")
    src = v.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path)
    src.add_argument("--preset", choices=harness.PRESETS)

    r = sub.add_parser("run", help="simulate a scenario file")
    r.add_argument("--config", type=Path, required=True)

    rep = sub.add_parser("replicate", help="simulate a built-in preset")
    rep.add_argument("--preset", choices=harness.PRESETS, required=True)

    for sp in (r, rep):
        sp.add_argument("--out", type=Path, required=True)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--total-ticks", type=int)
        sp.add_argument("--no-figures", action="store_true")

    a = sub.add_parser("analyze", help="recompute ISI, return-map and rate files from spikes.csv")
    a.add_argument("spikes", type=Path, help="spikes.csv or a run directory containing it")
    a.add_argument("--out", type=Path)
    a.add_argument("--window-ticks", type=int, default=harness.DEFAULT_RECORDING["rate_window_ticks"])
    a.add_argument("--total-ticks", type=int)
    a.add_argument("--no-figures", action="store_true")
    return p


def _scenario(args) -> dict:
    if getattr(args, "preset", None):
        raw = harness.preset(args.preset)
    else:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise _Fail(EXIT_UNREADABLE, f"cannot read {args.config}: {exc}") from None
    if getattr(args, "seed", None) is not None:
        raw = {**raw, "seed": args.seed}
    if getattr(args, "total_ticks", None) is not None:
        raw = {**raw, "total_ticks": args.total_ticks}
    try:
        return harness.resolve(raw)
    except ConfigError as exc:
        raise _Fail(EXIT_INVALID, f"invalid scenario: {exc}") from None


def _validate(args) -> None:
    scenario = _scenario(args)
    print(f"scenario {scenario['name']}: ok")
    for cid, d in harness.derived(scenario).items():
        print(f"  cell {cid}: n_inputs={d['n_inputs']} min_psp={d['min_psp_mv']:.4f} mV "
              f"EPSP={d['epsp_mv']:.1f} mV IPSP={d['ipsp_mv']:.1f} mV")


def _run(args) -> None:
    scenario = _scenario(args)
    try:
        record = harness.run(scenario)
        harness.write_outputs(record, args.out, figures=False if args.no_figures else None)
    except (ConfigError, ValueError, ArithmeticError) as exc:
        raise _Fail(EXIT_FAILED, f"simulation failed: {exc}") from None
    for cid, spk in record.spikes.items():
        s = harness.compare(record, cell=cid)
        print(f"{cid}: {len(spk)} spikes, pre {s['pre_rate_hz']:.1f} Hz, post {s['post_rate_hz']:.1f} Hz")
    print(f"outputs in {args.out}")


def _analyze(args) -> None:
    path = args.spikes / "spikes.csv" if args.spikes.is_dir() else args.spikes
    try:
        spikes = analysis.read_spikes(path)
    except (OSError, ValueError) as exc:
        raise _Fail(EXIT_UNREADABLE, f"cannot read {path}: {exc}") from None
    out = args.out or path.parent
    out.mkdir(parents=True, exist_ok=True)
    total = args.total_ticks
    if total is None:
        total = max((t for ticks in spikes.values() for t in ticks), default=-1) + 1
    analysis.write_isi(out / "isi.csv", spikes)
    analysis.write_poincare(out / "poincare.csv", spikes)
    analysis.write_rates(out / "rates.csv", spikes, args.window_ticks, max(total, args.window_ticks))
    if not args.no_figures:
        from . import plotting

        for cid, ticks in spikes.items():
            suffix = "" if len(spikes) == 1 else f"_{cid}"
            plotting.plot_return_map(analysis.return_map(analysis.isi(ticks)), out / f"poincare{suffix}.svg")
    print(f"analysis written to {out}")


def main(argv: list[str] | None = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handler = {"validate": _validate, "run": _run, "replicate": _run, "analyze": _analyze}[args.command]
    try:
        handler(args)
    except _Fail as exc:
        print(f"firingcell: {exc}", file=sys.stderr)
        return exc.code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
