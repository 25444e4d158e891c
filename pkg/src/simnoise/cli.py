"""Command-line entry point: ``simnoise {generate,decompose,metrics,compare,report}``.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 success but at
least one degenerate statistic (infinite/undefined) was reported.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .exceptions import SimNoiseError
from .manifest import Manifest, load_manifest, reference_design_manifest
from .pipeline import ComparisonReport, csv_tables, export_report, run_analysis
from .signal_model import decompose
from .traces import atomic_write_text, write_trace

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_DEGENERATE = 0, 1, 2, 3

logger = logging.getLogger("simnoise")


def _cutoff(value):
    if value.lower() in ("none", "off"):
        return "none"
    return float(value)


def _add_common(p, need_manifest=True):
    p.add_argument("--manifest", type=Path, required=need_manifest, help="analysis manifest (JSON)")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--cutoff-hz", type=_cutoff, help="low-pass cutoff, or 'none' to skip filtering")
    p.add_argument("--f-max-hz", type=float)
    p.add_argument("--bin-width-hz", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--t-test", choices=("pooled", "welch"))
    p.add_argument("--fit-fundamental", choices=("on", "off"))
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=("json", "csv", "both"), default="both")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="simnoise", description="Motion-simulator noise analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write synthetic trial sets as trace files plus a trace manifest")
    _add_common(g, need_manifest=False)
    g.add_argument("--n-trials", type=int, default=20)

    for name, help_ in (
        ("decompose", "write deterministic/stochastic components per trial set"),
        ("metrics", "per-trial-set rms, SNR, DSR, spectra and averaging curves"),
        ("compare", "reference-vs-comparison tests only"),
        ("report", "run the full pipeline and export every table"),
    ):
        _add_common(sub.add_parser(name, help=help_))
    return parser


def _params_from_args(manifest, args):
    cutoff = args.cutoff_hz
    overrides = {
        "f_max_hz": args.f_max_hz,
        "bin_width_hz": args.bin_width_hz,
        "alpha": args.alpha,
        "t_test": args.t_test,
        "seed": args.seed,
        "fit_fundamental": None if args.fit_fundamental is None else args.fit_fundamental == "on",
    }
    if cutoff is not None:
        overrides["cutoff_hz"] = cutoff
    params = manifest.parameters.override(**overrides)
    if params.cutoff_hz == "none":
        params.cutoff_hz = None
    manifest.parameters = params
    return manifest


def cmd_generate(args):
    if args.manifest is not None:
        manifest = load_manifest(args.manifest)
    else:
        manifest = Manifest.from_dict(reference_design_manifest(args.n_trials, args.seed or 0))
    manifest = _params_from_args(manifest, args)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for entry in manifest.trial_sets:
        ts = manifest.load_trialset(entry.label)
        set_dir = out / entry.label
        set_dir.mkdir(exist_ok=True)
        paths = []
        for i, trial in enumerate(ts.trials):
            p = set_dir / f"trial_{i:02d}.csv"
            write_trace(p, trial)
            paths.append(str(p.relative_to(out)))
        d = {"label": entry.label, "command": entry.command, "traces": paths}
        if entry.synth is not None:
            d["generated_from"] = {"generator": "numpy.random.PCG64", "seed": entry.synth.get("seed", 0)}
        entries.append(d)
    doc = manifest.to_dict()
    doc["trial_sets"] = entries
    atomic_write_text(out / "manifest.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(out / "manifest.json")
    return EXIT_OK


def cmd_decompose(args):
    manifest = _params_from_args(load_manifest(args.manifest), args)
    p = manifest.parameters
    args.out.mkdir(parents=True, exist_ok=True)
    for entry in manifest.trial_sets:
        ts = manifest.load_trialset(entry.label)
        dec = decompose(ts, cutoff_hz=p.cutoff_hz, fit_fundamental=p.fit_fundamental)
        write_trace(args.out / f"{entry.label}_deterministic.csv", dec.deterministic)
        cols = [dec.command.times(), dec.command.samples, dec.deterministic.samples]
        header = ["time_s", "command", "deterministic"]
        for i, (t, s) in enumerate(zip(dec.total, dec.stochastic)):
            cols += [t.samples, s.samples]
            header += [f"total_{i:02d}", f"stochastic_{i:02d}"]
        rows = np.column_stack(cols)
        text = ",".join(header) + "\n" + "".join(",".join(repr(float(v)) for v in row) + "\n" for row in rows)
        atomic_write_text(args.out / f"{entry.label}_components.csv", text)
    return EXIT_OK


def _analyse(args, keep_comparisons=True):
    manifest = _params_from_args(load_manifest(args.manifest), args)
    if not keep_comparisons:
        manifest.comparisons = []
    return run_analysis(manifest)


def _finish(report):
    for w in report.warnings:
        logger.warning("degenerate statistic: %s", w)
    return EXIT_DEGENERATE if report.has_degenerate else EXIT_OK


def cmd_metrics(args):
    report = _analyse(args, keep_comparisons=False)
    export_report(report, args.out, args.format)
    return _finish(report)


def cmd_compare(args):
    report = _analyse(args)
    args.out.mkdir(parents=True, exist_ok=True)
    if args.format in ("json", "both"):
        doc = {k: report.data[k] for k in ("parameters", "comparisons", "group_anovas", "warnings")}
        atomic_write_text(args.out / "comparisons.json", ComparisonReport(doc).to_json())
    if args.format in ("csv", "both"):
        tables = csv_tables(report)
        for name in ("comparisons.csv", "table1.csv"):
            atomic_write_text(args.out / name, tables[name])
    return _finish(report)


def cmd_report(args):
    report = _analyse(args)
    for path in export_report(report, args.out, args.format):
        print(path)
    return _finish(report)


COMMANDS = {
    "generate": cmd_generate,
    "decompose": cmd_decompose,
    "metrics": cmd_metrics,
    "compare": cmd_compare,
    "report": cmd_report,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (SimNoiseError, ValueError) as exc:
        logger.error("%s", exc)
        return EXIT_VALIDATION
    except OSError as exc:
        logger.error("%s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
