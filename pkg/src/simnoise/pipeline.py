"""End-to-end analysis of a manifest and export of the resulting report."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import warnings
from pathlib import Path

import numpy as np

from .exceptions import DegenerateStatisticError, DegenerateStatisticWarning, SimNoiseError
from .manifest import Manifest
from .metrics import averaging_curve, binned_amplitudes, dsr, rms, rms_pooled, snr
from .signal_model import decompose
from .stats import FactorialTable, anova_two_way, t_test_unpaired
from .synth import GENERATOR_NAME
from .traces import atomic_write_text

logger = logging.getLogger(__name__)

REPORT_VERSION = 1
NOISE_KINDS = ("total", "stochastic")


def _num(x):
    """JSON-safe float: NaN and infinities become None."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _nums(xs):
    return [_num(x) for x in xs]


class ComparisonReport:
    """Analysis results as a JSON-ready nested dict, plus the warnings raised while computing them."""

    def __init__(self, data):
        self.data = data

    @property
    def warnings(self):
        return self.data.get("warnings", [])

    @property
    def has_degenerate(self):
        return bool(self.warnings)

    def trial_set(self, label):
        return self.data["trial_sets"][label]

    def comparison(self, reference, comparison):
        for c in self.data["comparisons"]:
            if c["reference"] == reference and c["comparison"] == comparison:
                return c
        raise KeyError((reference, comparison))

    def to_json(self):
        return json.dumps(self.data, indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text):
        return cls(json.loads(text))

    def __eq__(self, other):
        return isinstance(other, ComparisonReport) and self.data == other.data


def _record_warnings(caught, label, sink):
    for w in caught:
        if issubclass(w.category, DegenerateStatisticWarning):
            sink.append(f"[{label}] {w.message}")


def _set_metrics(ts, params, centers_ref, sink):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        dec = decompose(ts, cutoff_hz=params.cutoff_hz, fit_fundamental=params.fit_fundamental)
        fs = ts.sample_rate_hz
        T = dec.total_array()
        S = dec.stochastic_array()
        rms_total = np.sqrt(np.mean(T**2, axis=1))
        rms_stoc = np.sqrt(np.mean(S**2, axis=1))
        snrs = [snr(dec.command, t) for t in dec.total]
        try:
            ratio = dsr(dec)
        except DegenerateStatisticError as exc:
            sink.append(f"[{ts.label}] {exc}")
            ratio = math.nan
        curve = averaging_curve(dec, mode=params.averaging_mode, seed=params.seed) if len(ts) >= 3 else None

        centers, amp_total = binned_amplitudes(T, fs, params.f_max_hz, params.bin_width_hz)
        _, amp_stoc = binned_amplitudes(S, fs, params.f_max_hz, params.bin_width_hz)
        _, amp_det = binned_amplitudes(dec.deterministic.samples, fs, params.f_max_hz, params.bin_width_hz)
    _record_warnings(caught, ts.label, sink)
    if centers_ref is not None and not np.array_equal(centers, centers_ref):
        raise SimNoiseError(f"[{ts.label}] spectrum bins differ from other trial sets")

    snr_arr = np.asarray(snrs)
    finite = snr_arr[np.isfinite(snr_arr)]
    entry = {
        "n_trials": len(ts),
        "n_samples": ts.n_samples,
        "sample_rate_hz": fs,
        "fit_fundamental": dec.fit_fundamental,
        "rms_total": _nums(rms_total),
        "rms_total_mean": _num(rms_total.mean()),
        "rms_total_std": _num(rms_total.std(ddof=1)) if len(ts) > 1 else None,
        "rms_stochastic": _nums(rms_stoc),
        "rms_stochastic_mean": _num(rms_stoc.mean()),
        "rms_deterministic": _num(rms(dec.deterministic)),
        "rms_stochastic_pooled": _num(rms_pooled(dec.stochastic)),
        "dsr": _num(ratio),
        "snr": _nums(snr_arr),
        "snr_mean": _num(finite.mean()) if finite.size == snr_arr.size else None,
        "snr_std": _num(finite.std(ddof=1)) if finite.size == snr_arr.size and finite.size > 1 else None,
        "averaging_curve": None if curve is None else {
            "n": [int(n) for n in curve.n_values],
            "residual_rms": _nums(curve.residual_rms),
            "pearson_r": _num(curve.pearson_r),
            "mode": curve.mode,
        },
        "spectra": {
            "total_mean": _nums(amp_total.mean(axis=0)),
            "total_std": _nums(amp_total.std(axis=0, ddof=1)),
            "stochastic_mean": _nums(amp_stoc.mean(axis=0)),
            "stochastic_std": _nums(amp_stoc.std(axis=0, ddof=1)),
            "deterministic": _nums(amp_det[0]),
        },
    }
    per_kind = {
        "total": {"rms": rms_total, "spectra": amp_total},
        "stochastic": {"rms": rms_stoc, "spectra": amp_stoc},
    }
    return entry, per_kind, centers


def _anova_dict(res):
    return {
        "degenerate": res.degenerate,
        "interaction_pooled": res.interaction_pooled,
        "total_ss": _num(res.total_ss),
        "rows": [
            {
                "effect": r.effect,
                "sum_of_squares": _num(r.sum_of_squares),
                "df": int(r.df),
                "mean_square": _num(r.mean_square),
                "F": _num(r.F),
                "p_value": _num(r.p_value),
            }
            for r in res.rows
        ],
    }


def _compare(ref_label, comp_label, ref, comp, centers, params, sink):
    out = {"reference": ref_label, "comparison": comp_label, "tests": []}
    for kind in NOISE_KINDS:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            t = t_test_unpaired(ref[kind]["rms"], comp[kind]["rms"], variant=params.t_test)
            out["tests"].append({
                "noise_kind": kind,
                "test": "rms_t_test",
                "statistic": _num(t.t_statistic),
                "df": [_num(t.degrees_of_freedom)],
                "p_value": _num(t.p_value),
                "significant": bool(t.p_value < params.alpha),
                "variant": t.variant,
                "degenerate": t.degenerate,
            })

            A, B = ref[kind]["spectra"], comp[kind]["spectra"]
            if A.shape[0] != B.shape[0]:
                sink.append(f"[{ref_label} vs {comp_label}] unequal trial counts; spectrum ANOVA skipped")
                continue
            # cells: frequency bin x profile, replicates are trials
            Y = np.stack([A.T, B.T], axis=1)
            table = FactorialTable.from_array(Y, list(centers), ["reference", "comparison"],
                                              factor_a="frequency", factor_b="profile")
            res = anova_two_way(table)
            prof = res["profile"]
            out["tests"].append({
                "noise_kind": kind,
                "test": "spectrum_anova",
                "statistic": _num(prof.F),
                "df": [int(prof.df), int(res["residual"].df)],
                "p_value": _num(prof.p_value),
                "significant": bool(prof.p_value is not None and prof.p_value < params.alpha),
                "degenerate": res.degenerate,
                "anova": _anova_dict(res),
            })
        _record_warnings(caught, f"{ref_label} vs {comp_label}", sink)
    return out


def _intensity_anova(manifest, set_labels, values, sink, name):
    """direction x intensity ANOVA over per-trial values of the given sets, if they form a full grid."""
    cells = {}
    for label in set_labels:
        e = manifest.entry(label)
        if e.direction is None or e.intensity is None:
            return {"skipped": f"{label} has no sinusoid direction/intensity"}
        key = (e.direction, float(e.intensity))
        if key in cells:
            return {"skipped": f"two sets share direction/intensity {key}"}
        cells[key] = values[label]
    dirs = sorted({k[0] for k in cells}, key=lambda d: ("up", "down").index(d))
    levels = sorted({k[1] for k in cells})
    if len(dirs) < 2 or len(levels) < 2:
        return {"skipped": "need at least two directions and two intensities"}
    if len(cells) != len(dirs) * len(levels):
        return {"skipped": "directions x intensities grid is incomplete"}
    if len({len(v) for v in cells.values()}) != 1:
        return {"skipped": "unequal trial counts"}
    if any(not np.all(np.isfinite(v)) for v in cells.values()):
        return {"skipped": "non-finite values"}
    table = FactorialTable(cells, "direction", "intensity", dirs, levels)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = anova_two_way(table)
    _record_warnings(caught, name, sink)
    return _anova_dict(res)


def run_analysis(manifest, progress=None):
    """Filter, decompose, measure and compare every trial set in ``manifest``."""
    params = manifest.parameters
    sink = []
    sets, per_kind, meta = {}, {}, {}
    centers = None
    for entry in manifest.trial_sets:
        ts = manifest.load_trialset(entry.label)
        try:
            sets[entry.label], per_kind[entry.label], centers = _set_metrics(ts, params, centers, sink)
        except SimNoiseError as exc:
            if not str(exc).startswith("["):
                exc.args = (f"[{entry.label}] {exc}",)
            raise
        sets[entry.label]["direction"] = entry.direction
        sets[entry.label]["intensity"] = entry.intensity
        if entry.synth is not None:
            meta[entry.label] = {"generator": GENERATOR_NAME, "seed": int(entry.synth.get("seed", 0))}
        if progress:
            progress(entry.label)
        logger.debug("analysed %s", entry.label)

    comparisons = [
        _compare(r, c, per_kind[r], per_kind[c], centers, params, sink) for r, c in manifest.comparisons
    ]

    refs = list(dict.fromkeys(r for r, _ in manifest.comparisons)) or [e.label for e in manifest.trial_sets]
    snr_vals = {lab: np.asarray([np.nan if v is None else v for v in sets[lab]["snr"]]) for lab in refs}
    rms_vals = {lab: per_kind[lab]["total"]["rms"] for lab in refs}
    data = {
        "report_version": REPORT_VERSION,
        "parameters": params.to_dict(),
        "bin_centers_hz": _nums(centers) if centers is not None else [],
        "trial_sets": sets,
        "synthetic_sources": meta,
        "comparisons": comparisons,
        "reference_sets": refs,
        "group_anovas": {
            "snr": _intensity_anova(manifest, refs, snr_vals, sink, "snr anova"),
            "rms_total": _intensity_anova(manifest, refs, rms_vals, sink, "rms anova"),
        },
        "warnings": sink,
    }
    return ComparisonReport(data)


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
    return buf.getvalue()


def csv_tables(report):
    """Per-figure columnar tables, keyed by file name."""
    d = report.data
    sets = d["trial_sets"]
    tables = {}

    tables["comparisons.csv"] = _csv_text(
        ["reference", "comparison", "noise_kind", "test", "statistic", "df1", "df2", "p_value", "significant"],
        [
            [c["reference"], c["comparison"], t["noise_kind"], t["test"], t["statistic"],
             t["df"][0], t["df"][1] if len(t["df"]) > 1 else None, t["p_value"], int(t["significant"])]
            for c in d["comparisons"] for t in c["tests"]
        ],
    )

    def p_of(c, kind, test):
        for t in c["tests"]:
            if t["noise_kind"] == kind and t["test"] == test:
                return t["p_value"]
        return None

    tables["table1.csv"] = _csv_text(
        ["reference", "comparison", "direction", "rms_total_p", "rms_stochastic_p",
         "spectrum_total_p", "spectrum_stochastic_p"],
        [
            [c["reference"], c["comparison"], sets[c["reference"]]["direction"],
             p_of(c, "total", "rms_t_test"), p_of(c, "stochastic", "rms_t_test"),
             p_of(c, "total", "spectrum_anova"), p_of(c, "stochastic", "spectrum_anova")]
            for c in d["comparisons"]
        ],
    )

    tables["set_metrics.csv"] = _csv_text(
        ["label", "direction", "intensity", "n_trials", "rms_total_mean", "rms_total_std",
         "rms_stochastic_mean", "rms_deterministic", "rms_stochastic_pooled", "dsr", "snr_mean",
         "snr_std", "averaging_r"],
        [
            [lab, s["direction"], s["intensity"], s["n_trials"], s["rms_total_mean"], s["rms_total_std"],
             s["rms_stochastic_mean"], s["rms_deterministic"], s["rms_stochastic_pooled"], s["dsr"],
             s["snr_mean"], s["snr_std"],
             s["averaging_curve"]["pearson_r"] if s["averaging_curve"] else None]
            for lab, s in sets.items()
        ],
    )

    refs = [lab for lab in d["reference_sets"]]
    tables["snr_vs_intensity.csv"] = _csv_text(
        ["direction", "intensity", "label", "snr_mean", "snr_std"],
        [[sets[l]["direction"], sets[l]["intensity"], l, sets[l]["snr_mean"], sets[l]["snr_std"]] for l in refs],
    )
    tables["rms_dsr_vs_intensity.csv"] = _csv_text(
        ["direction", "intensity", "label", "rms_deterministic", "rms_stochastic_pooled", "dsr"],
        [[sets[l]["direction"], sets[l]["intensity"], l, sets[l]["rms_deterministic"],
          sets[l]["rms_stochastic_pooled"], sets[l]["dsr"]] for l in refs],
    )

    centers = d["bin_centers_hz"]
    rows = []
    for lab, s in sets.items():
        sp = s["spectra"]
        for i, f in enumerate(centers):
            rows.append([lab, "total", f, sp["total_mean"][i], sp["total_std"][i]])
            rows.append([lab, "stochastic", f, sp["stochastic_mean"][i], sp["stochastic_std"][i]])
            rows.append([lab, "deterministic", f, sp["deterministic"][i], None])
    tables["spectra.csv"] = _csv_text(["label", "component", "frequency_hz", "mean_amplitude", "std_amplitude"], rows)

    rows = []
    for lab, s in sets.items():
        ac = s["averaging_curve"]
        if ac:
            for n, r in zip(ac["n"], ac["residual_rms"]):
                rows.append([lab, n, r, 1.0 / math.sqrt(n)])
    tables["averaging_curves.csv"] = _csv_text(["label", "n", "residual_rms", "inv_sqrt_n"], rows)
    return tables


def export_report(report, out_dir, fmt="both"):
    """Write ``report.json`` and/or the csv tables into ``out_dir``; returns the written paths."""
    if fmt not in ("json", "csv", "both"):
        raise ValueError(f"format must be 'json', 'csv' or 'both', got {fmt!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {}
    if fmt in ("json", "both"):
        files["report.json"] = report.to_json()
    if fmt in ("csv", "both"):
        files.update(csv_tables(report))
    written = []
    for name, text in sorted(files.items()):
        path = out_dir / name
        atomic_write_text(path, text)
        written.append(path)
    return written
