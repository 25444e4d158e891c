"""Analysis manifest: trial sets, reference/comparison pairs and parameters.

The manifest is a JSON document::

    {
      "parameters": {"cutoff_hz": 80, "f_max_hz": 80, "bin_width_hz": 1,
                     "alpha": 0.05, "t_test": "pooled", ...},
      "trial_sets": [
        {"label": "up_0.3_ref",
         "command": {"type": "sinusoid", "frequency_hz": 1,
                     "peak_amplitude": 0.3, "direction": "up", "duration_s": 1},
         "traces": ["up_0.3_ref/trial_00.csv", ...]},
        {"label": "...", "command": {"type": "trace", "path": "cmd.csv"},
         "synth": {"stochastic_sigma": 0.01, "n_trials": 20, "seed": 3,
                   "deterministic_terms": [{"frequency_hz": 4, "amplitude": 0.02}]}}
      ],
      "comparisons": [{"reference": "up_0.3_ref", "comparison": "up_0.3_lower"}]
    }

Relative paths resolve against the manifest's directory. A trial set gives
either ``traces`` or ``synth``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .exceptions import ManifestError, SimNoiseError
from .signal_model import CommandSpec, Sampled, Sinusoid, TrialSet
from .stats import DEFAULT_ALPHA
from .synth import DeterministicTerm, SynthSpec, generate_trialset
from .traces import load_traces

# reference peak amplitudes and their discrimination thresholds, m/s^2
REFERENCE_AMPLITUDES = (0.07, 0.3, 1.1, 1.6, 2.0)
DISCRIMINATION_THRESHOLDS = (0.02, 0.09, 0.21, 0.23, 0.25)
THRESHOLD_MULTIPLE = 2


@dataclass
class AnalysisParameters:
    cutoff_hz: float | None = 80.0
    f_max_hz: float = 80.0
    bin_width_hz: float = 1.0
    alpha: float = DEFAULT_ALPHA
    t_test: str = "pooled"
    fit_fundamental: bool = False
    sample_rate_hz: float = 500.0
    averaging_mode: str = "prefix"
    seed: int = 0

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ManifestError(f"unknown analysis parameters: {sorted(unknown)}")
        params = cls(**d)
        params.validate()
        return params

    def validate(self):
        if self.t_test not in ("pooled", "welch"):
            raise ManifestError(f"t_test must be 'pooled' or 'welch', got {self.t_test!r}")
        if not 0 < self.alpha < 1:
            raise ManifestError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.averaging_mode not in ("prefix", "random"):
            raise ManifestError(f"averaging_mode must be 'prefix' or 'random', got {self.averaging_mode!r}")

    def override(self, **kwargs):
        new = replace(self, **{k: v for k, v in kwargs.items() if v is not None})
        new.validate()
        return new

    def to_dict(self):
        return asdict(self)


@dataclass
class TrialSetEntry:
    label: str
    command: dict
    traces: list = field(default_factory=list)
    synth: dict | None = None

    def command_spec(self, base_dir, sample_rate_hz):
        cmd = dict(self.command)
        kind = cmd.pop("type", "sinusoid")
        try:
            if kind == "sinusoid":
                return CommandSpec(Sinusoid(**cmd), self.label)
            if kind == "trace":
                sig = load_traces(_resolve(base_dir, cmd["path"]), sample_rate_hz=cmd.get("sample_rate_hz"))
                return CommandSpec(Sampled(sig), self.label)
        except (TypeError, KeyError) as exc:
            raise ManifestError(f"trial set {self.label!r}: bad command {self.command!r} ({exc})") from None
        raise ManifestError(f"trial set {self.label!r}: unknown command type {kind!r}")

    @property
    def direction(self):
        return self.command.get("direction") if self.command.get("type", "sinusoid") == "sinusoid" else None

    @property
    def intensity(self):
        return self.command.get("peak_amplitude") if self.command.get("type", "sinusoid") == "sinusoid" else None

    def to_dict(self):
        d = {"label": self.label, "command": self.command}
        if self.traces:
            d["traces"] = [str(p) for p in self.traces]
        if self.synth is not None:
            d["synth"] = self.synth
        return d


@dataclass
class Manifest:
    trial_sets: list
    comparisons: list = field(default_factory=list)
    parameters: AnalysisParameters = field(default_factory=AnalysisParameters)
    base_dir: Path = field(default_factory=Path.cwd)

    def __post_init__(self):
        labels = [ts.label for ts in self.trial_sets]
        dupes = sorted({x for x in labels if labels.count(x) > 1})
        if dupes:
            raise ManifestError(f"duplicate trial-set labels: {dupes}")
        known = set(labels)
        for ref, comp in self.comparisons:
            for lab in (ref, comp):
                if lab not in known:
                    raise ManifestError(f"comparison references unknown trial set {lab!r}")
        for ts in self.trial_sets:
            if bool(ts.traces) == (ts.synth is not None):
                raise ManifestError(f"trial set {ts.label!r} needs exactly one of 'traces' or 'synth'")

    def entry(self, label):
        for ts in self.trial_sets:
            if ts.label == label:
                return ts
        raise KeyError(label)

    @classmethod
    def from_dict(cls, d, base_dir="."):
        try:
            sets = [
                TrialSetEntry(e["label"], e.get("command", {}), list(e.get("traces", [])), e.get("synth"))
                for e in d.get("trial_sets", [])
            ]
            comps = [(c["reference"], c["comparison"]) for c in d.get("comparisons", [])]
        except (KeyError, TypeError) as exc:
            raise ManifestError(f"malformed manifest: {exc}") from None
        params = AnalysisParameters.from_dict(d.get("parameters", {}))
        return cls(sets, comps, params, Path(base_dir))

    def to_dict(self):
        return {
            "parameters": self.parameters.to_dict(),
            "trial_sets": [ts.to_dict() for ts in self.trial_sets],
            "comparisons": [{"reference": r, "comparison": c} for r, c in self.comparisons],
        }

    def load_trialset(self, label):
        """Materialize one trial set from its trace files or synth block."""
        entry = self.entry(label)
        fs = self.parameters.sample_rate_hz
        try:
            command = entry.command_spec(self.base_dir, fs)
            if entry.synth is not None:
                s = dict(entry.synth)
                terms = [DeterministicTerm(**t) for t in s.pop("deterministic_terms", [])]
                s.setdefault("sample_rate_hz", fs)
                if isinstance(command.waveform, Sinusoid):
                    s.setdefault("duration_s", command.waveform.duration_s)
                spec = SynthSpec(command=command, deterministic_terms=terms, **s)
                return generate_trialset(spec, label=label)
            trials = [load_traces(_resolve(self.base_dir, p), sample_rate_hz=fs) for p in entry.traces]
            return TrialSet(command, trials, label)
        except SimNoiseError as exc:
            exc.args = (f"[{label}] {exc}",)
            raise
        except TypeError as exc:
            raise ManifestError(f"[{label}] bad synth block: {exc}") from None


def _resolve(base_dir, p):
    p = Path(p)
    return p if p.is_absolute() else Path(base_dir) / p


def load_manifest(path):
    path = Path(path)
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: invalid JSON ({exc})") from None
    return Manifest.from_dict(data, base_dir=path.parent)


def reference_design_manifest(n_trials=20, seed=0):
    """The 10 references x {lower, higher} comparison design, backed by synthetic data.

    Comparisons sit two discrimination thresholds below and above each
    reference. The synthetic noise model is illustrative only: a 4 Hz
    deterministic term growing with amplitude (larger for upward motion), a
    small fixed 42 Hz term, and white noise of constant sigma.
    """
    trial_sets, comparisons = [], []
    idx = 0
    for direction in ("up", "down"):
        gain = 0.03 if direction == "up" else 0.02
        for ref, thr in zip(REFERENCE_AMPLITUDES, DISCRIMINATION_THRESHOLDS):
            step = THRESHOLD_MULTIPLE * thr
            ref_label = f"{direction}_{ref:g}_ref"
            for role, amp in (("ref", ref), ("lower", ref - step), ("higher", ref + step)):
                amp = round(amp, 6)
                label = f"{direction}_{ref:g}_{role}"
                trial_sets.append({
                    "label": label,
                    "command": {"type": "sinusoid", "frequency_hz": 1.0, "peak_amplitude": amp,
                                "direction": direction, "duration_s": 1.0},
                    "synth": {
                        "stochastic_sigma": 0.01,
                        "n_trials": n_trials,
                        "seed": seed + idx,
                        "deterministic_terms": [
                            {"frequency_hz": 4.0, "amplitude": round(0.002 + gain * amp, 6), "phase": 0.0},
                            {"frequency_hz": 42.0, "amplitude": 0.002, "phase": 0.0},
                        ],
                    },
                })
                idx += 1
                if role != "ref":
                    comparisons.append({"reference": ref_label, "comparison": label})
    return {"parameters": AnalysisParameters().to_dict(), "trial_sets": trial_sets, "comparisons": comparisons}
