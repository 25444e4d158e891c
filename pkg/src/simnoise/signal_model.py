"""Signal containers, command rendering, zero-phase filtering and noise decomposition.

Trials are assumed time-locked by sample index; nothing here realigns them.
Sign convention: an ``up`` command has positive acceleration peaks, ``down``
the same waveform negated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy import signal as sps

from ._validation import as_samples, check_aligned, check_count, check_nonnegative, check_positive
from .exceptions import AlignmentError, InsufficientRepetitionsError, ParameterError

DEFAULT_SAMPLE_RATE_HZ = 500.0
DEFAULT_CUTOFF_HZ = 80.0
FILTER_ORDER = 4

DIRECTIONS = ("up", "down")


@dataclass(frozen=True, eq=False)
class Signal:
    """A uniformly sampled acceleration trace in m/s^2."""

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        object.__setattr__(self, "samples", as_samples(self.samples))
        object.__setattr__(self, "sample_rate_hz", check_positive(self.sample_rate_hz, "sample_rate_hz"))

    def __len__(self):
        return self.samples.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.samples, dtype=dtype)

    @property
    def duration_s(self):
        return len(self) / self.sample_rate_hz

    def times(self):
        return np.arange(len(self)) / self.sample_rate_hz

    def with_samples(self, samples):
        return Signal(samples, self.sample_rate_hz)

    def equals(self, other, atol=0.0):
        return (
            isinstance(other, Signal)
            and len(self) == len(other)
            and self.sample_rate_hz == other.sample_rate_hz
            and bool(np.allclose(self.samples, other.samples, rtol=0.0, atol=atol))
        )


@dataclass(frozen=True)
class Sinusoid:
    frequency_hz: float = 1.0
    peak_amplitude: float = 1.0
    direction: str = "up"
    duration_s: float = 1.0

    def __post_init__(self):
        check_positive(self.frequency_hz, "frequency_hz")
        check_nonnegative(self.peak_amplitude, "peak_amplitude")
        check_positive(self.duration_s, "duration_s")
        if self.direction not in DIRECTIONS:
            raise ParameterError(f"direction must be one of {DIRECTIONS}, got {self.direction!r}")

    @property
    def sign(self):
        return 1.0 if self.direction == "up" else -1.0


@dataclass(frozen=True, eq=False)
class Sampled:
    signal: Signal


@dataclass(frozen=True, eq=False)
class CommandSpec:
    waveform: Union[Sinusoid, Sampled]
    label: str = ""

    def __post_init__(self):
        if not isinstance(self.waveform, (Sinusoid, Sampled)):
            raise ParameterError(f"waveform must be Sinusoid or Sampled, got {type(self.waveform).__name__}")


@dataclass(frozen=True, eq=False)
class TrialSet:
    """Repeated recordings of one commanded trajectory."""

    command: CommandSpec
    trials: Sequence[Signal]
    label: str = ""

    def __post_init__(self):
        trials = tuple(self.trials)
        if not trials:
            raise InsufficientRepetitionsError("a trial set needs at least one trial")
        check_aligned(trials, what=f"trial set {self.label!r}")
        object.__setattr__(self, "trials", trials)

    def __len__(self):
        return len(self.trials)

    @property
    def sample_rate_hz(self):
        return self.trials[0].sample_rate_hz

    @property
    def n_samples(self):
        return len(self.trials[0])

    def as_array(self):
        return np.vstack([t.samples for t in self.trials])

    @classmethod
    def from_array(cls, command, X, sample_rate_hz, label=""):
        return cls(command, [Signal(row, sample_rate_hz) for row in np.atleast_2d(X)], label)


@dataclass(frozen=True, eq=False)
class NoiseDecomposition:
    """Per-trial total noise split into a shared deterministic part and per-trial residuals.

    ``command`` is the nominal rendered command. ``fitted_commands`` is set
    only when the fundamental was least-squares fitted before subtraction.
    """

    total: Sequence[Signal]
    deterministic: Signal
    stochastic: Sequence[Signal]
    command: Signal | None = None
    fitted_commands: Sequence[Signal] | None = None
    cutoff_hz: float | None = None
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "total", tuple(self.total))
        object.__setattr__(self, "stochastic", tuple(self.stochastic))
        if len(self.total) != len(self.stochastic):
            raise AlignmentError("total and stochastic must have one entry per trial")
        check_aligned((self.deterministic, *self.total, *self.stochastic), what="decomposition")

    @property
    def n_trials(self):
        return len(self.total)

    @property
    def fit_fundamental(self):
        return self.fitted_commands is not None

    def total_array(self):
        return np.vstack([s.samples for s in self.total])

    def stochastic_array(self):
        return np.vstack([s.samples for s in self.stochastic])


def render_command(spec, sample_rate_hz=DEFAULT_SAMPLE_RATE_HZ, n_samples=None):
    """Realize a command as a sampled trace.

    For a sinusoid, ``a[k] = s * A * sin(2 pi f k / Fs)`` with ``s = +1`` for up
    and ``-1`` for down. ``n_samples`` defaults to ``round(duration_s * Fs)``.
    Sampled commands are returned unchanged after checking rate and length.
    """
    fs = check_positive(sample_rate_hz, "sample_rate_hz")
    wf = spec.waveform if isinstance(spec, CommandSpec) else spec
    if isinstance(wf, Sampled):
        sig = wf.signal
        if sig.sample_rate_hz != fs:
            raise AlignmentError(f"sampled command is at {sig.sample_rate_hz} Hz, expected {fs} Hz")
        if n_samples is not None and len(sig) != n_samples:
            raise AlignmentError(f"sampled command has {len(sig)} samples, expected {n_samples}")
        return sig
    if not isinstance(wf, Sinusoid):
        raise ParameterError(f"cannot render {type(wf).__name__}")
    if n_samples is None:
        n_samples = int(round(wf.duration_s * fs))
    n_samples = check_count(n_samples, "n_samples")
    k = np.arange(n_samples)
    return Signal(wf.sign * wf.peak_amplitude * np.sin(2 * np.pi * wf.frequency_hz * k / fs), fs)


def _butter(cutoff_hz, sample_rate_hz, order=FILTER_ORDER):
    cutoff_hz = check_positive(cutoff_hz, "cutoff_hz")
    nyquist = sample_rate_hz / 2.0
    if cutoff_hz >= nyquist:
        raise ParameterError(f"cutoff_hz={cutoff_hz} must be below Nyquist ({nyquist} Hz)")
    return sps.butter(order, cutoff_hz, btype="low", fs=sample_rate_hz)


def filter_rows(X, cutoff_hz, sample_rate_hz):
    """Zero-phase low-pass along the last axis of an array."""
    b, a = _butter(cutoff_hz, sample_rate_hz)
    padlen = 3 * max(len(a), len(b))
    if X.shape[-1] <= padlen:
        raise ParameterError(f"signal needs more than {padlen} samples for edge padding, got {X.shape[-1]}")
    return sps.filtfilt(b, a, X, axis=-1, padtype="odd", padlen=padlen)


def lowpass_filter(signal, cutoff_hz=DEFAULT_CUTOFF_HZ):
    """Zero-phase 4th-order Butterworth low-pass, applied forward then backward.

    Edges are extended by odd reflection over three filter lengths, so a
    constant trace passes unchanged.
    """
    return signal.with_samples(filter_rows(signal.samples, cutoff_hz, signal.sample_rate_hz))


def total_noise(trial, command):
    """Pointwise ``trial - command``."""
    check_aligned((trial, command), what="trial/command")
    return trial.with_samples(trial.samples - command.samples)


def fitted_fundamental(trial, frequency_hz):
    """Least-squares sinusoid at ``frequency_hz`` (free amplitude and phase) fitted to ``trial``."""
    t = trial.times()
    w = 2 * np.pi * frequency_hz * t
    basis = np.column_stack([np.sin(w), np.cos(w)])
    coef, *_ = np.linalg.lstsq(basis, trial.samples, rcond=None)
    return trial.with_samples(basis @ coef)


def decompose(trialset, cutoff_hz=DEFAULT_CUTOFF_HZ, fit_fundamental=False):
    """Split a trial set into total, deterministic and stochastic noise.

    Each trial is low-pass filtered (skipped when ``cutoff_hz`` is None) and
    the command, passed through the same filter, is subtracted to give its
    total noise. The deterministic
    component is the per-sample mean of total noise over trials, and each
    stochastic trace is that trial's total noise minus the deterministic
    component.

    With ``fit_fundamental`` the subtracted command is, per trial, a
    least-squares sinusoid at the command frequency instead of the nominal
    command. Only sinusoidal commands support it.
    """
    if len(trialset) < 2:
        raise InsufficientRepetitionsError(
            f"decomposition needs at least 2 trials, trial set {trialset.label!r} has {len(trialset)}"
        )
    fs = trialset.sample_rate_hz
    command = render_command(trialset.command, fs, trialset.n_samples)
    X = trialset.as_array()
    if cutoff_hz is not None:
        X = filter_rows(X, cutoff_hz, fs)

    fitted = None
    if fit_fundamental:
        wf = trialset.command.waveform
        if not isinstance(wf, Sinusoid):
            raise ParameterError("fundamental fitting requires a sinusoidal command")
        fitted = [fitted_fundamental(Signal(row, fs), wf.frequency_hz) for row in X]
        C = np.vstack([f.samples for f in fitted])
    else:
        # same filter on the command, so its edge transient cancels instead of leaking into the noise
        C = command.samples if cutoff_hz is None else filter_rows(command.samples, cutoff_hz, fs)
        C = C[np.newaxis, :]

    total = X - C
    det = total.mean(axis=0)
    stoch = total - det
    return NoiseDecomposition(
        total=[Signal(row, fs) for row in total],
        deterministic=Signal(det, fs),
        stochastic=[Signal(row, fs) for row in stoch],
        command=command,
        fitted_commands=fitted,
        cutoff_hz=cutoff_hz,
        label=trialset.label,
    )
