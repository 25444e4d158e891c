"""scikit-learn compatible wrappers.

Inputs are arrays of shape (n_trials, n_samples), one row per time-locked
repetition, sampled at ``sample_rate_hz``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_trials_array
from .exceptions import AlignmentError, InsufficientRepetitionsError
from .metrics import DEFAULT_BIN_WIDTH_HZ, DEFAULT_F_MAX_HZ, binned_amplitudes
from .signal_model import (
    DEFAULT_CUTOFF_HZ,
    DEFAULT_SAMPLE_RATE_HZ,
    CommandSpec,
    Sampled,
    Signal,
    TrialSet,
    decompose,
    filter_rows,
    fitted_fundamental,
    render_command,
)


class LowPassFilter(BaseEstimator, TransformerMixin):
    """Zero-phase Butterworth low-pass applied to each row. Stateless."""

    def __init__(self, cutoff_hz=DEFAULT_CUTOFF_HZ, sample_rate_hz=DEFAULT_SAMPLE_RATE_HZ):
        self.cutoff_hz = cutoff_hz
        self.sample_rate_hz = sample_rate_hz

    def fit(self, X, y=None):
        check_trials_array(X)
        self.n_features_in_ = np.asarray(X).shape[-1]
        return self

    def transform(self, X):
        X = check_trials_array(X)
        return filter_rows(X, self.cutoff_hz, self.sample_rate_hz)


class NoiseDecomposer(BaseEstimator, TransformerMixin):
    """Learns the deterministic noise of a set of repetitions.

    ``fit(X, command)`` takes the repeated recordings and the command, either
    a CommandSpec or a 1-D array of the same length as the rows of ``X``.
    After fitting, ``deterministic_`` is the trial-averaged total noise and
    ``transform`` returns stochastic noise: filtered rows minus the command
    minus ``deterministic_``.
    """

    def __init__(self, cutoff_hz=DEFAULT_CUTOFF_HZ, sample_rate_hz=DEFAULT_SAMPLE_RATE_HZ, fit_fundamental=False):
        self.cutoff_hz = cutoff_hz
        self.sample_rate_hz = sample_rate_hz
        self.fit_fundamental = fit_fundamental

    def _command(self, command, n_samples):
        if isinstance(command, CommandSpec):
            return render_command(command, self.sample_rate_hz, n_samples)
        sig = Signal(np.asarray(command, dtype=float).ravel(), self.sample_rate_hz)
        if len(sig) != n_samples:
            raise AlignmentError(f"command has {len(sig)} samples, trials have {n_samples}")
        return sig

    def fit(self, X, command):
        X = check_trials_array(X)
        if X.shape[0] < 2:
            raise InsufficientRepetitionsError("NoiseDecomposer needs at least 2 trials")
        spec = command if isinstance(command, CommandSpec) else CommandSpec(Sampled(self._command(command, X.shape[1])))
        ts = TrialSet.from_array(spec, X, self.sample_rate_hz)
        dec = decompose(ts, cutoff_hz=self.cutoff_hz, fit_fundamental=self.fit_fundamental)
        self.decomposition_ = dec
        self.command_ = dec.command.samples
        # what gets subtracted: the command after the same filter as the trials
        self.reference_ = (self.command_ if self.cutoff_hz is None
                           else filter_rows(self.command_, self.cutoff_hz, self.sample_rate_hz))
        self.deterministic_ = dec.deterministic.samples
        self.frequency_hz_ = spec.waveform.frequency_hz if self.fit_fundamental else None
        self.n_trials_ = X.shape[0]
        self.n_features_in_ = X.shape[1]
        return self

    def total_noise(self, X):
        check_is_fitted(self, "deterministic_")
        X = check_trials_array(X)
        if X.shape[1] != self.n_features_in_:
            raise AlignmentError(f"expected {self.n_features_in_} samples per trial, got {X.shape[1]}")
        if self.cutoff_hz is not None:
            X = filter_rows(X, self.cutoff_hz, self.sample_rate_hz)
        if self.fit_fundamental:
            fits = [fitted_fundamental(Signal(row, self.sample_rate_hz), self.frequency_hz_).samples for row in X]
            return X - np.vstack(fits)
        return X - self.reference_

    def transform(self, X):
        return self.total_noise(X) - self.deterministic_

    def fit_transform(self, X, command=None, **fit_params):
        # returns exactly the stochastic traces computed during fit
        self.fit(X, command)
        return self.decomposition_.stochastic_array()


class AmplitudeSpectrum(BaseEstimator, TransformerMixin):
    """Binned one-sided amplitude spectrum of each row."""

    def __init__(self, sample_rate_hz=DEFAULT_SAMPLE_RATE_HZ, f_max_hz=DEFAULT_F_MAX_HZ,
                 bin_width_hz=DEFAULT_BIN_WIDTH_HZ):
        self.sample_rate_hz = sample_rate_hz
        self.f_max_hz = f_max_hz
        self.bin_width_hz = bin_width_hz

    def fit(self, X, y=None):
        X = check_trials_array(X)
        self.bin_centers_hz_, _ = binned_amplitudes(X[:1], self.sample_rate_hz, self.f_max_hz, self.bin_width_hz)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "bin_centers_hz_")
        X = check_trials_array(X)
        if X.shape[1] != self.n_features_in_:
            raise AlignmentError(f"expected {self.n_features_in_} samples per trial, got {X.shape[1]}")
        _, amps = binned_amplitudes(X, self.sample_rate_hz, self.f_max_hz, self.bin_width_hz)
        return amps
