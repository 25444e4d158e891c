"""Noise metrics: rms, SNR, DSR, binned amplitude spectra and the trial-averaging curve."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._validation import check_aligned, check_positive
from .exceptions import (
    DegenerateStatisticError,
    DegenerateStatisticWarning,
    InsufficientRepetitionsError,
    ParameterError,
)
from .stats import pearson_r

DEFAULT_F_MAX_HZ = 80.0
DEFAULT_BIN_WIDTH_HZ = 1.0


def _values(x):
    arr = np.asarray(x, dtype=float)
    if arr.size == 0:
        raise ParameterError("rms of an empty signal is undefined")
    return arr


def rms(signal):
    """Quadratic mean ``sqrt(mean(x**2))`` over all samples."""
    x = _values(signal)
    return float(np.sqrt(np.mean(x * x)))


def rms_pooled(signals):
    """rms over every sample of every signal, as if concatenated."""
    signals = list(signals)
    if not signals:
        raise ParameterError("no signals to pool")
    total = sum(float(np.sum(_values(s) ** 2)) for s in signals)
    count = sum(np.asarray(s).size for s in signals)
    return math.sqrt(total / count)


def snr(command, total_noise):
    """``(rms(command) / rms(total_noise))**2``; inf with a warning when the noise is all zero."""
    num = rms(command)
    den = rms(total_noise)
    if den == 0.0:
        warnings.warn("total noise rms is zero; SNR is infinite", DegenerateStatisticWarning, stacklevel=2)
        return math.inf
    return (num / den) ** 2


def dsr(decomposition, pooling="pooled"):
    """Deterministic-to-stochastic rms ratio.

    ``pooling="pooled"`` uses one rms over all stochastic samples of all
    trials; ``"mean"`` averages the per-trial stochastic rms values instead.
    """
    det = rms(decomposition.deterministic)
    if pooling == "pooled":
        stoc = rms_pooled(decomposition.stochastic)
    elif pooling == "mean":
        stoc = float(np.mean([rms(s) for s in decomposition.stochastic]))
    else:
        raise ParameterError(f"pooling must be 'pooled' or 'mean', got {pooling!r}")
    if stoc == 0.0:
        raise DegenerateStatisticError("stochastic noise rms is zero (all trials identical); DSR undefined")
    return det / stoc


@dataclass(frozen=True, eq=False)
class SpectrumBins:
    bin_centers_hz: np.ndarray
    amplitudes: np.ndarray
    bin_width_hz: float

    def __len__(self):
        return self.bin_centers_hz.shape[0]

    def amplitude_at(self, freq_hz):
        idx = int(np.argmin(np.abs(self.bin_centers_hz - freq_hz)))
        return float(self.amplitudes[idx])


def one_sided_amplitudes(X, sample_rate_hz):
    """Unbinned one-sided amplitude spectrum along the last axis.

    Scaled 2/N, except 1/N at DC and (for even N) Nyquist, so a sinusoid of
    amplitude A on a DFT line reads A. No window is applied.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[-1]
    amp = np.abs(np.fft.rfft(X, axis=-1)) / n
    if n % 2 == 0:
        amp[..., 1:-1] *= 2.0
    else:
        amp[..., 1:] *= 2.0
    return np.fft.rfftfreq(n, 1.0 / sample_rate_hz), amp


def two_sided_power(signal):
    """``|DFT|**2 / N**2`` for every line; sums to ``rms(signal)**2``."""
    x = _values(signal)
    return np.abs(np.fft.fft(x)) ** 2 / x.size**2


def _bin_layout(sample_rate_hz, n_samples, f_max_hz, bin_width_hz):
    check_positive(bin_width_hz, "bin_width_hz")
    if not (f_max_hz >= 0 and math.isfinite(f_max_hz)):
        raise ParameterError(f"f_max_hz must be >= 0, got {f_max_hz}")
    nyquist = sample_rate_hz / 2.0
    if f_max_hz > nyquist * (1 + 1e-12):
        raise ParameterError(f"f_max_hz={f_max_hz} exceeds Nyquist ({nyquist} Hz)")
    n_bins = int(math.floor(f_max_hz / bin_width_hz + 1e-9)) + 1
    centers = np.arange(n_bins) * bin_width_hz
    freqs = np.fft.rfftfreq(n_samples, 1.0 / sample_rate_hz)
    owner = np.floor(freqs / bin_width_hz + 0.5).astype(int)
    return centers, freqs, owner


def binned_amplitudes(X, sample_rate_hz, f_max_hz=DEFAULT_F_MAX_HZ, bin_width_hz=DEFAULT_BIN_WIDTH_HZ):
    """Bin centers and binned amplitudes for each row of ``X``.

    Each DFT line goes to the bin whose center is nearest; a bin holding
    several lines reports their mean. A bin holding none (native resolution
    coarser than the bin width) takes the nearest line.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    centers, freqs, owner = _bin_layout(sample_rate_hz, X.shape[-1], f_max_hz, bin_width_hz)
    _, amp = one_sided_amplitudes(X, sample_rate_hz)
    n_bins = centers.size
    keep = owner < n_bins
    counts = np.bincount(owner[keep], minlength=n_bins)
    sums = np.zeros((X.shape[0], n_bins))
    np.add.at(sums.T, owner[keep], amp[:, keep].T)
    out = np.empty_like(sums)
    filled = counts > 0
    out[:, filled] = sums[:, filled] / counts[filled]
    if not filled.all():
        nearest = np.abs(freqs[np.newaxis, :] - centers[~filled, np.newaxis]).argmin(axis=1)
        out[:, ~filled] = amp[:, nearest]
    return centers, out


def amplitude_spectrum(noise, f_max_hz=DEFAULT_F_MAX_HZ, bin_width_hz=DEFAULT_BIN_WIDTH_HZ):
    centers, amps = binned_amplitudes(_values(noise), noise.sample_rate_hz, f_max_hz, bin_width_hz)
    return SpectrumBins(centers, amps[0], float(bin_width_hz))


def spectrum_set(signals, f_max_hz=DEFAULT_F_MAX_HZ, bin_width_hz=DEFAULT_BIN_WIDTH_HZ):
    """amplitude_spectrum applied to each signal, in input order."""
    signals = list(signals)
    if not signals:
        return []
    check_aligned(signals)
    X = np.vstack([s.samples for s in signals])
    centers, amps = binned_amplitudes(X, signals[0].sample_rate_hz, f_max_hz, bin_width_hz)
    return [SpectrumBins(centers, row, float(bin_width_hz)) for row in amps]


@dataclass(frozen=True, eq=False)
class AveragingCurve:
    n_values: np.ndarray
    residual_rms: np.ndarray
    pearson_r: float
    mode: str = "prefix"

    @property
    def r_defined(self):
        return not math.isnan(self.pearson_r)


def averaging_curve(decomposition, mode="prefix", seed=None):
    """rms of the n-trial averaged noise residual for n = 1..N, and its correlation with 1/sqrt(n).

    For each n the first n total-noise traces (``mode="prefix"``) or a random
    n-subset (``mode="random"``, seeded) are averaged and the full-N
    deterministic estimate is subtracted. ``pearson_r`` is NaN when every
    residual is zero.
    """
    T = decomposition.total_array()
    N = T.shape[0]
    if N < 3:
        raise InsufficientRepetitionsError(f"averaging curve needs at least 3 trials, got {N}")
    det = decomposition.deterministic.samples
    n_values = np.arange(1, N + 1)
    if mode == "prefix":
        means = np.cumsum(T, axis=0) / n_values[:, None]
    elif mode == "random":
        rng = np.random.default_rng(seed)
        means = np.vstack([T[rng.choice(N, size=n, replace=False)].mean(axis=0) for n in n_values])
    else:
        raise ParameterError(f"mode must be 'prefix' or 'random', got {mode!r}")
    resid = np.sqrt(np.mean((means - det) ** 2, axis=1))

    floor = 1e-12 + 1e-9 * float(np.sqrt(np.mean(T * T)))
    if resid.max() <= floor:
        warnings.warn("no stochastic component; averaging-curve correlation undefined",
                      DegenerateStatisticWarning, stacklevel=2)
        r = math.nan
    else:
        r = pearson_r(resid, 1.0 / np.sqrt(n_values))
    return AveragingCurve(n_values, resid, r, mode)
