"""Input validation helpers shared by the functional core and the estimators."""

import math

import numpy as np

from .exceptions import AlignmentError, ParameterError


def as_samples(values, name="samples"):
    """Return ``values`` as a read-only 1-D float64 array, rejecting empty or non-finite input."""
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != 1:
        raise ParameterError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ParameterError(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} contains non-finite values")
    arr.flags.writeable = False
    return arr


def check_positive(value, name):
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise ParameterError(f"{name} must be a positive finite number, got {value!r}")
    return value


def check_nonnegative(value, name):
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise ParameterError(f"{name} must be a nonnegative finite number, got {value!r}")
    return value


def check_count(value, name, minimum=1):
    if isinstance(value, bool) or int(value) != value:
        raise ParameterError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ParameterError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_trials_array(X, name="X"):
    """Validate a (n_trials, n_samples) array of finite values."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2:
        raise ParameterError(f"{name} must be 2-D (n_trials, n_samples), got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ParameterError(f"{name} must be nonempty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} contains non-finite values")
    return arr


def check_aligned(signals, what="signals"):
    """Raise AlignmentError unless every signal shares length and sample rate."""
    signals = list(signals)
    if not signals:
        return
    first = signals[0]
    for i, sig in enumerate(signals[1:], start=1):
        if len(sig) != len(first):
            raise AlignmentError(
                f"{what}: element {i} has {len(sig)} samples, expected {len(first)}"
            )
        if sig.sample_rate_hz != first.sample_rate_hz:
            raise AlignmentError(
                f"{what}: element {i} sampled at {sig.sample_rate_hz} Hz, "
                f"expected {first.sample_rate_hz} Hz"
            )
