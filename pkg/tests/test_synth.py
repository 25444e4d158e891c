import math

import numpy as np
import pytest

from conftest import FS
from simnoise import (
    CommandSpec,
    ParameterError,
    Sinusoid,
    SynthSpec,
    amplitude_spectrum,
    decompose,
    generate_trialset,
    render_command,
)
from simnoise.metrics import rms, rms_pooled
from simnoise.synth import GENERATOR_NAME, deterministic_noise


def test_noiseless_trials_equal_command():
    spec = SynthSpec(command=CommandSpec(Sinusoid(1.0, 1.6, "down")), n_trials=4)
    ts = generate_trialset(spec)
    cmd = render_command(spec.command, FS, 500).samples
    for trial in ts.trials:
        np.testing.assert_array_equal(trial.samples, cmd)


def test_same_seed_is_bit_identical():
    spec = SynthSpec(deterministic_terms=[{"frequency_hz": 4.0, "amplitude": 0.05}], stochastic_sigma=0.02, seed=99)
    a, b = generate_trialset(spec).as_array(), generate_trialset(spec).as_array()
    assert a.tobytes() == b.tobytes()
    c = generate_trialset(SynthSpec(stochastic_sigma=0.02, seed=100)).as_array()
    assert not np.array_equal(a, c)


def test_pooled_sigma():
    # 10,000 samples: chi-square relative sd of s is ~1/sqrt(2*10^4) = 0.7%
    spec = SynthSpec(deterministic_terms=[{"frequency_hz": 4.0, "amplitude": 0.05}],
                     stochastic_sigma=0.02, n_trials=20, seed=3)
    ts = generate_trialset(spec)
    resid = ts.as_array() - render_command(spec.command, FS, 500).samples - deterministic_noise(spec).samples
    assert resid.std(ddof=1) == pytest.approx(0.02, rel=0.03)


def test_metadata_and_validation():
    assert SynthSpec(seed=7).metadata() == {"generator": GENERATOR_NAME, "seed": 7}
    with pytest.raises(ParameterError):
        SynthSpec(stochastic_sigma=-1.0)
    with pytest.raises(ParameterError):
        SynthSpec(n_trials=0)
    with pytest.raises(ParameterError):
        SynthSpec(seed=-1)
    with pytest.raises(ParameterError):
        SynthSpec(deterministic_terms=[{"frequency_hz": 4.0, "amplitude": -0.1}])


def test_recovery_invariant():
    sigma, n, amp = 0.02, 20, 0.05
    det, stoc = [], []
    for seed in range(300):
        spec = SynthSpec(deterministic_terms=[{"frequency_hz": 4.0, "amplitude": amp}],
                         stochastic_sigma=sigma, n_trials=n, seed=seed)
        dec = decompose(generate_trialset(spec), cutoff_hz=None)
        det.append(rms(dec.deterministic))
        stoc.append(rms_pooled(dec.stochastic))
    det = np.asarray(det)
    expected = math.sqrt(amp**2 / 2 + sigma**2 / n)
    assert abs(det.mean() - expected) <= 3 * det.std(ddof=1) / math.sqrt(det.size)
    assert np.mean(stoc) == pytest.approx(sigma * math.sqrt(1 - 1 / n), rel=0.03)


def test_recovered_spectrum_peaks_at_injected_bins():
    spec = SynthSpec(deterministic_terms=[{"frequency_hz": 4.0, "amplitude": 0.05},
                                          {"frequency_hz": 42.0, "amplitude": 0.02, "phase": 1.0}],
                     stochastic_sigma=0.02, seed=8)
    amps = amplitude_spectrum(decompose(generate_trialset(spec)).deterministic).amplitudes
    top2 = sorted(np.argsort(amps)[-2:])
    assert top2 == [4, 42]
