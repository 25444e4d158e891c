import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import FS, N, make_signal, sine
from simnoise import (
    DegenerateStatisticError,
    DegenerateStatisticWarning,
    InsufficientRepetitionsError,
    NoiseDecomposition,
    ParameterError,
    SynthSpec,
    amplitude_spectrum,
    averaging_curve,
    decompose,
    dsr,
    generate_trialset,
    rms,
    snr,
    spectrum_set,
)
from simnoise.metrics import binned_amplitudes, rms_pooled, two_sided_power

# magnitudes kept away from the subnormal range, where squaring underflows
finite = st.floats(-1e3, 1e3).filter(lambda v: v == 0 or abs(v) > 1e-100)


def decomposition_from(det, stoch, fs=FS):
    det = np.asarray(det, dtype=float)
    stoch = np.atleast_2d(np.asarray(stoch, dtype=float))
    return NoiseDecomposition(
        total=[make_signal(det + s, fs) for s in stoch],
        deterministic=make_signal(det, fs),
        stochastic=[make_signal(s, fs) for s in stoch],
    )


class TestRms:
    def test_zeros(self):
        assert rms(np.zeros(10)) == 0.0

    @pytest.mark.parametrize("c", [-2.5, 0.3, 7.0])
    def test_constant(self, c):
        assert rms(np.full(17, c)) == pytest.approx(abs(c), rel=1e-15)

    def test_three_four(self):
        assert rms([3.0, 4.0]) == pytest.approx(math.sqrt(12.5), abs=1e-12)
        assert rms([3.0, 4.0]) == pytest.approx(3.53553, abs=1e-5)

    @pytest.mark.parametrize("freq,amp", [(1.0, 2.0), (4.0, 0.05), (37.0, 1.3)])
    def test_integer_period_sinusoid(self, freq, amp):
        assert rms(make_signal(sine(freq, amp))) == pytest.approx(amp / math.sqrt(2), abs=1e-9)

    def test_empty(self):
        with pytest.raises(ParameterError):
            rms([])

    @given(arrays(np.float64, st.integers(1, 200), elements=finite), st.floats(-100, 100).filter(lambda v: abs(v) > 1e-100))
    def test_homogeneity(self, x, a):
        assert rms(a * x) == pytest.approx(abs(a) * rms(x), rel=1e-12, abs=1e-300)

    def test_pooled_equals_concatenation(self, rng):
        parts = [rng.normal(size=50) for _ in range(4)]
        assert rms_pooled(parts) == pytest.approx(rms(np.concatenate(parts)), rel=1e-14)


class TestSnr:
    def test_equal_rms(self):
        assert snr([1.0, -1.0], [0.5, 0.5, -1.5, 1.5]) == pytest.approx(
            (1.0 / rms([0.5, 0.5, -1.5, 1.5])) ** 2, rel=1e-15)
        assert snr([2.0, -2.0], [2.0, 2.0]) == pytest.approx(1.0, rel=1e-15)

    def test_half_noise(self):
        assert snr(np.full(8, 1.0), np.full(8, 0.5)) == pytest.approx(4.0, rel=1e-15)

    def test_full_scale_value(self):
        cmd = make_signal(sine(1.0, 2.0))
        assert rms(cmd) == pytest.approx(math.sqrt(2), rel=1e-12)
        assert snr(cmd, make_signal(np.full(N, 0.1))) == pytest.approx(200.0, rel=1e-9)

    def test_zero_noise_is_infinite(self):
        with pytest.warns(DegenerateStatisticWarning):
            assert snr(np.ones(4), np.zeros(4)) == math.inf

    @given(st.floats(0.01, 100), st.floats(0.01, 100), st.integers(0, 2**32 - 1))
    def test_scale_law(self, a, b, seed):
        r = np.random.default_rng(seed)
        c, n = r.normal(size=64), r.normal(size=64)
        assert snr(a * c, b * n) == pytest.approx(snr(c, n) * (a / b) ** 2, rel=1e-10)


class TestDsr:
    def test_equal_components(self):
        dec = decomposition_from(np.full(10, 0.2), [np.full(10, 0.2), np.full(10, -0.2)])
        assert dsr(dec) == pytest.approx(1.0, rel=1e-15)

    def test_zero_deterministic(self, rng):
        s = rng.normal(size=(3, 10))
        s -= s.mean(axis=0)
        assert dsr(decomposition_from(np.zeros(10), s)) == 0.0

    def test_constructed_value(self):
        # deterministic rms 0.0805, pooled stochastic rms 0.01
        dec = decomposition_from(np.full(N, 0.0805), [np.full(N, 0.01), np.full(N, -0.01)])
        assert dsr(dec) == pytest.approx(8.05, rel=1e-9)

    def test_zero_stochastic(self):
        with pytest.raises(DegenerateStatisticError):
            dsr(decomposition_from(np.ones(10), np.zeros((3, 10))))

    def test_mean_pooling_option(self):
        s = np.vstack([np.full(10, 0.1), np.full(10, -0.3), np.full(10, 0.2)])
        dec = decomposition_from(np.full(10, 0.5), s)
        assert dsr(dec, pooling="mean") == pytest.approx(0.5 / 0.2, rel=1e-12)
        assert dsr(dec) == pytest.approx(0.5 / math.sqrt((0.01 + 0.09 + 0.04) / 3), rel=1e-12)
        with pytest.raises(ParameterError):
            dsr(dec, pooling="median")

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.permutations(range(6)))
    def test_permutation_invariance(self, seed, perm):
        spec = SynthSpec(deterministic_terms=[{"frequency_hz": 4.0, "amplitude": 0.05}],
                         stochastic_sigma=0.02, n_trials=6, seed=seed)
        ts = generate_trialset(spec)
        permuted = type(ts)(ts.command, [ts.trials[i] for i in perm], ts.label)
        assert dsr(decompose(permuted)) == pytest.approx(dsr(decompose(ts)), rel=1e-9)


class TestSpectrum:
    def test_zero_signal(self):
        sb = amplitude_spectrum(make_signal(np.zeros(N)))
        assert np.all(sb.amplitudes == 0.0)
        assert len(sb) == 81
        np.testing.assert_array_equal(sb.bin_centers_hz, np.arange(81.0))

    def test_constant(self):
        amps = amplitude_spectrum(make_signal(np.full(N, -0.7))).amplitudes
        assert amps[0] == pytest.approx(0.7, abs=1e-12)
        assert np.abs(amps[1:]).max() <= 1e-9

    def test_integer_bin_sinusoid(self):
        amps = amplitude_spectrum(make_signal(sine(4.0, 0.05)), 80.0, 1.0).amplitudes
        assert abs(amps[4] - 0.05) <= 1e-9
        assert np.delete(amps, 4).max() <= 1e-9

    def test_two_sinusoids_disjoint_bins(self):
        x = sine(4.0, 0.05) + sine(42.0, 0.013, phase=0.7)
        amps = amplitude_spectrum(make_signal(x)).amplitudes
        assert abs(amps[4] - 0.05) <= 1e-9
        assert abs(amps[42] - 0.013) <= 1e-9
        assert np.delete(amps, [4, 42]).max() <= 1e-9

    def test_nyquist_line_scaling(self):
        x = 0.3 * (-1.0) ** np.arange(N)
        amps = amplitude_spectrum(make_signal(x), 250.0, 1.0).amplitudes
        assert amps[250] == pytest.approx(0.3, abs=1e-12)

    def test_beyond_nyquist(self):
        with pytest.raises(ParameterError):
            amplitude_spectrum(make_signal(np.zeros(N)), 300.0)
        with pytest.raises(ParameterError):
            amplitude_spectrum(make_signal(np.zeros(N)), 80.0, 0.0)

    def test_finer_native_resolution_averages(self):
        # 2 s record: lines every 0.5 Hz; bin 4 Hz owns 3.5 (tie, rounds up), 4.0
        x = sine(4.0, 0.05, n=1000)
        centers, amps = binned_amplitudes(x, FS, 10.0, 1.0)
        assert amps[0, 4] == pytest.approx(0.05 / 2, abs=1e-12)
        assert amps[0, 5] == pytest.approx(0.0, abs=1e-12)

    def test_coarser_native_resolution_uses_nearest_line(self):
        # 0.5 s record: lines every 2 Hz
        x = sine(4.0, 0.05, n=250)
        centers, amps = binned_amplitudes(x, FS, 8.0, 1.0)
        assert amps[0, 4] == pytest.approx(0.05, abs=1e-12)
        assert amps[0, 3] == pytest.approx(amps[0, 4]) or amps[0, 3] == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_parseval(self, seed):
        r = np.random.default_rng(seed)
        x = r.normal(size=int(r.integers(2, 700)))
        assert two_sided_power(x).sum() == pytest.approx(rms(x) ** 2, rel=1e-6)

    def test_spectrum_set_order_and_empty(self):
        assert spectrum_set([]) == []
        sigs = [make_signal(sine(f, 1.0)) for f in (3.0, 9.0, 5.0)]
        peaks = [int(np.argmax(s.amplitudes)) for s in spectrum_set(sigs)]
        assert peaks == [3, 9, 5]

    def test_spectrum_set_copies(self):
        s = make_signal(sine(7.0, 0.2) + 0.01)
        out = spectrum_set([s] * 20)
        assert all(np.array_equal(o.amplitudes, out[0].amplitudes) for o in out)

    def test_white_noise_is_flat(self):
        # mean one-sided amplitude of white noise: sigma*sqrt(pi/N) off DC
        sigma, reps = 0.02, 1000
        r = np.random.default_rng(2024)
        acc = np.zeros((reps, 81))
        for i in range(reps):
            sigs = [make_signal(row) for row in r.normal(0, sigma, (20, N))]
            acc[i] = np.mean([s.amplitudes for s in spectrum_set(sigs)], axis=0)
        mean = acc.mean(axis=0)
        se = acc.std(axis=0, ddof=1) / math.sqrt(reps)
        expected = np.full(81, sigma * math.sqrt(math.pi / N))
        expected[0] = sigma * math.sqrt(2 / (math.pi * N))
        z = np.abs(mean - expected) / se
        assert np.mean(z <= 3) >= 0.97
        assert z.max() < 4.5


class TestAveragingCurve:
    def test_identical_trials_undefined(self):
        dec = decomposition_from(sine(4.0, 0.05), np.zeros((5, N)))
        with pytest.warns(DegenerateStatisticWarning):
            curve = averaging_curve(dec)
        assert not curve.r_defined
        assert curve.residual_rms.max() <= 1e-15

    def test_needs_three_trials(self, rng):
        with pytest.raises(InsufficientRepetitionsError):
            averaging_curve(decomposition_from(np.zeros(10), rng.normal(size=(2, 10))))

    def test_shape_and_last_point(self):
        spec = SynthSpec(stochastic_sigma=0.02, n_trials=20, seed=5)
        curve = averaging_curve(decompose(generate_trialset(spec), cutoff_hz=None))
        np.testing.assert_array_equal(curve.n_values, np.arange(1, 21))
        assert curve.residual_rms[-1] < 1e-15
        assert np.all(curve.residual_rms >= 0)
        assert -1 <= curve.pearson_r <= 1

    def test_random_mode_is_seeded(self):
        spec = SynthSpec(stochastic_sigma=0.02, n_trials=10, seed=6)
        dec = decompose(generate_trialset(spec), cutoff_hz=None)
        a = averaging_curve(dec, mode="random", seed=1)
        b = averaging_curve(dec, mode="random", seed=1)
        np.testing.assert_array_equal(a.residual_rms, b.residual_rms)
        with pytest.raises(ParameterError):
            averaging_curve(dec, mode="bootstrap")

    def test_white_noise_correlates_with_inverse_sqrt_n(self):
        rs = []
        for seed in range(200):
            spec = SynthSpec(stochastic_sigma=0.02, n_trials=20, seed=seed)
            rs.append(averaging_curve(decompose(generate_trialset(spec), cutoff_hz=None)).pearson_r)
        assert np.mean(np.asarray(rs) >= 0.95) >= 0.95
