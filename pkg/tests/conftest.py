"""Shared fixtures and independent oracles.

The oracles here never call into simnoise: they evaluate the textbook
formulas directly (explicit loops, closed forms, numerical quadrature).
"""

import math

import numpy as np
import pytest
from scipy import integrate

from simnoise import CommandSpec, Signal, Sinusoid

FS = 500.0
N = 500


def butterworth_zero_phase_gain(freq_hz, cutoff_hz, fs, order=4):
    """Amplitude gain of a bilinear Butterworth run forward and backward: |H(f)|^2."""
    ratio = math.tan(math.pi * freq_hz / fs) / math.tan(math.pi * cutoff_hz / fs)
    return 1.0 / (1.0 + ratio ** (2 * order))


def t_pdf(x, df):
    c = math.exp(math.lgamma((df + 1) / 2) - math.lgamma(df / 2)) / math.sqrt(df * math.pi)
    return c * (1 + x * x / df) ** (-(df + 1) / 2)


def f_pdf(x, d1, d2):
    if x <= 0:
        return 0.0
    logc = math.lgamma((d1 + d2) / 2) - math.lgamma(d1 / 2) - math.lgamma(d2 / 2)
    return math.exp(logc + (d1 / 2) * math.log(d1 / d2) + (d1 / 2 - 1) * math.log(x)
                    - ((d1 + d2) / 2) * math.log1p(d1 * x / d2))


def t_upper_tail_quad(t, df):
    return integrate.quad(t_pdf, t, math.inf, args=(df,), epsabs=1e-14, epsrel=1e-12, limit=200)[0]


def f_upper_tail_quad(f, d1, d2):
    # integrate the lower part when it is the smaller piece, for accuracy
    lower = integrate.quad(f_pdf, 0.0, f, args=(d1, d2), epsabs=1e-14, epsrel=1e-12, limit=200)[0]
    upper = integrate.quad(f_pdf, f, math.inf, args=(d1, d2), epsabs=1e-14, epsrel=1e-12, limit=200)[0]
    return upper if upper < 0.5 else 1.0 - lower


def t_test_oracle(a, b):
    """Pooled two-sample t with p from quadrature of the t density."""
    na, nb = len(a), len(b)
    ma, mb = sum(a) / na, sum(b) / nb
    ssa = sum((x - ma) ** 2 for x in a)
    ssb = sum((x - mb) ** 2 for x in b)
    df = na + nb - 2
    sp2 = (ssa + ssb) / df
    t = (ma - mb) / math.sqrt(sp2 * (1 / na + 1 / nb))
    return t, df, 2 * t_upper_tail_quad(abs(t), df)


def anova_oracle(cells, levels_a, levels_b):
    """Two-way SS from cell means with explicit loops; returns dict of (ss, df, F, p)."""
    I, J = len(levels_a), len(levels_b)
    r = len(cells[(levels_a[0], levels_b[0])])
    allv = [v for a in levels_a for b in levels_b for v in cells[(a, b)]]
    grand = sum(allv) / len(allv)
    cm = {(a, b): sum(cells[(a, b)]) / r for a in levels_a for b in levels_b}
    ma = {a: sum(cm[(a, b)] for b in levels_b) / J for a in levels_a}
    mb = {b: sum(cm[(a, b)] for a in levels_a) / I for b in levels_b}
    ss_a = sum(J * r * (ma[a] - grand) ** 2 for a in levels_a)
    ss_b = sum(I * r * (mb[b] - grand) ** 2 for b in levels_b)
    ss_ab = sum(r * (cm[(a, b)] - ma[a] - mb[b] + grand) ** 2 for a in levels_a for b in levels_b)
    ss_res = sum((v - cm[(a, b)]) ** 2 for a in levels_a for b in levels_b for v in cells[(a, b)])
    df_res = I * J * (r - 1)
    out = {}
    for name, ss, df in (("A", ss_a, I - 1), ("B", ss_b, J - 1), ("AB", ss_ab, (I - 1) * (J - 1))):
        F = (ss / df) / (ss_res / df_res)
        out[name] = (ss, df, F, f_upper_tail_quad(F, df, df_res))
    out["res"] = (ss_res, df_res, None, None)
    return out


def sine(freq, amp, n=N, fs=FS, phase=0.0):
    return amp * np.sin(2 * np.pi * freq * np.arange(n) / fs + phase)


@pytest.fixture
def command_1hz():
    return CommandSpec(Sinusoid(frequency_hz=1.0, peak_amplitude=2.0, direction="up", duration_s=1.0), "ref")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_signal(values, fs=FS):
    return Signal(np.asarray(values, dtype=float), fs)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
