"""Seeded synthetic trial sets with known deterministic and stochastic noise."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_count, check_nonnegative, check_positive
from .exceptions import ParameterError
from .signal_model import (
    DEFAULT_SAMPLE_RATE_HZ,
    CommandSpec,
    Signal,
    Sinusoid,
    TrialSet,
    render_command,
)

GENERATOR_NAME = "numpy.random.PCG64"


@dataclass(frozen=True)
class DeterministicTerm:
    frequency_hz: float
    amplitude: float
    phase: float = 0.0

    def __post_init__(self):
        check_nonnegative(self.frequency_hz, "frequency_hz")
        check_nonnegative(self.amplitude, "amplitude")


@dataclass(frozen=True)
class SynthSpec:
    command: CommandSpec = field(default_factory=lambda: CommandSpec(Sinusoid()))
    deterministic_terms: tuple = ()
    stochastic_sigma: float = 0.0
    n_trials: int = 20
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ
    duration_s: float = 1.0
    seed: int = 0

    def __post_init__(self):
        terms = tuple(t if isinstance(t, DeterministicTerm) else DeterministicTerm(**t)
                      for t in self.deterministic_terms)
        object.__setattr__(self, "deterministic_terms", terms)
        check_nonnegative(self.stochastic_sigma, "stochastic_sigma")
        check_count(self.n_trials, "n_trials")
        check_positive(self.sample_rate_hz, "sample_rate_hz")
        check_positive(self.duration_s, "duration_s")
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or self.seed < 0:
            raise ParameterError(f"seed must be an unsigned integer, got {self.seed!r}")
        if self.n_samples < 1:
            raise ParameterError("duration_s * sample_rate_hz rounds to zero samples")

    @property
    def n_samples(self):
        return int(round(self.duration_s * self.sample_rate_hz))

    def metadata(self):
        return {"generator": GENERATOR_NAME, "seed": int(self.seed)}


def deterministic_noise(spec):
    """The injected deterministic noise, sum of ``A sin(2 pi f t + phase)`` terms."""
    t = np.arange(spec.n_samples) / spec.sample_rate_hz
    out = np.zeros(spec.n_samples)
    for term in spec.deterministic_terms:
        out += term.amplitude * np.sin(2 * np.pi * term.frequency_hz * t + term.phase)
    return Signal(out, spec.sample_rate_hz)


def generate_trialset(spec, label=""):
    """Trials = rendered command + deterministic terms + independent white Gaussian noise.

    All noise is drawn in one call from a PCG64 generator seeded with
    ``spec.seed``, so equal specs give bit-identical trial sets.
    """
    command = render_command(spec.command, spec.sample_rate_hz, spec.n_samples)
    base = command.samples + deterministic_noise(spec).samples
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    noise = rng.standard_normal((spec.n_trials, spec.n_samples)) * spec.stochastic_sigma
    return TrialSet.from_array(spec.command, base + noise, spec.sample_rate_hz, label or spec.command.label)
