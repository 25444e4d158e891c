"""Noise analysis for repeated motion-simulator recordings.

Splits inertial recordings of a commanded trajectory into total,
deterministic and stochastic noise, measures them (rms, SNR, DSR, binned
amplitude spectra, trial-averaging curves) and compares trial sets with
t-tests and two-way ANOVAs.
"""

from .estimators import AmplitudeSpectrum, LowPassFilter, NoiseDecomposer
from .exceptions import (
    AlignmentError,
    DegenerateStatisticError,
    DegenerateStatisticWarning,
    InsufficientRepetitionsError,
    ManifestError,
    ParameterError,
    SimNoiseError,
    TraceParseError,
)
from .manifest import AnalysisParameters, Manifest, load_manifest, reference_design_manifest
from .metrics import (
    AveragingCurve,
    SpectrumBins,
    amplitude_spectrum,
    averaging_curve,
    dsr,
    rms,
    rms_pooled,
    snr,
    spectrum_set,
)
from .pipeline import ComparisonReport, export_report, run_analysis
from .signal_model import (
    CommandSpec,
    NoiseDecomposition,
    Sampled,
    Signal,
    Sinusoid,
    TrialSet,
    decompose,
    lowpass_filter,
    render_command,
    total_noise,
)
from .stats import (
    AnovaResult,
    FactorialTable,
    FisherF,
    StudentT,
    TTestResult,
    anova_two_way,
    pearson_r,
    t_test_unpaired,
    tail_probability,
)
from .synth import DeterministicTerm, SynthSpec, generate_trialset
from .traces import load_traces, write_trace

__version__ = "0.1.0"
