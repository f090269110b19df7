"""Twisted states, Hopf bifurcations, and traveling waves on oscillator rings
with pairwise and triplet coupling."""

from .errors import (
    BlowupError, ConfigError, ConvergenceError, DegenerateModeError,
    HopfLocationError, NumericsError, OperatorUndefinedError, TwistringError,
)
from .model import (
    KernelCoefficients, ModelParams, fourier_coefficients, kernel_eval,
    params_from_dict, params_from_json, twisted_frequency,
)
from .spectral import (
    CriticalMode, HopfPoint, Spectrum, critical_mode, locate_hopf,
    oa_spectrum, stability_scan, twist_spectrum,
)

__version__ = "0.1.0"
