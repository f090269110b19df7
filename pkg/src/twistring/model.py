"""Model parameters, the coupling kernel, and twisted-state frequencies.

The ring carries a single-harmonic distance kernel

    G(x) = 1 + A cos(2 pi x) + B sin(2 pi x),

whose three nonzero Fourier coefficients drive every closed-form
expression in the rest of the package.
"""

import cmath
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

TAU = 2.0 * math.pi

_PARAM_KEYS = ("K2", "K3", "A", "B", "alpha2", "alpha3", "omega", "q")
_REQUIRED_KEYS = ("K2", "K3", "A", "B", "alpha2", "alpha3")


@dataclass(frozen=True)
class ModelParams:
    """Coupling parameters of the oscillator ring.

    K2, K3  : strengths of the pairwise and triplet interactions
    A, B    : cosine/sine amplitudes of the kernel (B breaks reflection symmetry)
    alpha2, alpha3 : phase lags, stored in [0, 2 pi)
    omega   : intrinsic frequency; must be 0 for every analysis routine
              (it is removable by the phase-shift symmetry), simulation
              accepts any finite value.
    """

    K2: float
    K3: float
    A: float
    B: float
    alpha2: float
    alpha3: float
    omega: float = 0.0

    def __post_init__(self):
        for name in ("K2", "K3", "A", "B", "alpha2", "alpha3", "omega"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ConfigError(f"parameter {name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "alpha2", self.alpha2 % TAU)
        object.__setattr__(self, "alpha3", self.alpha3 % TAU)

    def require_zero_omega(self, context: str = "analysis"):
        if self.omega != 0.0:
            raise ConfigError(
                f"{context} requires omega = 0 (remove omega by the phase-shift "
                f"symmetry first), got omega = {self.omega}"
            )

    def as_dict(self) -> dict:
        return {
            "K2": self.K2, "K3": self.K3, "A": self.A, "B": self.B,
            "alpha2": self.alpha2, "alpha3": self.alpha3, "omega": self.omega,
        }


class KernelCoefficients:
    """Fourier coefficients g_hat[k] of the kernel G.

    Only k in {-1, 0, 1} are nonzero: g_hat[0] = 1, g_hat[+-1] = (A -+ iB)/2,
    and conj(g_hat[k]) = g_hat[-k].
    """

    def __init__(self, A: float, B: float):
        self._nonzero = {
            0: 1.0 + 0.0j,
            1: 0.5 * (A - 1j * B),
            -1: 0.5 * (A + 1j * B),
        }

    def __call__(self, k: int) -> complex:
        return self._nonzero.get(int(k), 0.0 + 0.0j)

    def __getitem__(self, k: int) -> complex:
        return self(k)

    def items(self):
        return self._nonzero.items()


def kernel_eval(params: ModelParams, x):
    """Evaluate G(x) = 1 + A cos(2 pi x) + B sin(2 pi x); x may be an array."""
    x = np.asarray(x, dtype=float)
    value = 1.0 + params.A * np.cos(TAU * x) + params.B * np.sin(TAU * x)
    return value if value.ndim else float(value)


def fourier_coefficients(params: ModelParams) -> KernelCoefficients:
    return KernelCoefficients(params.A, params.B)


def twisted_frequency(params: ModelParams, q: int) -> float:
    """Rotation frequency of the q-twisted state.

    Inserting the twisted profile into the continuum equation gives

        Omega = K2 Im(e^{i alpha2} g_hat[q]) + K3 Im(e^{i alpha3} g_hat[2q] g_hat[-q]).

    For this kernel g_hat[2] = 0, so the triplet term vanishes for q = 1.
    """
    params.require_zero_omega("twisted_frequency")
    g = fourier_coefficients(params)
    q = int(q)
    pair = params.K2 * (cmath.exp(1j * params.alpha2) * g(q)).imag
    trip = params.K3 * (cmath.exp(1j * params.alpha3) * g(2 * q) * g(-q)).imag
    return pair + trip


def params_from_dict(data: dict) -> tuple[ModelParams, int]:
    """Build (ModelParams, q) from a JSON-style mapping.

    Keys: K2, K3, A, B, alpha2, alpha3 (required), omega and q (optional,
    default 0 and 1). Angles are radians. Unknown keys are rejected.
    """
    if not isinstance(data, dict):
        raise ConfigError(f"params must be an object, got {type(data).__name__}")
    unknown = set(data) - set(_PARAM_KEYS)
    if unknown:
        raise ConfigError(f"unknown parameter keys: {sorted(unknown)}")
    missing = [k for k in _REQUIRED_KEYS if k not in data]
    if missing:
        raise ConfigError(f"missing parameter keys: {missing}")
    q = data.get("q", 1)
    if not isinstance(q, int) or isinstance(q, bool):
        raise ConfigError(f"q must be an integer, got {q!r}")
    numeric = {}
    for key in ("K2", "K3", "A", "B", "alpha2", "alpha3", "omega"):
        value = data.get(key, 0.0)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"parameter {key} must be a number, got {value!r}")
        numeric[key] = float(value)
    return ModelParams(**numeric), q


def params_from_json(path) -> tuple[ModelParams, int]:
    with open(path, "r", encoding="utf-8") as fh:
        return params_from_dict(json.load(fh))
