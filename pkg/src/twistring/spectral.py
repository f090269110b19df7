"""Linear stability of +-1-twisted states.

Two independent routes to the same eigenvalues: the closed forms obtained
from the phase-difference linearization (`twist_spectrum`), and the 2x2
mode-coupling matrix of the mean-field linearization (`oa_spectrum`).
Their agreement is one of the package's acceptance properties.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateModeError, HopfLocationError
from .model import ModelParams, fourier_coefficients, twisted_frequency

__all__ = [
    "Spectrum", "CriticalMode", "HopfPoint",
    "twist_spectrum", "critical_mode", "oa_spectrum",
    "stability_scan", "locate_hopf", "write_scan_csv",
]


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalue family {lambda_k^+-} of a q-twisted state, k = 1..kmax."""

    entries: tuple  # of (k, lambda_plus, lambda_minus)
    q: int
    params: ModelParams

    def lam_plus(self, k: int) -> complex:
        return self.entries[k - 1][1]

    def lam_minus(self, k: int) -> complex:
        return self.entries[k - 1][2]

    @property
    def kmax(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class CriticalMode:
    """Index and eigenvalue of the mode with maximal growth rate.

    `lam` is the member of the conjugate pair with positive imaginary part
    (the '-' member when Im lambda^+ <= 0).
    """

    ell: int
    lam: complex


@dataclass(frozen=True)
class HopfPoint:
    """Root of Re(lambda_ell) along one free parameter."""

    param_value: float
    mode: CriticalMode
    free: str
    warnings: tuple = field(default_factory=tuple)


def _lambda_pair(params: ModelParams, k: int, B: float) -> tuple[complex, complex]:
    """Closed-form eigenvalue pair of the 1-twisted state for mode index k.

    `B` is passed explicitly so the q = -1 case (B -> -B) reuses the same
    expressions.
    """
    K2, K3, A = params.K2, params.K3, params.A
    a2, a3 = params.alpha2, params.alpha3
    c2, s2 = math.cos(a2), math.sin(a2)
    c3, s3 = math.cos(a3), math.sin(a3)
    if k == 1:
        re = 0.5 * K2 * ((1.0 - A) * c2 - B * s2) + 0.25 * K3 * (A * A + B * B) * c3
        im = 0.5 * K2 * s2 + 0.25 * K3 * (A * A + B * B) * s3
    elif k == 2:
        re = 0.25 * K2 * (-A * c2 - 3.0 * B * s2) + 0.25 * K3 * (2.0 * A * c3 - 2.0 * B * s3)
        im = 0.25 * K2 * (B * c2 + A * s2) + 0.25 * K3 * (2.0 * B * c3 + 2.0 * A * s3)
    elif k == 3:
        re = -0.5 * K2 * (A * c2 + B * s2) + 0.25 * K3 * ((A * A - B * B) * c3 - 2.0 * A * B * s3)
        im = 0.25 * K3 * ((A * A - B * B) * s3 + 2.0 * A * B * c3)
    else:
        re = -0.5 * K2 * (A * c2 + B * s2)
        im = 0.0
    lam = complex(re, im)
    return lam, lam.conjugate()


def twist_spectrum(params: ModelParams, q: int, kmax: int = 8) -> Spectrum:
    """Closed-form spectrum of the q-twisted state, q in {-1, +1}.

    Modes k >= 4 all share the common real value -(K2/2)(A cos a2 + B sin a2);
    kmax > 4 keeps a few of them so the degeneracy is visible in outputs.
    """
    params.require_zero_omega("twist_spectrum")
    if q not in (1, -1):
        raise ConfigError(f"twist_spectrum supports q = +-1 only, got q = {q}")
    if kmax < 1:
        raise ConfigError("kmax must be >= 1")
    B = params.B if q == 1 else -params.B
    entries = tuple((k, *_lambda_pair(params, k, B)) for k in range(1, kmax + 1))
    return Spectrum(entries=entries, q=q, params=params)


def critical_mode(spectrum: Spectrum) -> CriticalMode:
    """Mode with maximal Re lambda; ties broken toward the smallest index."""
    if not spectrum.entries:
        raise ConfigError("empty spectrum")
    best_k, best_lam = None, None
    for k, lam_p, _ in spectrum.entries:
        if best_lam is None or lam_p.real > best_lam.real:
            best_k, best_lam = k, lam_p
    lam = best_lam if best_lam.imag > 0 else best_lam.conjugate()
    return CriticalMode(ell=best_k, lam=lam)


def oa_spectrum(params: ModelParams, k: int) -> tuple[complex, complex]:
    """Eigenvalue pair of the 2x2 mean-field mode-coupling matrix at mode k.

    Independent re-derivation of the twisted-state spectrum: perturbations
    v_+ e^{2 pi i k x} + conj(v_-) e^{-2 pi i k x} of the co-rotating mean
    field obey a 2x2 spectral problem built from the kernel coefficients.
    For |k| >= 4 both eigenvalues equal the common real value of
    `twist_spectrum`; k = 0 carries the symmetry zero.
    """
    params.require_zero_omega("oa_spectrum")
    K2, K3 = params.K2, params.K3
    e2 = cmath.exp(1j * params.alpha2)
    e3 = cmath.exp(1j * params.alpha3)
    g = fourier_coefficients(params)
    Omega = twisted_frequency(params, 1)
    eta = 1j * Omega + K2 * g(-1) / e2 + K3 * g(-2) * g(1) / e3
    p = 0.5 * K2 * e2 * g(k + 1) + K3 * e3 * g(-1) * g(k + 2) - 0.5 * K3 * g(-2) * g(k + 1) / e3
    qq = 0.5 * K2 * g(k - 1) / e2 + K3 * g(1) * g(k - 2) / e3 - 0.5 * K3 * e3 * g(2) * g(k - 1)
    m11 = -eta + p
    m12 = -qq
    m21 = -p
    m22 = -eta.conjugate() + qq
    tr = m11 + m22
    det = m11 * m22 - m12 * m21
    disc = cmath.sqrt(tr * tr - 4.0 * det)
    return 0.5 * (tr + disc), 0.5 * (tr - disc)


def stability_scan(params_base: ModelParams, B_values, K3_values, kmax: int = 8):
    """Grid scan of the 1-twisted state's stability over (B, K3).

    Returns a dict of 2D arrays indexed [i_K3, j_B]: `max_re` (largest
    growth rate), `argmax_ell` (its mode index), and `abs_im_critical`
    (oscillation frequency modulus of the critical mode).
    """
    B_values = np.asarray(B_values, dtype=float)
    K3_values = np.asarray(K3_values, dtype=float)
    max_re = np.empty((K3_values.size, B_values.size))
    argmax_ell = np.empty_like(max_re, dtype=int)
    abs_im = np.empty_like(max_re)
    for i, K3 in enumerate(K3_values):
        for j, B in enumerate(B_values):
            params = ModelParams(params_base.K2, K3, params_base.A, B,
                                 params_base.alpha2, params_base.alpha3)
            mode = critical_mode(twist_spectrum(params, 1, kmax))
            max_re[i, j] = mode.lam.real
            argmax_ell[i, j] = mode.ell
            abs_im[i, j] = abs(mode.lam.imag)
    return {"B": B_values, "K3": K3_values, "max_re": max_re,
            "argmax_ell": argmax_ell, "abs_im_critical": abs_im}


def write_scan_csv(scan: dict, path):
    """One row per grid point: B, K3, max_re, argmax_ell, abs_im_critical."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("B,K3,max_re,argmax_ell,abs_im_critical\n")
        for i, K3 in enumerate(scan["K3"]):
            for j, B in enumerate(scan["B"]):
                fh.write("%.17g,%.17g,%.17g,%d,%.17g\n" % (
                    B, K3, scan["max_re"][i, j], scan["argmax_ell"][i, j],
                    scan["abs_im_critical"][i, j]))


def _with_free(params: ModelParams, free: str, value: float) -> ModelParams:
    if free == "B":
        return ModelParams(params.K2, params.K3, params.A, value,
                           params.alpha2, params.alpha3)
    if free == "K3":
        return ModelParams(params.K2, value, params.A, params.B,
                           params.alpha2, params.alpha3)
    raise ConfigError(f"free parameter must be 'B' or 'K3', got {free!r}")


def locate_hopf(params: ModelParams, free: str, bracket, q: int = 1,
                kmax: int = 8, tol: float = 1e-12) -> HopfPoint:
    """Find where the leading growth rate crosses zero along one parameter.

    Bisection on max_k Re(lambda_k^+) brackets the crossing, then secant
    iteration refines the root of Re(lambda_ell) for the mode `ell` that
    mediates it, down to |Re lambda| < tol. Transversality and the
    non-degeneracy Im(lambda_ell) != 0 are verified; sign conditions on the
    non-critical modes are reported as warnings rather than enforced.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise ConfigError(f"invalid bracket {bracket!r}")

    def mode_at(p):
        return critical_mode(twist_spectrum(_with_free(params, free, p), q, kmax))

    def re_ell(p, ell):
        spec = twist_spectrum(_with_free(params, free, p), q, kmax)
        return spec.lam_plus(ell).real

    m_lo, m_hi = mode_at(lo), mode_at(hi)
    f_lo, f_hi = m_lo.lam.real, m_hi.lam.real
    if f_lo == 0.0 or f_hi == 0.0:
        # landing exactly on a root at an endpoint: still refine below
        pass
    elif f_lo * f_hi > 0.0:
        raise HopfLocationError(
            f"no sign change of max Re(lambda) over [{lo}, {hi}] "
            f"(values {f_lo:.3e}, {f_hi:.3e})")

    # bisection on the (continuous) leading growth rate
    a, b, fa = lo, hi, f_lo
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = mode_at(mid).lam.real
        if fa * fm <= 0.0:
            b = mid
        else:
            a, fa = mid, fm
        if b - a < 1e-9 * max(1.0, abs(lo), abs(hi)):
            break
    root0 = 0.5 * (a + b)
    ell = mode_at(root0).ell

    # secant refinement on the smooth branch Re(lambda_ell)
    p0, p1 = a, b
    g0, g1 = re_ell(p0, ell), re_ell(p1, ell)
    root = root0
    for _ in range(100):
        if g1 == g0:
            break
        p2 = p1 - g1 * (p1 - p0) / (g1 - g0)
        if not (min(lo, hi) - 1e-6 <= p2 <= max(lo, hi) + 1e-6):
            p2 = 0.5 * (p0 + p1)
        p0, g0, p1 = p1, g1, p2
        g1 = re_ell(p1, ell)
        root = p1
        if abs(g1) < tol:
            break
    if abs(re_ell(root, ell)) >= tol:
        raise HopfLocationError(
            f"did not reach |Re lambda| < {tol:g} (got {re_ell(root, ell):.3e})")

    final_mode = mode_at(root)
    if final_mode.ell != ell:
        raise HopfLocationError(
            f"critical index switches inside bracket (ell={ell} at crossing, "
            f"{final_mode.ell} at refined root)")
    if final_mode.lam.imag == 0.0:
        raise DegenerateModeError(
            f"degenerate: Im lambda = 0 for ell = {ell}; no oscillatory bifurcation")

    # transversality: d Re(lambda_ell)/d param != 0
    h = 1e-7 * max(1.0, abs(root))
    slope = (re_ell(root + h, ell) - re_ell(root - h, ell)) / (2.0 * h)
    if abs(slope) < 1e-8:
        raise HopfLocationError(f"transversality failure: d Re(lambda)/d{free} ~ {slope:.3e}")

    warnings = []
    spec = twist_spectrum(_with_free(params, free, root), q, kmax)
    for k, lam_p, _ in spec.entries:
        if k != ell and lam_p.real >= 0.0:
            warnings.append(f"Re(lambda_{k}) = {lam_p.real:.3e} >= 0 at the root")
    return HopfPoint(param_value=root, mode=final_mode, free=free,
                     warnings=tuple(warnings))
