"""Classification of the oscillatory instabilities of the 1-twisted state.

The third-order coefficient zeta decides whether the bifurcation is
sub- or supercritical and how the emergent branch bends in parameter
space. Two routes are provided: closed forms for the critical modes
ell = 1, 2, 3 (`zeta_closed_form`), and a numerically differentiated
Galerkin evaluation of the defining normal-form pairing
(`zeta_oracle`), kept fully independent of the closed forms.
"""

import cmath
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericsError
from .model import TAU, ModelParams, twisted_frequency
from .spectral import HopfPoint, locate_hopf, twist_spectrum, _with_free

__all__ = [
    "HopfData", "PhaseDifferenceSystem", "zeta_closed_form", "zeta_oracle",
    "hopf_classify", "predict_profile", "write_hopf_json",
]


@dataclass(frozen=True)
class HopfData:
    """Everything needed to predict the emergent wave near one Hopf point."""

    ell: int
    param_name: str
    param_value: float
    lam: complex                # critical eigenvalue, Im > 0
    dlambda_dparam: complex
    zeta: complex
    d2param_dr2: float          # curvature of the parameter along the branch
    drift_speed: float          # Im(lam) / (2 pi ell)
    criticality: str            # 'supercritical' | 'subcritical'
    warnings: tuple = ()

    @property
    def existence_side(self) -> int:
        """+1 if the branch exists above the bifurcation value, else -1."""
        return 1 if self.d2param_dr2 > 0 else -1


# ----------------------------------------------------------------------
# closed forms
# ----------------------------------------------------------------------

def _zeta_parts(params: ModelParams, ell: int) -> tuple[complex, complex]:
    """Numerator and denominator of the closed-form zeta for ell in {1,2,3}."""
    K2, K3 = params.K2, params.K3
    A, B = params.A, params.B
    a2, a3 = params.alpha2, params.alpha3
    c2, s2 = math.cos(a2), math.sin(a2)
    c3, s3 = math.cos(a3), math.sin(a3)
    c22, s22 = math.cos(2 * a2), math.sin(2 * a2)
    c33, s33 = math.cos(2 * a3), math.sin(2 * a3)
    i = 1j

    if ell == 1:
        t_pair = 0.5 * K2 * K2 * (
            s22 * (16 * A**2 + 59j * A * B - 80 * A + 11 * B**2 - 48j * B + 64)
            + c22 * (16j * A**2 + A * (5 * B - 16j) + (28 - 33j * B) * B)
            + 48j * A**2 + 27 * A * B - 112j * A + 65j * B**2 - 28 * B + 128j
        )
        t_mixed = -2j * K3 * K2 * (
            2 * c2 * (
                4 * c3 * (4 * A**3 + A**2 * (-3 - 1j * B) + A * (-2 * B + 1j) ** 2
                          - 1j * B**3 - 3 * B**2 + 5j * B + 4)
                - 1j * s3 * (6 * A**3 + A**2 * (-12 + 5j * B)
                             + A * (5 * B**2 + 4j * B + 4)
                             + 6j * B**3 + 4 * B**2 - 20j * B - 16)
            )
            + s2 * (
                c3 * (40 * A**2 * (B + 1j) + A * (43 * B + 24j)
                      + 40 * B**3 + 51j * B**2 - 8 * B - 32j)
                + s3 * (20 * A**3 + A**2 * (-72 + 19j * B)
                        + A * (22 * B**2 - 13j * B + 40)
                        + 25j * B**3 - 19 * B**2 + 56j * B + 32)
            )
        )
        t_trip = 4 * K3 * K3 * (B - 1j * A) * (
            -10 * A**3 + 9j * A**2 * B + 8 * A**2
            + s33 * (6j * A**3 + 5 * A**2 * B + A * (5j * B**2 + 6 * B - 8j)
                     + 4 * B * (B**2 - 2j * B - 2))
            + c33 * (2 * A**3 + A**2 * (-8 - 5j * B) + A * (B**2 - 6j * B - 8)
                     - 4j * B * (B**2 - 4j * B - 2))
            - 9 * A * B**2 + 10j * A * B + 8j * B**3 + 12 * B**2 - 16j * B
        )
        num = t_pair + t_mixed + t_trip
        den = 16 * (
            K2 * (c2 * (-B - 1j * A) - s2 * (A + 3j * B - 4))
            + 2 * K3 * (A + 1j * B) * (1j * c3 + s3 * (A - 1j * B - 1))
        )
        return num, den

    if ell == 2:
        t_pair = -0.5 * K2 * K2 * (
            1j * s22 * (A**2 - 4j * A * B + 3 * B**2)
            + c22 * (A**2 - 2j * A * B - 3 * B**2)
            + 3 * A**2 + 4j * A * B + 9 * B**2
        )
        t_mixed = K3 * K2 * (
            c2 * (1j * s3 * (2 * A**2 + 9j * A * B - B**2)
                  + c3 * (8 * A**2 + 11j * A * B - 9 * B**2))
            + s2 * (B + 1j * A) * (11 * A * c3 + s3 * (-10 * B + 7j * A))
        )
        t_trip = K3 * K3 * (
            c33 * (3 * A**2 + 10j * A * B - 3 * B**2) - 9 * A**2
            + 1j * s33 * (3 * A + 1j * B) ** 2 + 8j * A * B - 9 * B**2
        )
        num = t_pair + t_mixed + t_trip
        den = (2 * K2 * (s2 * (B + 1j * A) + c2 * (A + 1j * B))
               + 4j * K3 * (A * s3 + B * c3))
        return num, den

    if ell == 3:
        num = B * (c2 - c3) * (
            2 * K2 * (B * c2 - A * s2)
            + K3 * (s3 * (-A**2 - 6j * A * B + B**2)
                    + 1j * c3 * (3 * A**2 + 2j * A * B - 3 * B**2))
        )
        den = 8 * (A * c2 + B * s2)
        return num, den

    raise NumericsError(f"no closed-form zeta for ell = {ell} (only 1, 2, 3)")


def zeta_closed_form(params: ModelParams, ell: int) -> complex:
    """Closed-form third-order Hopf coefficient for ell in {1, 2, 3}."""
    params.require_zero_omega("zeta_closed_form")
    num, den = _zeta_parts(params, ell)
    scale = 16.0 * (abs(params.K2) + abs(params.K3)) * (1.0 + params.A**2 + params.B**2) + 1e-300
    if abs(den) < 1e-13 * scale:
        raise NumericsError(f"resonant/degenerate denominator for ell = {ell} (|den| = {abs(den):.3e})")
    return num / den


# ----------------------------------------------------------------------
# Galerkin oracle
# ----------------------------------------------------------------------

class PhaseDifferenceSystem:
    """Galerkin truncation of the phase-difference dynamics at the 1-twisted state.

    Coordinates are coefficients in the basis u_k(x) = sin(2 pi k x),
    w_k(x) = 1 - cos(2 pi k x), k = 1..modes (ordering: all u then all w),
    the natural basis of perturbations vanishing at x = 0. The map is
    evaluated by synthesis on a uniform grid, application of the continuum
    right-hand side, and Fourier projection; it is written without any
    conjugation so it extends analytically to complex coordinates, which
    makes the multilinear finite-difference calculus below exact.
    """

    def __init__(self, params: ModelParams, modes: int = 8, grid: int = 256):
        params.require_zero_omega("PhaseDifferenceSystem")
        if grid < 8 * modes:
            raise ConfigError("grid too coarse for the requested mode count")
        self.params = params
        self.modes = modes
        self.grid = grid
        x = np.arange(grid) / grid
        self.x = x
        self._cos1 = np.cos(TAU * x)
        self._sin1 = np.sin(TAU * x)
        k = np.arange(1, modes + 1)
        self._sin_kx = np.sin(TAU * np.outer(k, x))          # (modes, grid)
        self._one_minus_cos_kx = 1.0 - np.cos(TAU * np.outer(k, x))
        self._theta0 = TAU * x

    def _convolve(self, u):
        """Kernel convolution of a grid function (exact for this 3-harmonic kernel)."""
        A, B = self.params.A, self.params.B
        m = u.mean()
        cu = (u * self._cos1).mean()
        su = (u * self._sin1).mean()
        return (m
                + (A * cu - B * su) * self._cos1
                + (A * su + B * cu) * self._sin1)

    def _continuum_rhs(self, theta):
        """Continuum right-hand side on the grid; analytic in theta."""
        p = self.params
        s1 = np.sin(theta)
        c1 = np.cos(theta)
        s2 = 2.0 * s1 * c1
        c2 = c1 * c1 - s1 * s1
        gs1 = self._convolve(s1)
        gc1 = self._convolve(c1)
        ca2, sa2 = math.cos(p.alpha2), math.sin(p.alpha2)
        out = p.K2 * (ca2 * (c1 * gs1 - s1 * gc1) + sa2 * (c1 * gc1 + s1 * gs1))
        if p.K3 != 0.0:
            gs2 = self._convolve(s2)
            gc2 = self._convolve(c2)
            ca3, sa3 = math.cos(p.alpha3), math.sin(p.alpha3)
            cphi = c1 * ca3 + s1 * sa3      # cos(theta - alpha3)
            sphi = s1 * ca3 - c1 * sa3      # sin(theta - alpha3)
            out = out + p.K3 * (gs2 * (gc1 * cphi - gs1 * sphi)
                                - gc2 * (gs1 * cphi + gc1 * sphi))
        return out

    def rhs(self, coords):
        """Coordinate form of the phase-difference vector field (complex-safe)."""
        coords = np.asarray(coords)
        M = self.modes
        v = coords[:M] @ self._sin_kx + coords[M:] @ self._one_minus_cos_kx
        F = self._continuum_rhs(self._theta0 + v)
        fhat = np.fft.fft(F) / self.grid
        c_plus = fhat[1:M + 1]
        c_minus = fhat[-1:-M - 1:-1]
        sin_coeff = 1j * (c_plus - c_minus)
        cos_coeff = c_plus + c_minus
        return np.concatenate([sin_coeff, -cos_coeff])

    def linearization(self, step: float = 1e-6) -> np.ndarray:
        """Jacobian at the twisted state by central differences (real 2M x 2M)."""
        n = 2 * self.modes
        A = np.empty((n, n))
        e = np.zeros(n)
        for j in range(n):
            e[j] = step
            A[:, j] = (self.rhs(e) - self.rhs(-e)).real / (2.0 * step)
            e[j] = 0.0
        return A

    def critical_eigensystem(self, ell: int):
        """Eigen-data of the mode-ell block: (lam, v, v_dual, A).

        `v` is normalized to the fixed convention v = w_ell + i u_ell
        (unit w-coordinate, +i u-coordinate), `lam` its eigenvalue
        (imaginary part of either sign), and `v_dual` the left functional
        with <v, v_dual> = 1 that annihilates every other eigenvector.
        """
        A = self.linearization()
        M = self.modes
        vals, vecs = np.linalg.eig(A)
        weight = (np.abs(vecs[ell - 1, :]) ** 2 + np.abs(vecs[M + ell - 1, :]) ** 2) \
            / (np.abs(vecs) ** 2).sum(axis=0)
        block = np.flatnonzero(weight > 0.5)
        if block.size == 0:
            raise NumericsError(f"could not isolate the mode-{ell} block eigenvector")
        cand = None
        for j in block:
            vec = vecs[:, j]
            if abs(vec[M + ell - 1]) < 1e-12:
                continue
            if (vec[ell - 1] / vec[M + ell - 1]).imag > 0.0:
                cand = j
                break
        if cand is None:
            raise NumericsError(f"mode {ell} has no oscillatory eigenpair")
        lam = vals[cand]
        v = vecs[:, cand]
        v = v / v[M + ell - 1]

        lvals, lvecs = np.linalg.eig(A.T)
        j = int(np.argmin(np.abs(lvals - lam)))
        if abs(lvals[j] - lam) > 1e-7 * max(1.0, abs(lam)):
            raise NumericsError("left/right eigenvalue mismatch in the dual construction")
        dual = lvecs[:, j]
        dual = dual / (dual @ v)
        return lam, v, dual, A


def zeta_oracle(params: ModelParams, ell: int, modes: int = 8,
                fd_step: float = 1e-4, grid: int = 256) -> complex:
    """Third-order Hopf coefficient from the truncated vector field alone.

    Evaluates the normal-form pairing

        zeta = -<D3[v, v, vbar], v'> - <D2[vbar, (2 i kappa - A)^{-1} D2[v, v]], v'>
               + 2 <D2[v, A^{-1} D2[v, vbar]], v'>

    with all derivatives taken by central finite differences of the
    Galerkin right-hand side (step fd_step, Richardson-extrapolated over
    fd_step and fd_step/2), kappa = Im(lambda_ell), and v the critical
    eigenvector of the numerically assembled linearization. Independent of
    the closed forms in every ingredient.
    """
    if modes < max(8, 2 * ell + 2):
        raise ConfigError("modes must be >= max(8, 2*ell + 2)")
    sys = PhaseDifferenceSystem(params, modes=modes, grid=grid)
    lam, v, dual, A = sys.critical_eigensystem(ell)
    kappa = lam.imag
    if abs(kappa) < 1e-12:
        raise NumericsError(f"mode {ell} is non-oscillatory; zeta undefined")
    g = sys.rhs

    def c2(d, h):
        return (g(h * d) + g(-h * d)) / (h * h)

    def c3(d, h):
        return (g(2 * h * d) - 2.0 * g(h * d) + 2.0 * g(-h * d) - g(-2 * h * d)) / (2.0 * h ** 3)

    def richardson(stencil, d):
        return (4.0 * stencil(d, fd_step / 2.0) - stencil(d, fd_step)) / 3.0

    def d2(a, b):
        return (richardson(c2, a + b) - richardson(c2, a - b)) / 4.0

    def d3(a, b, c):
        return (richardson(c3, a + b + c) - richardson(c3, a + b - c)
                - richardson(c3, a - b + c) + richardson(c3, a - b - c)) / 24.0

    vbar = np.conj(v)
    n = A.shape[0]
    eye = np.eye(n)

    d2_vv = d2(v, v)
    resolvent_arg = np.linalg.solve(2j * kappa * eye - A, d2_vv)
    d2_vvbar = d2(v, vbar)
    inv_arg = np.linalg.solve(A.astype(complex), d2_vvbar)

    term3 = dual @ d3(v, v, vbar)
    term2a = dual @ d2(vbar, resolvent_arg)
    term2b = dual @ d2(v, inv_arg)
    return complex(-term3 - term2a + 2.0 * term2b)


# ----------------------------------------------------------------------
# classification and first-order predictions
# ----------------------------------------------------------------------

def hopf_classify(params: ModelParams, free: str, bracket,
                  kmax: int = 8, dparam_step: float = 1e-6) -> HopfData:
    """Locate one Hopf point along `free` and assemble its normal-form data.

    The eigenvalue's parameter derivative comes from a central difference
    of the closed-form spectrum across the located root; zeta from the
    closed forms; the branch side from the sign of the parameter curvature
    Re(zeta) / Re(dlambda/dparam).
    """
    point = locate_hopf(params, free, bracket, q=1, kmax=kmax)
    ell = point.mode.ell
    if ell not in (1, 2, 3):
        raise NumericsError(f"no closed-form zeta for ell = {ell}")
    root = point.param_value
    at_root = _with_free(params, free, root)

    sign = 1 if twist_spectrum(at_root, 1, kmax).lam_plus(ell).imag > 0 else -1

    def lam_branch(p):
        spec = twist_spectrum(_with_free(params, free, p), 1, kmax)
        return spec.lam_plus(ell) if sign > 0 else spec.lam_minus(ell)

    h = dparam_step * max(1.0, abs(root))
    dlam = (lam_branch(root + h) - lam_branch(root - h)) / (2.0 * h)
    if dlam.real == 0.0:
        raise NumericsError("Re(dlambda/dparam) = 0: parameter curvature undefined")
    zeta = zeta_closed_form(at_root, ell)
    d2 = zeta.real / dlam.real
    return HopfData(
        ell=ell, param_name=free, param_value=root, lam=point.mode.lam,
        dlambda_dparam=dlam, zeta=zeta, d2param_dr2=d2,
        drift_speed=point.mode.lam.imag / (TAU * ell),
        criticality="supercritical" if zeta.real > 0 else "subcritical",
        warnings=point.warnings,
    )


def predict_profile(hopf: HopfData, r: float, N: int) -> tuple[np.ndarray, float]:
    """First-order phase profile of the emergent wave at amplitude r.

    theta(x) = 2 pi x - 2 r cos(2 pi ell x) on N uniform grid points,
    drifting at `hopf.drift_speed`.
    """
    x = np.arange(N) / N
    theta = TAU * x - 2.0 * r * np.cos(TAU * hopf.ell * x)
    return theta, hopf.drift_speed


def write_hopf_json(hopf: HopfData, path):
    data = {
        "ell": hopf.ell,
        "param_name": hopf.param_name,
        "param_value": hopf.param_value,
        "lambda": {"re": hopf.lam.real, "im": hopf.lam.imag},
        "dlambda_dparam": {"re": hopf.dlambda_dparam.real, "im": hopf.dlambda_dparam.imag},
        "zeta": {"re": hopf.zeta.real, "im": hopf.zeta.imag},
        "d2param_dr2": hopf.d2param_dr2,
        "drift_speed": hopf.drift_speed,
        "criticality": hopf.criticality,
        "warnings": list(hopf.warnings),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
