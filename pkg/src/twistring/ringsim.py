"""Finite-N ring simulation and trajectory diagnostics.

The right-hand side is evaluated in O(N): because the kernel has three
harmonics, every kernel-weighted convolution reduces to three global sums.
Phases are evolved unreduced (lifted to the real line) so winding numbers
stay exact; reduction mod 2 pi happens only when writing output.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import BlowupError, ConfigError
from .model import TAU, ModelParams

__all__ = [
    "Trajectory", "DriftEstimate", "rhs", "rhs_reference", "integrate",
    "perturb_twisted", "twisted_state", "estimate_drift",
    "write_trajectory_csv", "write_drift_json",
]


@dataclass(frozen=True)
class Trajectory:
    """Sampled phase trajectory; `states[i]` is the lifted phase vector at `times[i]`."""

    times: np.ndarray
    states: np.ndarray  # shape (len(times), N)
    params: ModelParams

    @property
    def N(self) -> int:
        return self.states.shape[1]


@dataclass(frozen=True)
class DriftEstimate:
    s: float
    Omega: float
    peak_correlation: float
    coherent: bool


def _site_angles(N: int) -> tuple[np.ndarray, np.ndarray]:
    phi = TAU * np.arange(N) / N
    return np.cos(phi), np.sin(phi)


def rhs(theta: np.ndarray, params: ModelParams,
        trig=None) -> np.ndarray:
    """Time derivative of all N phases in O(N).

    The pairwise term is Im(e^{i a2} e^{-i theta_k} C1(k)) and the triplet
    term Im(e^{i a3} e^{-i theta_k} C2(k) conj(C1(k))), where C_m(k) is the
    kernel-weighted mean of e^{i m theta} seen from site k; each C_m comes
    from three global sums against {1, cos, sin} of the site angle.
    """
    theta = np.asarray(theta, dtype=float)
    N = theta.size
    if N < 3:
        raise ConfigError("need at least N = 3 oscillators")
    cphi, sphi = _site_angles(N) if trig is None else trig

    z1 = np.exp(1j * theta)
    z2 = z1 * z1
    out = np.full(N, params.omega, dtype=float)
    e2 = complex(math.cos(params.alpha2), math.sin(params.alpha2))
    e3 = complex(math.cos(params.alpha3), math.sin(params.alpha3))

    def kernel_mean(z):
        s0 = z.mean()
        sc = (z * cphi).mean()
        ss = (z * sphi).mean()
        return (s0
                + params.A * (cphi * sc + sphi * ss)
                + params.B * (sphi * sc - cphi * ss))

    c1 = kernel_mean(z1)
    out += params.K2 * (e2 * np.conj(z1) * c1).imag
    if params.K3 != 0.0:
        c2 = kernel_mean(z2)
        out += params.K3 * (e3 * np.conj(z1) * c2 * np.conj(c1)).imag
    return out


def rhs_reference(theta: np.ndarray, params: ModelParams) -> np.ndarray:
    """Direct triple-loop evaluation, O(N^3). Oracle for `rhs`; small N only."""
    theta = np.asarray(theta, dtype=float)
    N = theta.size
    out = np.full(N, params.omega)
    for k in range(N):
        pair = 0.0
        for j in range(N):
            g = 1.0 + params.A * math.cos(TAU * (k - j) / N) + params.B * math.sin(TAU * (k - j) / N)
            pair += g * math.sin(theta[j] - theta[k] + params.alpha2)
        trip = 0.0
        for j in range(N):
            gj = 1.0 + params.A * math.cos(TAU * (k - j) / N) + params.B * math.sin(TAU * (k - j) / N)
            for l in range(N):
                gl = 1.0 + params.A * math.cos(TAU * (k - l) / N) + params.B * math.sin(TAU * (k - l) / N)
                trip += gj * gl * math.sin(2.0 * theta[j] - theta[l] - theta[k] + params.alpha3)
        out[k] += params.K2 * pair / N + params.K3 * trip / (N * N)
    return out


def twisted_state(q: int, N: int, beta: float = 0.0) -> np.ndarray:
    """Exact q-twisted profile theta_k = 2 pi q k / N + beta."""
    return TAU * q * np.arange(N) / N + beta


def perturb_twisted(q: int, ell: int, r: float, N: int) -> np.ndarray:
    """Twisted state plus the leading-order oscillatory eigenmode shape.

    theta_k = 2 pi q k / N - 2 r cos(2 pi ell k / N).
    """
    if ell < 1:
        raise ConfigError("ell must be >= 1")
    k = np.arange(N)
    return TAU * q * k / N - 2.0 * r * np.cos(TAU * ell * k / N)


def integrate(theta0: np.ndarray, params: ModelParams, T: float, dt: float = 1e-2,
              sample_every: int = 10) -> Trajectory:
    """Classical fixed-step RK4; deterministic for given inputs.

    Samples every `sample_every` steps (always including t = 0 and the final
    time). Aborts with a diagnostic if the state leaves the finite range.
    """
    if dt <= 0 or T <= 0:
        raise ConfigError("need dt > 0 and T > 0")
    if sample_every < 1:
        raise ConfigError("sample_every must be >= 1")
    theta = np.array(theta0, dtype=float)
    trig = _site_angles(theta.size)
    nsteps = int(round(T / dt))
    times = [0.0]
    states = [theta.copy()]
    for step in range(1, nsteps + 1):
        k1 = rhs(theta, params, trig)
        k2 = rhs(theta + 0.5 * dt * k1, params, trig)
        k3 = rhs(theta + 0.5 * dt * k2, params, trig)
        k4 = rhs(theta + dt * k3, params, trig)
        theta += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step % sample_every == 0 or step == nsteps:
            if not np.all(np.isfinite(theta)):
                raise BlowupError(f"non-finite phase at t = {step * dt:.6g}")
            times.append(step * dt)
            states.append(theta.copy())
    return Trajectory(times=np.array(times), states=np.array(states), params=params)


def _circular_shift_profile(z2: np.ndarray, z1: np.ndarray):
    """Best circular shift of z2 against z1: (shift in site units, |corr| at peak, degenerate?)."""
    N = z1.size
    F1 = np.fft.fft(z1)
    F2 = np.fft.fft(z2)
    corr = np.fft.ifft(F2 * np.conj(F1))  # corr[m] = (1/N) sum_k z2[k+m] conj(z1[k])
    mag = np.abs(corr)
    peak = float(mag.max())
    if peak == 0.0:
        return 0.0, 0.0, True
    if (mag.max() - mag.min()) < 1e-6 * peak:
        # uniform twist: every shift matches equally well
        return 0.0, peak, True
    m = int(np.argmax(mag))
    ym, y0, yp = mag[(m - 1) % N], mag[m], mag[(m + 1) % N]
    denom = ym - 2.0 * y0 + yp
    frac = 0.0 if denom == 0.0 else 0.5 * (ym - yp) / denom
    shift = m + frac
    if shift > N / 2:
        shift -= N
    return float(shift), peak, False


def estimate_drift(traj: Trajectory) -> DriftEstimate:
    """Drift speed and rotation frequency of a traveling profile.

    For each consecutive snapshot pair the spatial shift of e^{i theta} is
    located by circular cross-correlation (parabolic peak refinement), the
    shift is undone in Fourier space, and the remaining uniform phase
    advance gives the rotation. Accumulated shift / phase over the whole
    trajectory yield s and Omega. Snapshots must be close enough that the
    per-sample advance is below half a ring / half a turn.
    """
    if traj.times.size < 2:
        raise ConfigError("need at least two snapshots to estimate drift")
    N = traj.N
    z = np.exp(1j * traj.states)
    nu = np.fft.fftfreq(N, d=1.0 / N)  # integer mode numbers
    total_shift = 0.0
    total_phase = 0.0
    peaks = []
    for i in range(traj.times.size - 1):
        z1, z2 = z[i], z[i + 1]
        shift, peak, degenerate = _circular_shift_profile(z2, z1)
        peaks.append(peak / 1.0)
        if not degenerate:
            total_shift += shift
        back = np.fft.ifft(np.fft.fft(z2) * np.exp(-1j * TAU * nu * shift / N))
        advance = np.angle(np.mean(back * np.conj(z1)))
        total_phase += advance
    T = traj.times[-1] - traj.times[0]
    s = (total_shift / N) / T
    Omega = total_phase / T
    peak_corr = float(np.mean(peaks))
    return DriftEstimate(s=float(s), Omega=float(Omega),
                         peak_correlation=peak_corr,
                         coherent=bool(peak_corr >= 0.9))


def write_trajectory_csv(traj: Trajectory, path):
    """Columns t, theta_0..theta_{N-1}; phases reduced to [0, 2 pi)."""
    N = traj.N
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t," + ",".join(f"theta_{k}" for k in range(N)) + "\n")
        for t, state in zip(traj.times, traj.states):
            reduced = np.mod(state, TAU)
            fh.write("%.17g," % t + ",".join("%.17g" % v for v in reduced) + "\n")


def write_drift_json(estimate: DriftEstimate, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"s": estimate.s, "Omega": estimate.Omega,
                   "peak_correlation": estimate.peak_correlation}, fh, indent=2, sort_keys=True)
        fh.write("\n")
