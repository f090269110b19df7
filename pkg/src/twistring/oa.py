"""Mean-field traveling-wave machinery.

The coherent dynamics of the ring closes on a complex field z(x, t); a
wave moving at speed s with rotation frequency Omega corresponds to a
periodic profile a(x) of unit modulus solving the complex Riccati
equation driven by the five-coefficient mean field w(x). Periodic
solutions come from the fixed points of the period map, which is a
Mobius transformation of the disk; the feasibility margin
|b| - |sin(theta/2)| decides whether those fixed points sit on the unit
circle and hence whether the solution operator exists.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _riccati
from .errors import BlowupError, ConfigError, NumericsError, OperatorUndefinedError
from .model import TAU, ModelParams

__all__ = [
    "MeanField", "MobiusMap", "WaveProfile", "oa_rhs", "riccati_solve",
    "mobius_of", "solution_operator_U", "unstable_solution_operator",
    "write_profile_csv", "RICCATI_RTOL", "RICCATI_ATOL",
]

# Local error control for the Riccati integration. Near the feasibility
# boundary the fixed-point construction amplifies trajectory errors by
# roughly 1/margin, so the tolerance sits one order below the 1e-12 that
# plain trajectory accuracy would need.
RICCATI_RTOL = 1e-13
RICCATI_ATOL = 1e-13


@dataclass(frozen=True)
class MeanField:
    """w(x) = w1 + w2 cos(2 pi x) + w3 sin(2 pi x) + w4 cos(4 pi x) + w5 sin(4 pi x)."""

    w_hat: np.ndarray  # 5 complex coefficients

    def __post_init__(self):
        arr = np.asarray(self.w_hat, dtype=complex)
        if arr.shape != (5,):
            raise ConfigError("MeanField needs exactly 5 complex coefficients")
        object.__setattr__(self, "w_hat", arr)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        w = (self.w_hat[0]
             + self.w_hat[1] * np.cos(TAU * x) + self.w_hat[2] * np.sin(TAU * x)
             + self.w_hat[3] * np.cos(2 * TAU * x) + self.w_hat[4] * np.sin(2 * TAU * x))
        return w if w.ndim else complex(w)


@dataclass(frozen=True)
class MobiusMap:
    """z -> e^{i theta} (z + b) / (conj(b) z + 1) on the unit disk."""

    b: complex
    theta: float

    def __call__(self, z):
        return np.exp(1j * self.theta) * (z + self.b) / (np.conj(self.b) * z + 1.0)

    @property
    def margin(self) -> float:
        """Feasibility margin |b| - |sin(theta/2)|; fixed points are on the
        unit circle iff it is positive."""
        return abs(self.b) - abs(math.sin(0.5 * self.theta))

    def fixed_points(self) -> tuple[complex, complex]:
        """Both fixed points (on the unit circle iff margin > 0)."""
        half = np.exp(0.5j * self.theta)
        s = math.sin(0.5 * self.theta)
        disc = np.sqrt(complex(abs(self.b) ** 2 - s * s))
        babs2 = abs(self.b) ** 2
        if babs2 == 0.0:
            raise NumericsError("b = 0: fixed points at 0 and infinity")
        z_minus = (1j * s - disc) / babs2 * self.b * half
        z_plus = (1j * s + disc) / babs2 * self.b * half
        return z_minus, z_plus


@dataclass(frozen=True)
class WaveProfile:
    """Unit-modulus profile sampled on x_j = j/M, with Theta = arg a."""

    x: np.ndarray
    a: np.ndarray
    ratio: float            # Omega / s
    stable_side: str        # 'stable' | 'unstable' (w.r.t. the mean-field dynamics)

    @property
    def theta(self) -> np.ndarray:
        return np.angle(self.a)


def oa_rhs(z: np.ndarray, params: ModelParams) -> np.ndarray:
    """Right-hand side of the mean-field evolution for samples of z(x).

    Convolutions with the three-harmonic kernel are evaluated by their
    exact projection onto {1, cos, sin}; the pairings use the uniform-grid
    mean (spectrally accurate for periodic samples).
    """
    z = np.asarray(z, dtype=complex)
    M = z.size
    x = np.arange(M) / M
    c1, s1 = np.cos(TAU * x), np.sin(TAU * x)

    def conv(u):
        m0 = u.mean()
        cu = (u * c1).mean()
        su = (u * s1).mean()
        return (m0 + (params.A * cu - params.B * su) * c1
                + (params.A * su + params.B * cu) * s1)

    e2 = np.exp(1j * params.alpha2)
    e3 = np.exp(1j * params.alpha3)
    gz = conv(z)
    gzbar = conv(np.conj(z))
    out = 0.5 * params.K2 * (e2 * gz - z * z * gzbar / e2)
    if params.K3 != 0.0:
        gz2 = conv(z * z)
        gzbar2 = conv(np.conj(z) * np.conj(z))
        out = out + 0.5 * params.K3 * (e3 * gz2 * gzbar - z * z * gzbar2 * gz / e3)
    if params.omega != 0.0:
        out = out + 1j * params.omega * z
    return out


def _check_status(status: int, context: str):
    if status == _riccati.BLOWUP:
        raise BlowupError(f"{context}: |a| exceeded 1e6 (no periodic solution this way)")
    if status == _riccati.STEP_UNDERFLOW:
        raise NumericsError(f"{context}: step size underflow")


def riccati_solve(w: MeanField, ratio: float, a0: complex, x_span,
                  rtol: float = RICCATI_RTOL, atol: float = RICCATI_ATOL) -> complex:
    """Integrate a' = w + i*ratio*a - conj(w) a^2 over x_span; returns a(x_end).

    Backward spans (x_end < x_start) are allowed; blow-up raises.
    """
    if not math.isfinite(ratio):
        raise ConfigError("ratio = Omega/s must be finite (s != 0)")
    y0 = np.zeros(11, np.complex128)
    y0[0] = a0
    y, status = _riccati.integrate(w.w_hat, float(ratio), y0,
                                   float(x_span[0]), float(x_span[1]), rtol, atol)
    _check_status(status, "riccati_solve")
    return complex(y[0])


def mobius_of(w: MeanField, ratio: float,
              rtol: float = RICCATI_RTOL, atol: float = RICCATI_ATOL) -> MobiusMap:
    """Period map of the Riccati flow as a Mobius transformation.

    zeta1 is the time-one image of 1, zeta0 the backward time-one image of
    0; then b = -zeta0 and e^{i theta} = (conj(zeta0) - 1)/(zeta0 - 1) * zeta1.
    """
    zeta1 = riccati_solve(w, ratio, 1.0 + 0.0j, (0.0, 1.0), rtol, atol)
    zeta0 = riccati_solve(w, ratio, 0.0 + 0.0j, (0.0, -1.0), rtol, atol)
    if abs(zeta1) - 1.0 > 1e-8 or 1.0 - abs(zeta1) > 1e-8:
        raise NumericsError(f"|zeta1| = {abs(zeta1):.12f} deviates from 1 beyond 1e-8")
    if abs(zeta0 - 1.0) < 1e-12:
        raise NumericsError("degenerate period map: zeta0 = 1")
    phase = (np.conj(zeta0) - 1.0) / (zeta0 - 1.0) * zeta1
    return MobiusMap(b=-zeta0, theta=float(np.angle(phase)))


def _initial_point(mob: MobiusMap, s_sign: int, branch: str) -> complex:
    if mob.margin <= 0.0:
        raise OperatorUndefinedError(mob.margin)
    z_minus, z_plus = mob.fixed_points()
    want_minus = (s_sign > 0) if branch == "stable" else (s_sign < 0)
    return z_minus if want_minus else z_plus


def _integrates_backward(s_sign: int, branch: str) -> bool:
    """Period direction in which the selected fixed point attracts.

    The stable wave at s > 0 sits on the flow-unstable periodic solution;
    integrating the period backward turns it attracting, so the start-point
    error decays along the profile instead of being amplified by the orbit
    multiplier (which blows up toward the feasibility boundary).
    """
    flow_unstable = (branch == "stable") == (s_sign > 0)
    return flow_unstable


def _build_profile(w: MeanField, ratio: float, a_star: complex, M: int,
                   branch: str, backward: bool, rtol: float, atol: float) -> WaveProfile:
    sign = -1.0 if backward else 1.0
    xs_path = sign * np.arange(M + 1) / M
    a_path, status = _riccati.integrate_samples(w.w_hat, float(ratio), a_star,
                                                xs_path, rtol, atol)
    _check_status(status, "solution operator")
    closure = abs(a_path[-1] - a_path[0])
    if closure > 1e-8:
        raise NumericsError(f"profile not periodic: |a(1) - a(0)| = {closure:.3e}")
    mod_dev = float(np.max(np.abs(np.abs(a_path) - 1.0)))
    if mod_dev > 1e-8:
        raise NumericsError(f"profile left the unit circle by {mod_dev:.3e}")
    a_out = np.empty(M, complex)
    a_out[0] = a_path[0]
    if backward:
        # path visited 0, -1/M, ..., -1; by periodicity a(-k/M) = a((M-k)/M)
        a_out[1:] = a_path[1:M][::-1]
    else:
        a_out[1:] = a_path[1:M]
    return WaveProfile(x=np.arange(M) / M, a=a_out, ratio=float(ratio),
                       stable_side=branch)


def solution_operator_U(w: MeanField, ratio: float, s_sign: int, M: int = 512,
                        rtol: float = RICCATI_RTOL, atol: float = RICCATI_ATOL) -> WaveProfile:
    """Unit-modulus periodic profile of the wave that is stable for the
    mean-field dynamics.

    For s > 0 this is the flow-unstable fixed point of the period map (the
    moving frame reverses stability), for s < 0 the flow-stable one.
    Raises OperatorUndefinedError when |b| <= |sin(theta/2)| - the branch
    termination signal.
    """
    if s_sign not in (1, -1):
        raise ConfigError("s_sign must be +1 or -1")
    mob = mobius_of(w, ratio, rtol, atol)
    a_star = _initial_point(mob, s_sign, "stable")
    return _build_profile(w, ratio, a_star, M, "stable",
                          _integrates_backward(s_sign, "stable"), rtol, atol)


def unstable_solution_operator(w: MeanField, ratio: float, s_sign: int, M: int = 512,
                               rtol: float = RICCATI_RTOL, atol: float = RICCATI_ATOL) -> WaveProfile:
    """Companion operator returning the other fixed point's profile
    (waves unstable for the mean-field dynamics)."""
    if s_sign not in (1, -1):
        raise ConfigError("s_sign must be +1 or -1")
    mob = mobius_of(w, ratio, rtol, atol)
    a_star = _initial_point(mob, s_sign, "unstable")
    return _build_profile(w, ratio, a_star, M, "unstable",
                          _integrates_backward(s_sign, "unstable"), rtol, atol)


def wave_pairings(w: MeanField, ratio: float, s_sign: int,
                  rtol: float = RICCATI_RTOL, atol: float = RICCATI_ATOL):
    """One-pass evaluation used by the self-consistency equations.

    Returns (Psi[5], Phi[5], margin, a_end, a_star): the pairings
    <a, psi_k> and <a^2, psi_k> accumulated by the integrator's augmented
    state, the feasibility margin, and the profile endpoints.
    """
    mob = mobius_of(w, ratio, rtol, atol)
    a_star = _initial_point(mob, s_sign, "stable")
    y0 = np.zeros(11, np.complex128)
    y0[0] = a_star
    backward = _integrates_backward(s_sign, "stable")
    x_end = -1.0 if backward else 1.0
    y, status = _riccati.integrate(w.w_hat, float(ratio), y0, 0.0, x_end, rtol, atol)
    _check_status(status, "wave_pairings")
    if abs(y[0] - a_star) > 1e-8:
        raise NumericsError(f"periodic closure failed: {abs(y[0] - a_star):.3e}")
    quad_sign = -1.0 if backward else 1.0
    return (quad_sign * y[1:6].copy(), quad_sign * y[6:11].copy(),
            mob.margin, complex(y[0]), complex(a_star))


def write_profile_csv(profile: WaveProfile, path):
    """Columns x, Re(a), Im(a), Theta (radians in (-pi, pi])."""
    theta = profile.theta
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,re_a,im_a,theta\n")
        for xj, aj, tj in zip(profile.x, profile.a, theta):
            fh.write("%.17g,%.17g,%.17g,%.17g\n" % (xj, aj.real, aj.imag, tj))
