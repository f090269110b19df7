"""Adaptive integration of the traveling-wave Riccati equation.

The scalar complex ODE a'(x) = w(x) + i*rho*a - conj(w(x))*a^2 is driven
by a five-coefficient trigonometric mean field w. The state is augmented
with the ten running pairings <a, psi_k>, <a^2, psi_k> needed by the
self-consistency equations, so quadrature accuracy rides on the same
error control as the trajectory itself. The stepper is an 8th-order
Dormand-Prince pair (the 8(5,3) scheme, coefficients taken from scipy's
tables): high order keeps the step count small, which keeps the
accumulated error near the roundoff floor at tolerances of 1e-13 - the
self-consistency residuals need that headroom because the downstream
fixed-point construction amplifies trajectory errors by roughly one over
the feasibility margin. Backward spans integrate with a negative step.
"""

import math

import numpy as np
from scipy.integrate._ivp import dop853_coefficients as _dc

try:
    from numba import njit
except ImportError:      # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        return wrap if not (args and callable(args[0])) else wrap(args[0])

TAU = 2.0 * math.pi

OK = 0
BLOWUP = 1
STEP_UNDERFLOW = 2

_A_MAX = 1e6
_NS = 12  # stages of the 8(5,3) pair, error stage uses one extra evaluation

_RK_A = np.ascontiguousarray(_dc.A[:_NS, :_NS])
_RK_B = np.ascontiguousarray(_dc.B)
_RK_C = np.ascontiguousarray(_dc.C[:_NS])
_RK_E3 = np.ascontiguousarray(_dc.E3)
_RK_E5 = np.ascontiguousarray(_dc.E5)


@njit(cache=True)
def _field(x, y, what, rho, dy):
    """dy/dx for the augmented state y = (a, I1..I5, J1..J5)."""
    c1 = math.cos(TAU * x)
    s1 = math.sin(TAU * x)
    c2 = 2.0 * c1 * c1 - 1.0
    s2 = 2.0 * s1 * c1
    w = what[0] + what[1] * c1 + what[2] * s1 + what[3] * c2 + what[4] * s2
    a = y[0]
    a2 = a * a
    dy[0] = w + 1j * rho * a - np.conj(w) * a2
    dy[1] = a
    dy[2] = a * c1
    dy[3] = a * s1
    dy[4] = a * c2
    dy[5] = a * s2
    dy[6] = a2
    dy[7] = a2 * c1
    dy[8] = a2 * s1
    dy[9] = a2 * c2
    dy[10] = a2 * s2


@njit(cache=True)
def integrate(what, rho, y0, x0, x1, rtol, atol):
    """Adaptive 8(5,3) step from x0 to x1 (either direction).

    Returns (y_end, status). status: 0 ok, 1 blow-up, 2 step underflow.
    """
    n = 11
    y = y0.copy()
    if x1 == x0:
        return y, OK
    direction = 1.0 if x1 > x0 else -1.0
    span = abs(x1 - x0)
    h = direction * min(span, 5e-2 / (1.0 + abs(rho) / 6.0))
    x = x0

    K = np.empty((_NS + 1, n), np.complex128)
    ytmp = np.empty(n, np.complex128)
    ynew = np.empty(n, np.complex128)

    _field(x, y, what, rho, K[0])
    h_min = 1e-14 * max(1.0, abs(x0), abs(x1))
    for _ in range(5_000_000):
        if direction * (x + h - x1) > 0.0:
            h = x1 - x
        for s in range(1, _NS):
            for i in range(n):
                acc = 0.0 + 0.0j
                for j in range(s):
                    aij = _RK_A[s, j]
                    if aij != 0.0:
                        acc += aij * K[j, i]
                ytmp[i] = y[i] + h * acc
            _field(x + _RK_C[s] * h, ytmp, what, rho, K[s])
        for i in range(n):
            acc = 0.0 + 0.0j
            for j in range(_NS):
                bj = _RK_B[j]
                if bj != 0.0:
                    acc += bj * K[j, i]
            ynew[i] = y[i] + h * acc
        _field(x + h, ynew, what, rho, K[_NS])

        err5 = 0.0
        err3 = 0.0
        for i in range(n):
            e5 = 0.0 + 0.0j
            e3 = 0.0 + 0.0j
            for j in range(_NS + 1):
                if _RK_E5[j] != 0.0:
                    e5 += _RK_E5[j] * K[j, i]
                if _RK_E3[j] != 0.0:
                    e3 += _RK_E3[j] * K[j, i]
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            q5 = abs(e5) / sc
            q3 = abs(e3) / sc
            err5 += q5 * q5
            err3 += q3 * q3
        denom = err5 + 0.01 * err3
        if denom > 0.0:
            err = abs(h) * err5 / math.sqrt(denom * n)
        else:
            err = 0.0

        if not math.isfinite(err):
            h *= 0.25
            if abs(h) < h_min:
                return y, STEP_UNDERFLOW
            continue
        if err <= 1.0:
            x += h
            for i in range(n):
                y[i] = ynew[i]
                K[0, i] = K[_NS, i]
            if abs(y[0]) > _A_MAX:
                return y, BLOWUP
            if direction * (x - x1) >= 0.0:
                return y, OK
            factor = 6.0 if err == 0.0 else min(6.0, max(0.33, 0.9 * err ** (-1.0 / 8.0)))
            h *= factor
        else:
            h *= max(0.33, 0.9 * err ** (-1.0 / 8.0))
        if abs(h) < h_min:
            return y, STEP_UNDERFLOW
    return y, STEP_UNDERFLOW


@njit(cache=True)
def integrate_samples(what, rho, a0, xs, rtol, atol):
    """Integrate from xs[0], recording a(x) at every grid point in xs."""
    out = np.empty(xs.size, np.complex128)
    y = np.zeros(11, np.complex128)
    y[0] = a0
    out[0] = a0
    status = OK
    for j in range(1, xs.size):
        y, status = integrate(what, rho, y, xs[j - 1], xs[j], rtol, atol)
        out[j] = y[0]
        if status != OK:
            for jj in range(j + 1, xs.size):
                out[jj] = np.nan
            return out, status
    return out, status


@njit(cache=True)
def integrate_rk4(what, rho, a0, x0, x1, nsteps):
    """Fixed-step classical RK4 reference for the trajectory only."""
    h = (x1 - x0) / nsteps
    a = a0
    x = x0
    y = np.empty(11, np.complex128)
    dy = np.empty(11, np.complex128)
    for _ in range(nsteps):
        y[0] = a
        _field(x, y, what, rho, dy)
        q1 = dy[0]
        y[0] = a + 0.5 * h * q1
        _field(x + 0.5 * h, y, what, rho, dy)
        q2 = dy[0]
        y[0] = a + 0.5 * h * q2
        _field(x + 0.5 * h, y, what, rho, dy)
        q3 = dy[0]
        y[0] = a + h * q3
        _field(x + h, y, what, rho, dy)
        q4 = dy[0]
        a = a + (h / 6.0) * (q1 + 2.0 * q2 + 2.0 * q3 + q4)
        x += h
    return a
