"""Self-consistent traveling waves and their parameter continuation.

A wave is the unknown tuple (s, Omega, w_hat[5]) whose mean field
reproduces itself through the periodic Riccati solution: five complex
equations plus two pinning conditions (Im w2 = Re w3 = 0) that remove the
spatial-shift and phase-rotation symmetries. Branches in B or K3 are
traced by pseudo-arclength continuation with secant predictor, bordered
Newton corrector, fold bookkeeping, and termination at the feasibility
singularity |b| - |sin(theta/2)| -> 0 or at s -> 0.
"""

import cmath
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, ConvergenceError, NumericsError, OperatorUndefinedError
from .hopf import HopfData
from .model import TAU, ModelParams, twisted_frequency
from .oa import MeanField, WaveProfile, solution_operator_U, wave_pairings
from .spectral import _with_free

__all__ = [
    "WaveState", "BranchPoint", "Branch", "ContinuationControls",
    "sc_residual", "sc_residual_full", "newton_solve", "init_from_hopf",
    "hopf_start_param", "continue_branch", "profile_at", "pin_state",
    "apply_gauge", "ring_initial_condition", "write_branch_csv",
    "write_branch_manifest",
]

RESIDUAL_TOL = 1e-10
FD_STEP = 1e-6


@dataclass(frozen=True)
class WaveState:
    """Continuation unknowns: drift speed, rotation frequency, mean field."""

    s: float
    Omega: float
    w_hat: np.ndarray  # 5 complex

    def __post_init__(self):
        arr = np.asarray(self.w_hat, dtype=complex)
        if arr.shape != (5,):
            raise ConfigError("w_hat must hold 5 complex coefficients")
        object.__setattr__(self, "w_hat", arr)

    def to_vector(self) -> np.ndarray:
        v = np.empty(12)
        v[0], v[1] = self.s, self.Omega
        v[2::2] = self.w_hat.real
        v[3::2] = self.w_hat.imag
        return v

    @classmethod
    def from_vector(cls, v) -> "WaveState":
        v = np.asarray(v, dtype=float)
        return cls(s=float(v[0]), Omega=float(v[1]), w_hat=v[2::2] + 1j * v[3::2])

    @property
    def ratio(self) -> float:
        return self.Omega / self.s


@dataclass(frozen=True)
class BranchPoint:
    param_name: str
    param_value: float
    state: WaveState
    residual_norm: float
    mobius_margin: float
    tangent: np.ndarray | None = None


@dataclass(frozen=True)
class Branch:
    points: list
    folds: list            # indices of points right after a tangent reversal
    termination: str       # 'param_limit' | 'singularity' | 'step_failure'
    termination_detail: str = ""
    param_name: str = "B"


@dataclass(frozen=True)
class ContinuationControls:
    ds0: float = 0.01
    ds_min: float = 1e-5
    ds_max: float = 0.05
    window: tuple = (-math.inf, math.inf)
    max_points: int = 2000
    margin_stop: float = 1e-4
    s_stop: float = 1e-4
    direction: int = 1
    grow_after: int = 3
    newton_iters: int = 10


def sc_residual_full(state: WaveState, params: ModelParams):
    """12 residuals plus diagnostics (feasibility margin).

    The five complex equations read 2 s w_k + RHS_k = 0 with the pairings
    Psi_k = <a, psi_k>, Phi_k = <a^2, psi_k> of the reconstructed profile,
    followed by the two pinning values Im w2, Re w3.
    """
    if state.s == 0.0:
        raise ConfigError("s = 0: traveling-wave formulation undefined")
    w = MeanField(state.w_hat)
    s_sign = 1 if state.s > 0 else -1
    Psi, Phi, margin, _, _ = wave_pairings(w, state.ratio, s_sign)
    A, B = params.A, params.B
    a1, a2, a3 = Psi[0], A * Psi[1] - B * Psi[2], A * Psi[2] + B * Psi[1]
    b1, b2, b3 = Phi[0], A * Phi[1] - B * Phi[2], A * Phi[2] + B * Phi[1]
    e2 = cmath.exp(1j * params.alpha2)
    e3 = cmath.exp(1j * params.alpha3)
    K2, K3 = params.K2, params.K3
    two_s = 2.0 * state.s
    w1, w2, w3, w4, w5 = state.w_hat
    R = np.empty(5, complex)
    R[0] = two_s * w1 + K2 * e2 * a1 + K3 * e3 * (np.conj(a1) * b1 + 0.5 * (np.conj(a2) * b2 + np.conj(a3) * b3))
    R[1] = two_s * w2 + K2 * e2 * a2 + K3 * e3 * (np.conj(a2) * b1 + np.conj(a1) * b2)
    R[2] = two_s * w3 + K2 * e2 * a3 + K3 * e3 * (np.conj(a3) * b1 + np.conj(a1) * b3)
    R[3] = two_s * w4 + 0.5 * K3 * e3 * (np.conj(a2) * b2 - np.conj(a3) * b3)
    R[4] = two_s * w5 + 0.5 * K3 * e3 * (np.conj(a3) * b2 + np.conj(a2) * b3)
    res = np.empty(12)
    res[0:10:2] = R.real
    res[1:10:2] = R.imag
    res[10] = w2.imag
    res[11] = w3.real
    return res, float(margin)


def sc_residual(state: WaveState, params: ModelParams) -> np.ndarray:
    return sc_residual_full(state, params)[0]


def _fd_jacobian(func, x, h0=FD_STEP):
    n = x.size
    f0 = func(x)
    J = np.empty((f0.size, n))
    for j in range(n):
        h = h0 * max(1.0, abs(x[j]))
        xp = x.copy(); xp[j] += h
        xm = x.copy(); xm[j] -= h
        J[:, j] = (func(xp) - func(xm)) / (2.0 * h)
    return J, f0


def newton_solve(guess: WaveState, params: ModelParams, tol: float = RESIDUAL_TOL,
                 max_iter: int = 50) -> WaveState:
    """Damped Newton on the 12-dimensional pinned system.

    Central finite-difference Jacobian (step 1e-6 scaled per coordinate);
    converged when the residual infinity norm drops below `tol`.
    """
    x = guess.to_vector()

    def fun(v):
        return sc_residual(WaveState.from_vector(v), params)

    try:
        r = fun(x)
    except OperatorUndefinedError as exc:
        raise ConvergenceError(f"left feasibility region at the initial guess "
                               f"(margin {exc.margin:.3e})") from exc
    for _ in range(max_iter):
        norm = float(np.max(np.abs(r)))
        if norm <= tol:
            return WaveState.from_vector(x)
        J, _ = _fd_jacobian(fun, x)
        cond = np.linalg.cond(J)
        if not np.isfinite(cond) or cond > 1e12:
            raise ConvergenceError(f"Jacobian singular (cond ~ {cond:.2e})")
        step = np.linalg.solve(J, -r)
        lam = 1.0
        for _ in range(6):
            try:
                r_new = fun(x + lam * step)
            except (OperatorUndefinedError, NumericsError):
                lam *= 0.5
                continue
            if np.max(np.abs(r_new)) < norm or lam < 0.1:
                x = x + lam * step
                r = r_new
                break
            lam *= 0.5
        else:
            raise ConvergenceError("no convergence: damping exhausted")
    norm = float(np.max(np.abs(r)))
    if norm <= tol:
        return WaveState.from_vector(x)
    raise ConvergenceError(f"no convergence after {max_iter} iterations "
                           f"(residual {norm:.3e})")


def apply_gauge(state: WaveState, shift: float, phase: float) -> WaveState:
    """Spatial shift x -> x + shift and phase rotation a -> e^{i phase} a."""
    w = state.w_hat
    e = cmath.exp(1j * phase)
    m1p = (w[1] - 1j * w[2]) * cmath.exp(1j * TAU * shift) * e
    m1m = (w[1] + 1j * w[2]) * cmath.exp(-1j * TAU * shift) * e
    m2p = (w[3] - 1j * w[4]) * cmath.exp(2j * TAU * shift) * e
    m2m = (w[3] + 1j * w[4]) * cmath.exp(-2j * TAU * shift) * e
    new = np.array([
        w[0] * e,
        0.5 * (m1p + m1m), 0.5j * (m1p - m1m),
        0.5 * (m2p + m2m), 0.5j * (m2p - m2m),
    ])
    return replace(state, w_hat=new)


def pin_state(state: WaveState) -> WaveState:
    """Use the two gauge freedoms to enforce Im w2 = Re w3 = 0 exactly.

    Writes u = w2 - i w3 and v = w2 + i w3; the pinning holds iff both are
    real, fixed by principal choices of the shift and phase angles.
    """
    w = state.w_hat
    u = w[1] - 1j * w[2]
    v = w[1] + 1j * w[2]
    if abs(u) < 1e-15 and abs(v) < 1e-15:
        return state
    if abs(v) < 1e-15 * max(1.0, abs(u)):
        g1 = -cmath.phase(u)
        phase, shift = 0.0, g1 / TAU
    elif abs(u) < 1e-15 * max(1.0, abs(v)):
        g2 = -cmath.phase(v)
        phase, shift = 0.0, -g2 / TAU
    else:
        g1 = -cmath.phase(u)   # want phase + TAU*shift = g1 (mod pi)
        g2 = -cmath.phase(v)   # want phase - TAU*shift = g2 (mod pi)
        # principal solution, folding each condition to (-pi/2, pi/2]
        d1 = (g1 + math.pi / 2) % math.pi - math.pi / 2
        d2 = (g2 + math.pi / 2) % math.pi - math.pi / 2
        phase = 0.5 * (d1 + d2)
        shift = 0.5 * (d1 - d2) / TAU
    out = apply_gauge(state, shift, phase)
    w2, w3 = out.w_hat[1], out.w_hat[2]
    assert abs(w2.imag) < 1e-9 * max(1.0, abs(w2)) + 1e-12
    fixed = out.w_hat.copy()
    fixed[1] = complex(fixed[1].real, 0.0)
    fixed[2] = complex(0.0, fixed[2].imag)
    return replace(out, w_hat=fixed)


def init_from_hopf(hopf: HopfData, params_at_onset: ModelParams, r: float = 0.05) -> WaveState:
    """First-order wave seed at amplitude r near a located bifurcation.

    Builds the predicted profile a(x) = exp(i(2 pi x - 2 r cos(2 pi l x))),
    evaluates its mean field, projects onto the five basis functions, and
    gauge-fixes the result to the pinning conditions. The rotation
    frequency splits as Omega = Omega_twisted + 2 pi s: in the wave
    decomposition the moving frame carries one full turn of the profile.
    """
    ell = hopf.ell
    s = hopf.drift_speed
    if s == 0.0:
        raise ConfigError("degenerate onset: drift speed 0")
    p = params_at_onset
    M = 4096
    x = np.arange(M) / M
    a = np.exp(1j * (TAU * x - 2.0 * r * np.cos(TAU * ell * x)))
    c1, s1 = np.cos(TAU * x), np.sin(TAU * x)

    def conv(u):
        m0 = u.mean()
        cu = (u * c1).mean()
        su = (u * s1).mean()
        return (m0 + (p.A * cu - p.B * su) * c1 + (p.A * su + p.B * cu) * s1)

    e2 = cmath.exp(1j * p.alpha2)
    e3 = cmath.exp(1j * p.alpha3)
    w = (-(p.K2 / (2.0 * s)) * e2 * conv(a)
         - (p.K3 / (2.0 * s)) * e3 * conv(a * a) * conv(np.conj(a)))
    w_hat = np.array([
        w.mean(),
        2.0 * (w * c1).mean(),
        2.0 * (w * s1).mean(),
        2.0 * (w * np.cos(2 * TAU * x)).mean(),
        2.0 * (w * np.sin(2 * TAU * x)).mean(),
    ])
    Omega = twisted_frequency(p, 1) + TAU * s
    return pin_state(WaveState(s=s, Omega=Omega, w_hat=w_hat))


def hopf_start_param(hopf: HopfData, r: float = 0.05) -> float:
    """Parameter value predicted for the wave of amplitude r."""
    return hopf.param_value + 0.5 * hopf.d2param_dr2 * r * r


def _scales(vectors, floor=0.05):
    arr = np.abs(np.asarray(vectors))
    return np.maximum(arr.max(axis=0), floor)


def _extent_scales(y_first, y_cur, sigma_prev, floor=0.05):
    """Monotone running estimate of the branch extent per coordinate."""
    ext = np.abs(y_cur - y_first)
    return np.maximum(np.maximum(ext, sigma_prev), floor)


def continue_branch(start: BranchPoint, params: ModelParams,
                    controls: ContinuationControls = ContinuationControls()) -> Branch:
    """Pseudo-arclength continuation from a converged point.

    Secant-tangent predictor with a bordered Newton corrector on the
    13-dimensional system (12 residuals + scaled arclength condition),
    adaptive step with shrink x0.5 on failure / grow x1.3 after repeated
    easy successes. Folds are logged at tangent reversals of the parameter
    component; the trace stops at the parameter window, at feasibility
    margin < margin_stop, at |s| < s_stop, or on step failure at the
    minimum step.
    """
    name = start.param_name
    points = [start]
    folds = []
    termination = "step_failure"
    detail = "initial tangent failed"

    def aug_vec(state, p):
        return np.concatenate([state.to_vector(), [p]])

    def residual_y(y):
        state = WaveState.from_vector(y[:12])
        pp = _with_free(params, name, y[12])
        return sc_residual(state, pp)

    def margin_of(y):
        state = WaveState.from_vector(y[:12])
        pp = _with_free(params, name, y[12])
        return sc_residual_full(state, pp)[1]

    y_prev = None
    y_cur = aug_vec(start.state, start.param_value)

    # second point by a short natural-parameter step, for the secant tangent
    dp = controls.direction * max(1e-4, controls.ds0 * max(0.1, abs(start.param_value)))
    second = None
    for _ in range(12):
        try:
            p1 = start.param_value + dp
            st1 = newton_solve(WaveState.from_vector(y_cur[:12]), _with_free(params, name, p1))
            second = aug_vec(st1, p1)
            break
        except (ConvergenceError, NumericsError, OperatorUndefinedError):
            dp *= 0.5
    if second is None:
        return Branch(points=points, folds=folds, termination="step_failure",
                      termination_detail="could not take the first step", param_name=name)
    res1, margin1 = sc_residual_full(WaveState.from_vector(second[:12]),
                                     _with_free(params, name, second[12]))
    tangent0 = second - y_cur
    points.append(BranchPoint(param_name=name, param_value=float(second[12]),
                              state=WaveState.from_vector(second[:12]),
                              residual_norm=float(np.max(np.abs(res1))),
                              mobius_margin=margin1, tangent=tangent0.copy()))
    y_prev, y_cur = y_cur, second

    ds = controls.ds0
    easy = 0
    last_sign = None
    y_first = y_cur.copy()
    sigma = _scales([y_prev, y_cur])
    while len(points) < controls.max_points:
        sigma = _extent_scales(y_first, y_cur, sigma)
        t = (y_cur - y_prev) / sigma
        norm_t = np.linalg.norm(t)
        if norm_t == 0.0:
            termination, detail = "step_failure", "degenerate tangent"
            break
        t /= norm_t

        sign = math.copysign(1.0, t[12]) if t[12] != 0.0 else 0.0
        if last_sign is not None and sign != 0.0 and sign == -last_sign:
            folds.append(len(points) - 1)
        if sign != 0.0:
            last_sign = sign

        # budget checks on the current point
        cur_state = WaveState.from_vector(y_cur[:12])
        if not (controls.window[0] <= y_cur[12] <= controls.window[1]):
            termination, detail = "param_limit", f"{name} left window {controls.window}"
            break
        if abs(cur_state.s) < controls.s_stop:
            termination, detail = "singularity", "drift speed below s_stop"
            break
        if points[-1].mobius_margin < controls.margin_stop:
            termination, detail = "singularity", "feasibility margin below margin_stop"
            break

        stepped = False
        while ds >= controls.ds_min:
            y_pred = y_cur + ds * t * sigma
            y = y_pred.copy()
            ok = False
            try:
                def fun_aug(v):
                    return np.concatenate([residual_y(v), [t @ ((v - y_pred) / sigma)]])
                # full Jacobian at the predictor, then chord iterations; one
                # rebuild if the chord stalls
                J = None
                rebuilds = 0
                f0 = fun_aug(y)
                for _ in range(controls.newton_iters):
                    if np.max(np.abs(f0[:12])) <= RESIDUAL_TOL:
                        ok = True
                        break
                    if J is None:
                        J, _ = _fd_jacobian(fun_aug, y)
                    step = np.linalg.solve(J, -f0)
                    f_new = None
                    lam = 1.0
                    for _ in range(4):
                        try:
                            f_new = fun_aug(y + lam * step)
                            break
                        except (NumericsError, OperatorUndefinedError):
                            lam *= 0.5
                    if f_new is None:
                        raise ConvergenceError("corrector left the feasible region")
                    y = y + lam * step
                    if np.max(np.abs(f_new)) > 0.5 * np.max(np.abs(f0)) and rebuilds < 2:
                        J, _ = _fd_jacobian(fun_aug, y)
                        rebuilds += 1
                    f0 = f_new
                if not ok:
                    ok = np.max(np.abs(f0[:12])) <= RESIDUAL_TOL
            except (NumericsError, OperatorUndefinedError, ConvergenceError,
                    np.linalg.LinAlgError):
                ok = False
            if ok:
                stepped = True
                break
            ds *= 0.5
            easy = 0
        if not stepped:
            termination, detail = "step_failure", "corrector failed at minimum step"
            break

        res, margin = sc_residual_full(WaveState.from_vector(y[:12]),
                                       _with_free(params, name, y[12]))
        points.append(BranchPoint(param_name=name, param_value=float(y[12]),
                                  state=WaveState.from_vector(y[:12]),
                                  residual_norm=float(np.max(np.abs(res))),
                                  mobius_margin=margin, tangent=(y - y_cur).copy()))
        y_prev, y_cur = y_cur, y
        easy += 1
        if easy >= controls.grow_after:
            ds = min(ds * 1.3, controls.ds_max)
            easy = 0
    else:
        termination, detail = "step_failure", "max_points reached"

    return Branch(points=points, folds=folds, termination=termination,
                  termination_detail=detail, param_name=name)


def profile_at(point: BranchPoint, params: ModelParams, M: int = 512) -> WaveProfile:
    """Reconstruct the wave profile of a converged branch point."""
    pp = _with_free(params, point.param_name, point.param_value)
    del pp  # profile depends on the state only; params fix the branch context
    state = point.state
    return solution_operator_U(MeanField(state.w_hat), state.ratio,
                               1 if state.s > 0 else -1, M)


def ring_initial_condition(profile: WaveProfile, N: int) -> np.ndarray:
    """Phase vector theta_k = arg a(k/N) for seeding finite-ring runs."""
    if N == profile.x.size:
        return np.angle(profile.a)
    xs = np.arange(N) / N
    re = np.interp(xs, np.concatenate([profile.x, [1.0]]),
                   np.concatenate([profile.a.real, [profile.a.real[0]]]))
    im = np.interp(xs, np.concatenate([profile.x, [1.0]]),
                   np.concatenate([profile.a.imag, [profile.a.imag[0]]]))
    return np.angle(re + 1j * im)


def write_branch_csv(branch: Branch, path):
    cols = ["param_name", "param_value", "s", "Omega"]
    for k in range(1, 6):
        cols += [f"re_w{k}", f"im_w{k}"]
    cols += ["residual_norm", "mobius_margin", "is_fold"]
    fold_set = set(branch.folds)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        for i, pt in enumerate(branch.points):
            vals = [pt.param_name, "%.17g" % pt.param_value,
                    "%.17g" % pt.state.s, "%.17g" % pt.state.Omega]
            for wk in pt.state.w_hat:
                vals += ["%.17g" % wk.real, "%.17g" % wk.imag]
            vals += ["%.17g" % pt.residual_norm, "%.17g" % pt.mobius_margin,
                     "1" if i in fold_set else "0"]
            fh.write(",".join(vals) + "\n")


def write_branch_manifest(branch: Branch, path, controls: ContinuationControls,
                          seed_info: dict, config: dict | None = None):
    data = {
        "param_name": branch.param_name,
        "n_points": len(branch.points),
        "folds": list(branch.folds),
        "termination": branch.termination,
        "termination_detail": branch.termination_detail,
        "controls": {
            "ds0": controls.ds0, "ds_min": controls.ds_min, "ds_max": controls.ds_max,
            "window": list(controls.window), "max_points": controls.max_points,
            "margin_stop": controls.margin_stop, "s_stop": controls.s_stop,
            "direction": controls.direction,
        },
        "seed": seed_info,
    }
    if config is not None:
        data["config"] = config
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
