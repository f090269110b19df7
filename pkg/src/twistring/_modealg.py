"""Exact Fourier-mode algebra for the cubic coefficient of the twisted-state
Hopf bifurcation.

Everything here is closed-form arithmetic: perturbations of the 1-twisted
state are expanded to third order in Fourier-mode dictionaries, the
block-diagonal linearization is inverted with its known 2x2 blocks, and
the critical dual pairing reduces to reading off one Fourier coefficient.
No finite differences, no numerical eigensolves.
"""

import math

from .model import ModelParams

__all__ = ["zeta_structured"]


def _dadd(f, g):
    out = dict(f)
    for m, c in g.items():
        out[m] = out.get(m, 0.0) + c
    return out


def _dscale(f, s):
    return {m: s * c for m, c in f.items()}


def _dmul(f, g):
    out = {}
    for m1, c1 in f.items():
        for m2, c2 in g.items():
            out[m1 + m2] = out.get(m1 + m2, 0.0) + c1 * c2
    return out


class _Expansion:
    """Mode dictionaries carrying a polynomial grading in three formal
    perturbation slots; coefficient values are dicts {(p1,p2,p3): complex}."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = terms if terms is not None else {}

    @classmethod
    def from_modes(cls, modes, grade):
        return cls({grade: dict(modes)})

    def add(self, other):
        out = {g: dict(m) for g, m in self.terms.items()}
        for g, modes in other.terms.items():
            if g in out:
                out[g] = _dadd(out[g], modes)
            else:
                out[g] = dict(modes)
        return _Expansion(out)

    def scale(self, s):
        return _Expansion({g: _dscale(m, s) for g, m in self.terms.items()})

    def mul(self, other, cap=3):
        out = {}
        for g1, m1 in self.terms.items():
            for g2, m2 in other.terms.items():
                g = tuple(a + b for a, b in zip(g1, g2))
                if sum(g) > cap:
                    continue
                prod = _dmul(m1, m2)
                out[g] = _dadd(out[g], prod) if g in out else prod
        return _Expansion(out)

    def conv_kernel(self, ghat):
        return _Expansion({
            g: {m: ghat[m] * c for m, c in modes.items() if m in ghat}
            for g, modes in self.terms.items()
        })

    def grade(self, g):
        return self.terms.get(g, {})


def _rhs_expansion(params: ModelParams, fa, fb, fc=None):
    """Continuum right-hand side at the 1-twisted state perturbed by
    e1*fa + e2*fb (+ e3*fc), expanded to total cubic order."""
    A, B = params.A, params.B
    ghat = {0: 1.0 + 0.0j, 1: 0.5 * (A - 1j * B), -1: 0.5 * (A + 1j * B)}
    one = _Expansion.from_modes({0: 1.0 + 0.0j}, (0, 0, 0))
    delta = _Expansion.from_modes(fa, (1, 0, 0)).add(
        _Expansion.from_modes(fb, (0, 1, 0)))
    if fc is not None:
        delta = delta.add(_Expansion.from_modes(fc, (0, 0, 1)))

    d2 = delta.mul(delta)
    d3 = d2.mul(delta)
    cos_d = one.add(d2.scale(-0.5))
    sin_d = delta.add(d3.scale(-1.0 / 6.0))
    cos_2d = one.add(d2.scale(-2.0))
    sin_2d = delta.scale(2.0).add(d3.scale(-4.0 / 3.0))

    C1 = _Expansion.from_modes({1: 0.5, -1: 0.5}, (0, 0, 0))
    S1 = _Expansion.from_modes({1: -0.5j, -1: 0.5j}, (0, 0, 0))
    C2 = _Expansion.from_modes({2: 0.5, -2: 0.5}, (0, 0, 0))
    S2 = _Expansion.from_modes({2: -0.5j, -2: 0.5j}, (0, 0, 0))

    c1 = C1.mul(cos_d).add(S1.mul(sin_d).scale(-1.0))
    s1 = S1.mul(cos_d).add(C1.mul(sin_d))
    c2 = C2.mul(cos_2d).add(S2.mul(sin_2d).scale(-1.0))
    s2 = S2.mul(cos_2d).add(C2.mul(sin_2d))

    gs1, gc1 = s1.conv_kernel(ghat), c1.conv_kernel(ghat)
    gs2, gc2 = s2.conv_kernel(ghat), c2.conv_kernel(ghat)

    ca2, sa2 = math.cos(params.alpha2), math.sin(params.alpha2)
    ca3, sa3 = math.cos(params.alpha3), math.sin(params.alpha3)
    pair = (c1.mul(gs1).add(s1.mul(gc1).scale(-1.0)).scale(ca2)
            .add(c1.mul(gc1).add(s1.mul(gs1)).scale(sa2))
            .scale(params.K2))
    cphi = c1.scale(ca3).add(s1.scale(sa3))
    sphi = s1.scale(ca3).add(c1.scale(-sa3))
    trip = (gs2.mul(gc1.mul(cphi).add(gs1.mul(sphi).scale(-1.0)))
            .add(gc2.mul(gs1.mul(cphi).add(gc1.mul(sphi))).scale(-1.0))
            .scale(params.K3))
    return pair.add(trip)


def _lambda_block(params: ModelParams, k: int):
    """(Re, Im) of lambda_k^+ for the 1-twisted state (B as stored)."""
    K2, K3, A, B = params.K2, params.K3, params.A, params.B
    c2, s2 = math.cos(params.alpha2), math.sin(params.alpha2)
    c3, s3 = math.cos(params.alpha3), math.sin(params.alpha3)
    if k == 1:
        return (0.5 * K2 * ((1 - A) * c2 - B * s2) + 0.25 * K3 * (A * A + B * B) * c3,
                0.5 * K2 * s2 + 0.25 * K3 * (A * A + B * B) * s3)
    if k == 2:
        return (0.25 * K2 * (-A * c2 - 3 * B * s2) + 0.25 * K3 * (2 * A * c3 - 2 * B * s3),
                0.25 * K2 * (B * c2 + A * s2) + 0.25 * K3 * (2 * B * c3 + 2 * A * s3))
    if k == 3:
        return (-0.5 * K2 * (A * c2 + B * s2) + 0.25 * K3 * ((A * A - B * B) * c3 - 2 * A * B * s3),
                0.25 * K3 * ((A * A - B * B) * s3 + 2 * A * B * c3))
    return (-0.5 * K2 * (A * c2 + B * s2), 0.0)


def _solve_blocks(params: ModelParams, f: dict, shift: complex) -> dict:
    """y with (shift*Id - L) y = f, L the twisted-state linearization.

    f is a mode dictionary of a perturbation vanishing at x = 0; the
    solve decomposes it into the (sin, 1-cos) block coordinates and
    inverts the known 2x2 blocks.
    """
    y = {}
    kmax = max((abs(m) for m in f), default=0)
    for k in range(1, kmax + 1):
        cp = f.get(k, 0.0)
        cm = f.get(-k, 0.0)
        if cp == 0.0 and cm == 0.0:
            continue
        p = cp + cm
        s = 1j * (cp - cm)
        a_u, b_w = s, -p
        ck, dk = _lambda_block(params, k)
        det = (shift - ck) ** 2 + dk * dk
        if abs(det) < 1e-14 * (abs(shift) + abs(ck) + abs(dk) + 1.0) ** 2:
            raise ZeroDivisionError(f"resonant block k={k}")
        ya = ((shift - ck) * a_u - dk * b_w) / det
        yb = (dk * a_u + (shift - ck) * b_w) / det
        y[k] = y.get(k, 0.0) - 0.5 * yb - 0.5j * ya
        y[-k] = y.get(-k, 0.0) - 0.5 * yb + 0.5j * ya
        y[0] = y.get(0, 0.0) + yb
    return y


def _conj_modes(f):
    return {-m: c.conjugate() if isinstance(c, complex) else c for m, c in f.items()}


def zeta_structured(params: ModelParams, ell: int) -> complex:
    """Cubic Hopf coefficient by exact mode algebra.

    Fixed eigenfunction convention v = 1 - e^{-2 pi i ell x} (the 'plus'
    member of the conjugate pair, eigenvalue lambda_ell^+); the dual
    pairing is <f, v'> = -fhat(-ell). When Im(lambda_ell^+) < 0 the
    result is the conjugate of the positive-frequency value; the real
    part, which decides criticality, is convention-independent.
    """
    ck, dk = _lambda_block(params, ell)
    if dk == 0.0:
        raise ZeroDivisionError("non-oscillatory mode: no cubic coefficient")
    kappa = dk
    pick = -ell

    v = {0: 1.0 + 0.0j, -ell: -1.0 + 0.0j}
    vbar = _conj_modes(v)

    def d2(fa, fb):
        return _rhs_expansion(params, fa, fb).grade((1, 1, 0))

    def d3(fa, fb, fc):
        return _rhs_expansion(params, fa, fb, fc).grade((1, 1, 1))

    d2vv = d2(v, v)
    d2vvb = d2(v, vbar)
    y1 = _solve_blocks(params, d2vv, 2j * kappa)
    y2 = _dscale(_solve_blocks(params, d2vvb, 0.0), -1.0)

    t3 = -d3(v, v, vbar).get(pick, 0.0)
    t2a = -d2(vbar, y1).get(pick, 0.0)
    t2b = -d2(v, y2).get(pick, 0.0)
    return -t3 - t2a + 2.0 * t2b
