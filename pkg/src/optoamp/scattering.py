"""Transmission matrix, closed-form T12/T21, gain and bandwidth.

Two independent routes to the same amplitudes live here: the full
``T = I + L^T (M + i omega I)^-1 L`` inversion and the closed-form
expressions built from the denominator ``A(omega) = det(M + i omega I)``.
"""
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from . import numkernel
from .errors import (ConditionsNotApplied, DivergentGain, SearchBracketFailure,
                     SingularAtFrequency, SingularMatrix, ZeroGain)
from .sysmodel import CHANNELS, build_L, build_M, conditions_satisfied, cooperativities


@dataclass(frozen=True)
class TransmissionResult:
    omega: float
    matrix: np.ndarray
    channel_labels: tuple = CHANNELS

    def element(self, i, j):
        """T_ij with the 1-based indices used in the physics literature."""
        return self.matrix[i - 1, j - 1]


class Bandwidth(NamedTuple):
    closed_form: float
    numeric: float
    closed_form_valid: bool


class GainSummary(NamedTuple):
    t21_resonant: complex
    gain_linear: float
    gain_db: float
    bandwidth: float
    bandwidth_numeric: float
    gbp: float


def to_db(power):
    return 10 * np.log10(power)


def transmission_sweep(p, omegas):
    """Stack of 8x8 transmission matrices, one per detuning in `omegas` (rad/us)."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    M, L = build_M(p), build_L(p)
    K = M[None, :, :] + 1j * omegas[:, None, None] * np.eye(4)
    try:
        X = numkernel.lu_solve(K, L)
    except SingularMatrix:
        # locate the offending frequency for the error message
        for w in omegas:
            try:
                numkernel.lu_solve(M + 1j * w * np.eye(4), L)
            except SingularMatrix:
                raise SingularAtFrequency(float(w)) from None
        raise
    return np.eye(8) + np.einsum("ki,nkj->nij", L, X)


def transmission_matrix(p, omega):
    """Full 8x8 scattering matrix at one probe detuning `omega` (rad/us)."""
    T = transmission_sweep(p, [omega])[0]
    return TransmissionResult(omega=float(omega), matrix=T)


def _gammas(p, omega):
    iw = 1j * np.asarray(omega, dtype=float)
    return p.g_a / 2 + iw, -p.kappa2 / 2 + iw, -p.kappa3 / 2 + iw, -p.gamma_m / 2 + iw


def denominator_A(p, omega):
    """Closed-form ``A(omega)``, equal to ``det(M + i omega I)``."""
    g1, g2, g3, gm = _gammas(p, omega)
    G1, G2, G3, J = p.G1, p.G2, p.G3, p.J
    return (g1 * (g2 * g3 * gm + g3 * G2 ** 2 + g2 * G3 ** 2 + gm * J ** 2
                  + 2j * G2 * G3 * J * math.cos(p.phi))
            + G1 ** 2 * (g2 * g3 + J ** 2))


def _closed(p, omega, sign):
    A = denominator_A(p, omega)
    if np.any(np.abs(A) < np.finfo(float).tiny):
        bad = np.atleast_1d(omega)[np.atleast_1d(np.abs(A) < np.finfo(float).tiny)][0]
        raise SingularAtFrequency(float(bad))
    _, _, g3, _ = _gammas(p, omega)
    pref = math.sqrt(p.eta1 * p.eta2 * p.kappa1 * p.kappa2)
    return -pref / A * p.G1 * (p.G2 * g3 + 1j * p.J * p.G3 * np.exp(sign * 1j * p.phi))


def t12_closed(p, omega):
    """Amplitude from the a2 port to the a1 port."""
    return _closed(p, omega, +1)


def t21_closed(p, omega):
    """Amplitude from the a1 port to the a2 port (the amplified direction at phi = -pi/2)."""
    return _closed(p, omega, -1)


def _require_conditions(p):
    if not conditions_satisfied(p):
        raise ConditionsNotApplied(
            "phi, J, G3 do not satisfy the directional-amplification conditions "
            "(apply_amplification_conditions first)")


def resonant_t21(p):
    """T21 at zero detuning, simplified under the amplification conditions."""
    _require_conditions(p)
    k2, G1, G2, ga = p.kappa2, p.G1, p.G2, p.g_a
    terms = (4 * k2 * G1 ** 2, -4 * ga * G2 ** 2, -ga * k2 * p.gamma_m)
    den = sum(terms)
    if abs(den) < 1e-12 * max(abs(t) for t in terms):
        raise DivergentGain("resonant T21 denominator vanishes (stability boundary)")
    return complex(8 * math.sqrt(p.eta1 * p.eta2 * p.kappa1 * k2) * G1 * G2 / den)


def resonant_t21_cooperativity(p):
    """Same value written with cooperativities; undefined when g_a = 0."""
    _require_conditions(p)
    C1, C2, _, _ = cooperativities(p)
    r = p.kappa1 / p.g_a
    den = C1 * r - C2 - 1
    if den == 0:
        raise DivergentGain("C1 kappa1/g_a - C2 - 1 = 0")
    return 2 * math.sqrt(p.eta1 * p.eta2 * C1 * C2) * r / den


def gain_from_cooperativities(C1, C2, eta1=1.0, eta2=1.0):
    """Resonant power gain ``4 eta1 eta2 C1 C2 / (C1 - C2 - 1)^2`` for g_a = kappa1."""
    den = C1 - C2 - 1
    if abs(den) <= 1e-12 * max(C1, C2, 1.0):
        raise DivergentGain(f"C1 - C2 - 1 = {den!r}: gain diverges at the stability boundary")
    return 4 * eta1 * eta2 * C1 * C2 / den ** 2


def _gain_linear(p):
    if math.isclose(p.g_a, p.kappa1, rel_tol=1e-10):
        _require_conditions(p)
        C1, C2, _, _ = cooperativities(p)
        return gain_from_cooperativities(C1, C2, p.eta1, p.eta2)
    return abs(resonant_t21(p)) ** 2


def bandwidth_closed(p):
    """First-order estimate ``|kappa (C1 - C2 - 1) / (kappa/gamma_m - C1)|`` with kappa = kappa2.

    Derived assuming g_a = kappa2 = kappa3; see :func:`bandwidth` for the
    validity flag.
    """
    C1, C2, _, _ = cooperativities(p)
    k = p.kappa2
    den = k / p.gamma_m - C1
    if den == 0:
        return math.inf
    return abs(k * (C1 - C2 - 1) / den)


def bandwidth_numeric(p, rtol=1e-6):
    """Smallest ``|omega|`` where ``|T21(omega)|^2`` drops to half its resonant value."""
    g0 = abs(t21_closed(p, 0.0)) ** 2
    if g0 == 0:
        raise ZeroGain("no transmission on resonance; half-power point undefined")

    def excess(w):
        return abs(t21_closed(p, w)) ** 2 - g0 / 2

    hi = 10 * p.kappa2
    grid = np.geomspace(1e-7 * hi, hi, 4000)
    best = math.inf
    for side in (1.0, -1.0):
        vals = np.abs(t21_closed(p, side * grid)) ** 2 - g0 / 2
        below = np.flatnonzero(vals <= 0)
        if below.size == 0:
            continue
        i = below[0]
        if i == 0:
            best = min(best, grid[0])
            continue
        root = brentq(lambda x: excess(side * x), grid[i - 1], grid[i],
                      xtol=1e-300, rtol=max(rtol, 4 * np.finfo(float).eps))
        best = min(best, root)
    if not math.isfinite(best):
        raise SearchBracketFailure(f"no half-power crossing for |omega| <= {hi!r} rad/us")
    return best


def bandwidth(p):
    """Closed-form and numeric bandwidths (rad/us) plus the closed form's validity flag."""
    _require_conditions(p)
    valid = (math.isclose(p.g_a, p.kappa2, rel_tol=1e-6)
             and math.isclose(p.kappa3, p.kappa2, rel_tol=1e-6))
    return Bandwidth(bandwidth_closed(p), bandwidth_numeric(p), valid)


def gain_bandwidth_product(p):
    """``Gamma * sqrt(gain)`` from the closed-form bandwidth; tends to 2 kappa at large C1."""
    return bandwidth_closed(p) * math.sqrt(_gain_linear(p))


def gain(p):
    """Resonant gain summary under the amplification conditions."""
    t21 = resonant_t21(p)
    g_lin = _gain_linear(p)
    closed = bandwidth_closed(p)
    numeric = bandwidth_numeric(p) if g_lin > 0 else math.nan
    return GainSummary(
        t21_resonant=t21,
        gain_linear=g_lin,
        gain_db=float(to_db(g_lin)) if g_lin > 0 else -math.inf,
        bandwidth=closed,
        bandwidth_numeric=numeric,
        gbp=closed * math.sqrt(g_lin),
    )
