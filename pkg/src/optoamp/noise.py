"""Output spectrum of cavity a2 and the amplifier's added noise."""
import math
from typing import NamedTuple

import numpy as np

from .errors import ConditionsNotApplied, ZeroGain
from .scattering import transmission_sweep
from .sysmodel import conditions_satisfied, cooperativities

ZERO_GAIN = 1e-15


class NoiseResult(NamedTuple):
    omega: np.ndarray
    s2_out: np.ndarray
    added_quanta: np.ndarray


def noise_weights(p):
    """Symmetrised occupation + 1/2 for each of the eight input channels.

    Cavity baths are at zero temperature; the gain-medium channel also
    contributes 1/2 once its anomalous correlator is symmetrised.
    """
    s1, s2, s3 = p.s_in
    return np.array([s1 + 0.5, s2 + 0.5, s3 + 0.5, 0.5, 0.5, 0.5, 0.5, p.n_m + 0.5])


def _row2_power(p, omega):
    T = transmission_sweep(p, omega)
    return np.abs(T[:, 1, :]) ** 2


def output_spectrum_2(p, omega):
    """Symmetrised output spectrum of a2 at detuning(s) `omega` (rad/us)."""
    scalar = np.ndim(omega) == 0
    s = _row2_power(p, omega) @ noise_weights(p)
    return float(s[0]) if scalar else s


def added_noise(p, omega):
    """Input-referred added quanta, normalised by the local gain ``|T21(omega)|^2``.

    Probe fluxes are left out: only vacuum, gain-medium and thermal
    mechanical noise count.
    """
    scalar = np.ndim(omega) == 0
    power = _row2_power(p, omega)
    gain = power[:, 0]
    if np.any(gain < ZERO_GAIN):
        bad = np.atleast_1d(omega)[np.flatnonzero(gain < ZERO_GAIN)[0]]
        raise ZeroGain(f"|T21|^2 = {gain.min():.3g} at omega = {bad!r} rad/us")
    w = noise_weights(p.replace(s_in=(0.0, 0.0, 0.0)))
    n = power[:, 1:] @ w[1:] / gain
    return float(n[0]) if scalar else n


def added_noise_resonant_closed(p):
    """Resonant added noise for unit coupling efficiencies and g_a = kappa1.

    ``(C1 + C2 - 1)^2 / (8 C1 C2) + (n_m + 1/2)/C1 + 1``; the trailing 1
    is the gain medium's own noise.
    """
    if not all(math.isclose(e, 1.0, rel_tol=1e-10) for e in p.eta):
        raise ConditionsNotApplied("closed-form added noise needs eta1 = eta2 = eta3 = 1")
    if not math.isclose(p.g_a, p.kappa1, rel_tol=1e-10):
        raise ConditionsNotApplied("closed-form added noise needs g_a = kappa1")
    if not conditions_satisfied(p):
        raise ConditionsNotApplied("directional-amplification conditions not applied")
    C1, C2, _, _ = cooperativities(p)
    return 0.5 * (C1 + C2 - 1) ** 2 / (4 * C1 * C2) + (p.n_m + 0.5) / C1 + 1


def noise_sweep(p, omegas):
    omegas = np.asarray(omegas, dtype=float)
    return NoiseResult(omegas, output_spectrum_2(p, omegas), added_noise(p, omegas))
