"""Transmission phase and group delay of the a1 -> a2 signal."""
from typing import NamedTuple

import numpy as np

from .errors import PhaseUndefined
from .numkernel import central_diff, unwrap_phase
from .scattering import t21_closed

MIN_AMPLITUDE = 1e-15


class DelayCurve(NamedTuple):
    omega_grid: np.ndarray  # rad/us
    phase: np.ndarray  # rad, unwrapped
    delay: np.ndarray  # us


def phase_of_t21(p, omega_grid):
    omega_grid = np.asarray(omega_grid, dtype=float)
    t = t21_closed(p, omega_grid)
    small = np.abs(t) < MIN_AMPLITUDE
    if np.any(small):
        w = omega_grid[np.flatnonzero(small)[0]]
        raise PhaseUndefined(f"|T21| < {MIN_AMPLITUDE:g} at omega = {w!r} rad/us")
    return unwrap_phase(np.angle(t))


def group_delay(p, omega_grid):
    """Group delay ``d arg T21 / d omega`` on a sorted grid; us for omega in rad/us."""
    omega_grid = np.asarray(omega_grid, dtype=float)
    theta = phase_of_t21(p, omega_grid)
    return DelayCurve(omega_grid, theta, central_diff(omega_grid, theta))


def default_delay_grid(f_max=1.0, points=2001):
    return 2 * np.pi * np.linspace(-f_max, f_max, points)
