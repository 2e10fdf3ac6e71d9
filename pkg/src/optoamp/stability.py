"""Dynamical stability from the eigenvalues of the dynamical matrix M."""
import math
from dataclasses import dataclass

import numpy as np

from . import numkernel
from .errors import NotFound, ValidationError
from .sysmodel import TWO_PI, build_M, g2_stability_rule, with_rule_line

MARGINAL = 1e-9  # rad/us

STABLE, UNSTABLE, INDETERMINATE = 1, 0, -1


@dataclass(frozen=True)
class StabilityReport:
    eigenvalues: np.ndarray
    max_real_part: float
    stable: bool
    margin: float
    marginal: bool


@dataclass(frozen=True)
class StabilityGrid:
    """Verdicts over a G1 x G2 grid; array axis 0 runs over `g1_values`.

    `status` holds STABLE, UNSTABLE or INDETERMINATE (eigenvalue iteration
    failed for that cell); `margins` is NaN where indeterminate.
    """

    g1_values: np.ndarray
    g2_values: np.ndarray
    status: np.ndarray
    margins: np.ndarray

    @property
    def verdicts(self):
        return self.status == STABLE

    @property
    def max_real_parts(self):
        return -self.margins


def _classify(max_re):
    marginal = abs(max_re) < MARGINAL
    return (max_re < 0) and not marginal, marginal


def stability_report(p):
    lam = numkernel.quartic_eigenvalues(build_M(p))
    max_re = float(np.max(lam.real))
    stable, marginal = _classify(max_re)
    return StabilityReport(eigenvalues=lam, max_real_part=max_re, stable=stable,
                           margin=-max_re, marginal=marginal)


def _check_axis(axis, name):
    axis = np.asarray(axis, dtype=float)
    if axis.ndim != 1 or axis.size == 0:
        raise ValidationError(f"{name} must be a non-empty 1-D sequence", fields=[name])
    if np.any(np.diff(axis) <= 0):
        raise ValidationError(f"{name} must be strictly increasing", fields=[name])
    return axis


def _grid_matrices(p, G1, G2, apply_conditions):
    """Stack of M for arrays of couplings (rad/us), broadcasting like G1 * G2."""
    G1, G2 = np.broadcast_arrays(np.asarray(G1, float), np.asarray(G2, float))
    if apply_conditions:
        J = math.sqrt(p.kappa2 * p.kappa3) / 2
        G3 = G2 * p.kappa3 / (2 * J)
        phi = -math.pi / 2
    else:
        J, G3, phi = p.J, np.full(G2.shape, p.G3), p.phi
    M = np.broadcast_to(build_M(p.replace(G1=0.0, G2=0.0, G3=0.0, J=0.0)),
                        G1.shape + (4, 4)).copy()
    M[..., 0, 3] = M[..., 3, 0] = -1j * G1
    M[..., 1, 2] = M[..., 2, 1] = -1j * J
    M[..., 1, 3] = M[..., 3, 1] = -1j * G2
    M[..., 2, 3] = -1j * G3 * np.exp(-1j * phi)
    M[..., 3, 2] = -1j * G3 * np.exp(1j * phi)
    return M


def _max_real(M):
    lam, ok = numkernel.quartic_eigenvalues_batch(M)
    return np.where(ok, lam.real.max(axis=-1), np.nan)


def stability_grid(p, g1_axis, g2_axis, apply_conditions=True):
    """Stability over couplings given in MHz (``G / 2pi``).

    With `apply_conditions`, each cell uses phi = -pi/2, J = sqrt(k2 k3)/2
    and G3 = G2 k3 / (2J); otherwise phi, J and G3 are taken from `p`.
    """
    g1 = _check_axis(g1_axis, "g1_axis")
    g2 = _check_axis(g2_axis, "g2_axis")
    G1, G2 = np.meshgrid(TWO_PI * g1, TWO_PI * g2, indexing="ij")
    max_re = _max_real(_grid_matrices(p, G1, G2, apply_conditions))
    status = np.where(np.isnan(max_re), INDETERMINATE,
                      np.where((max_re < 0) & (np.abs(max_re) >= MARGINAL), STABLE, UNSTABLE))
    return StabilityGrid(g1_values=g1, g2_values=g2, status=status.astype(int), margins=-max_re)


def _line_stable(p, f_G1):
    """Stability verdicts along the G2 rule line for an array of f_G1 values (MHz)."""
    f_G1 = np.atleast_1d(np.asarray(f_G1, float))
    f_G2 = np.array([g2_stability_rule(f) for f in f_G1])
    max_re = _max_real(_grid_matrices(p, TWO_PI * f_G1, TWO_PI * f_G2, True))
    return (max_re < 0) & (np.abs(max_re) >= MARGINAL)


def critical_g1(p, lo=0.01, hi=10.0, xtol=1e-4, scan_points=2000):
    """Smallest f_G1 (MHz) in ``[lo, hi]`` that is stable on the G2 rule line.

    A coarse scan finds the first stable sample; bisection then refines the
    unstable/stable boundary below it to `xtol`.
    """
    grid = np.linspace(lo, hi, scan_points)
    ok = _line_stable(p, grid)
    if not ok.any():
        raise NotFound(f"no stable point on the rule line for f_G1 in [{lo}, {hi}] MHz")
    i = int(np.argmax(ok))
    if i == 0:
        return float(lo)
    a, b = grid[i - 1], grid[i]
    while b - a > xtol:
        mid = 0.5 * (a + b)
        if _line_stable(p, mid)[0]:
            b = mid
        else:
            a = mid
    return float(b)


def rule_line_report(p, f_G1):
    """Stability report at one point of the rule line (conditions applied)."""
    return stability_report(with_rule_line(p, f_G1))
