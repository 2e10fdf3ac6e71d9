"""Directional amplifier in a three-cavity optomechanical system with optical gain.

Frequency-domain model: transmission matrices, stability, gain and
bandwidth, added noise and group delay.
"""
from .errors import (ConditionsNotApplied, DivergentGain, NoConvergence, NumericalError,
                     SingularMatrix, ValidationError)
from .noise import added_noise, added_noise_resonant_closed, output_spectrum_2
from .response import group_delay, phase_of_t21
from .scattering import (bandwidth, denominator_A, gain, gain_bandwidth_product, resonant_t21,
                         t12_closed, t21_closed, transmission_matrix, transmission_sweep)
from .stability import critical_g1, stability_grid, stability_report
from .sysmodel import (SystemParams, apply_amplification_conditions, build_L, build_M,
                       cooperativities, g2_stability_rule, params_from_megahertz, preset)

__version__ = "0.1.0"
