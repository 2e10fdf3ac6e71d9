import math

import numpy as np
import pytest

from optoamp.errors import ConditionsNotApplied, ZeroGain
from optoamp.noise import (added_noise, added_noise_resonant_closed, noise_sweep, noise_weights,
                           output_spectrum_2)
from optoamp.scattering import transmission_sweep
from optoamp.sysmodel import (TWO_PI, apply_amplification_conditions, cooperativities, preset,
                              with_rule_line)

from conftest import rel_err

GRID = TWO_PI * np.linspace(-3, 3, 61)


def eq_closed(C1, C2, n_m):
    return (C1 + C2 - 1) ** 2 / (8 * C1 * C2) + (n_m + 0.5) / C1 + 1


def with_cooperativities(p, C1, C2):
    G1 = math.sqrt(C1 * p.kappa1 * p.gamma_m) / 2
    G2 = math.sqrt(C2 * p.kappa2 * p.gamma_m) / 2
    return apply_amplification_conditions(p.replace(G1=G1, G2=G2))


class TestSpectrum:
    def test_passive_vacuum(self):
        p = preset("fig6", f_ga=-2.0, n_m=0.0)
        np.testing.assert_allclose(output_spectrum_2(p, GRID), 0.5, rtol=1e-12)

    def test_norm_identity(self, rng):
        from conftest import random_params
        for _ in range(30):
            p = random_params(rng, stable=False)
            P = np.abs(transmission_sweep(p, rng.uniform(-20, 20, 5))[:, 1, :]) ** 2
            np.testing.assert_allclose(P.sum(axis=1) - 2 * P[:, 6], 1.0, rtol=1e-9)

    def test_decomposition(self, fig6):
        p = fig6.replace(s_in=(3.0, 0.0, 0.0))
        T21 = np.abs(transmission_sweep(p, GRID)[:, 1, 0]) ** 2
        lhs = output_spectrum_2(p, GRID)
        rhs = (3.0 + 0.5) * T21 + T21 * added_noise(p, GRID)
        assert rel_err(lhs, rhs).max() < 1e-12

    def test_probe_fluxes_excluded(self, fig6):
        a = added_noise(fig6, GRID)
        b = added_noise(fig6.replace(s_in=(5.0, 2.0, 1.0)), GRID)
        np.testing.assert_array_equal(a, b)

    def test_weights(self, fig6):
        w = noise_weights(fig6)
        assert w[-1] == 100.5 and w[6] == 0.5

    def test_scalar(self, fig6):
        assert isinstance(output_spectrum_2(fig6, 0.0), float)
        assert isinstance(added_noise(fig6, 0.0), float)

    def test_sweep(self, fig6):
        r = noise_sweep(fig6, GRID)
        assert r.s2_out.shape == r.added_quanta.shape == GRID.shape


class TestAddedNoise:
    def test_thermal_linearity(self, fig6):
        w = GRID
        base = added_noise(fig6.replace(n_m=0.0), w)
        T = np.abs(transmission_sweep(fig6, w)[:, 1, :]) ** 2
        slope = T[:, 7] / T[:, 0]
        for n in (1.0, 50.0, 1000.0):
            assert rel_err(added_noise(fig6.replace(n_m=n), w), base + n * slope).max() < 1e-10

    @pytest.mark.parametrize("f_G1,expected", [(2.0, 1.75260), (5.0, 1.54104), (10.0, 1.51051)])
    def test_fig6_values(self, fig6, f_G1, expected):
        p = with_rule_line(fig6, f_G1)
        assert math.isclose(added_noise(p, 0.0), expected, abs_tol=1e-5)

    def test_closed_form_unit_cooperativities(self, fig3):
        p = with_cooperativities(fig3.replace(n_m=0.0), 1.0, 1.0)
        assert math.isclose(added_noise_resonant_closed(p), 1.625, rel_tol=1e-14)
        assert math.isclose(added_noise(p, 0.0), 1.625, rel_tol=1e-9)

    def test_closed_form_thermal_shift(self, fig3):
        p = with_cooperativities(fig3, 4.0, 2.0)
        d = added_noise_resonant_closed(p.replace(n_m=10.0)) - added_noise_resonant_closed(p)
        assert math.isclose(d, 10.0 / 4.0, rel_tol=1e-12)

    def test_closed_form_random(self, fig3, rng):
        for _ in range(50):
            f = rng.uniform(0.1, 5, 5)
            p = fig3.replace(kappa1=TWO_PI * f[0], g_a=TWO_PI * f[0], kappa2=TWO_PI * f[1],
                             kappa3=TWO_PI * f[2], gamma_m=TWO_PI * f[3] / 50, n_m=rng.uniform(0, 200))
            p = with_cooperativities(p, rng.uniform(0.5, 500), rng.uniform(0.5, 500))
            c = cooperativities(p)
            expected = eq_closed(c.C1, c.C2, p.n_m)
            assert rel_err(added_noise_resonant_closed(p), expected) < 1e-12
            assert rel_err(added_noise(p, 0.0), expected) < 1e-9

    def test_decreasing_along_rule_line(self, fig6):
        vals = [added_noise(with_rule_line(fig6, f), 0.0) for f in (2.0, 5.0, 10.0)]
        assert vals[0] > vals[1] > vals[2] > 1.0

    def test_efficiency_penalty(self, fig6):
        vals = [added_noise(fig6.replace(eta1=e, eta2=e), 0.0) for e in (1.0, 0.75, 0.5)]
        np.testing.assert_allclose(vals, [1.7526, 2.5046, 4.0104], atol=1e-4)

    def test_gain_channel_silent_when_passive(self):
        p = preset("fig6", f_ga=-2.0)
        assert not transmission_sweep(p, GRID)[:, 1, 6].any()

    def test_zero_gain(self, fig6):
        p = apply_amplification_conditions(fig6.replace(G2=0.0))
        with pytest.raises(ZeroGain):
            added_noise(p, 0.0)

    @pytest.mark.parametrize("change", [dict(eta1=0.5), dict(f_ga=1.0), dict(phi=0.0)])
    def test_closed_form_preconditions(self, change):
        with pytest.raises(ConditionsNotApplied):
            added_noise_resonant_closed(preset("fig6", **change))
