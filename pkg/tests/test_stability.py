import math

import numpy as np
import pytest

from optoamp import numkernel, stability
from optoamp.errors import NotFound, ValidationError
from optoamp.stability import (INDETERMINATE, STABLE, UNSTABLE, critical_g1, rule_line_report,
                               stability_grid, stability_report)
from optoamp.sysmodel import TWO_PI, apply_amplification_conditions, build_M, preset, with_rule_line

from conftest import random_params
from oracles import mp_charpoly_roots, multiset_distance


def brute_stable(p):
    return np.linalg.eigvals(build_M(p)).real.max() < 0


class TestReport:
    def test_decoupled_with_gain(self, fig3):
        r = stability_report(fig3.replace(G1=0.0, G2=0.0, G3=0.0, J=0.0))
        assert not r.stable
        assert math.isclose(r.max_real_part, fig3.g_a / 2, rel_tol=1e-12)

    def test_decoupled_with_loss(self):
        p = preset("fig3", f_ga=-1.0, f_G1=0.0, f_G2=0.0, f_G3=0.0, f_J=0.0)
        r = stability_report(p)
        assert r.stable and math.isclose(r.margin, p.gamma_m / 2, rel_tol=1e-12)

    def test_fig2_operating_point(self):
        r = stability_report(with_rule_line(preset("fig2"), 2.0))
        assert r.stable and not r.marginal

    def test_eigenvalues_match_oracle(self, fig3):
        r = stability_report(fig3)
        assert multiset_distance(r.eigenvalues, mp_charpoly_roots(build_M(fig3))) < 1e-9
        np.testing.assert_allclose(sorted(r.eigenvalues.real), [-2.568, -2.568, -2.176, -2.176], atol=1e-3)

    def test_random_against_numpy(self, rng):
        for _ in range(100):
            p = random_params(rng, stable=False)
            lam = stability_report(p).eigenvalues
            assert multiset_distance(lam, np.linalg.eigvals(build_M(p))) < 1e-8 * max(1, abs(lam).max())

    def test_marginal_is_not_stable(self):
        p = preset("fig3", f_ga=0.0, f_G1=0.0, f_G2=0.0, f_G3=0.0, f_J=0.0)
        r = stability_report(p)
        assert r.marginal and not r.stable

    def test_scaling_invariance(self, rng):
        for _ in range(30):
            p = random_params(rng, stable=False)
            s = rng.uniform(0.1, 10)
            a, b = stability_report(p), stability_report(p.scaled(s))
            assert math.isclose(b.max_real_part, s * a.max_real_part, rel_tol=1e-8, abs_tol=1e-9)


class TestGrid:
    def test_single_cell_matches_report(self):
        p = preset("fig2")
        grid = stability_grid(p, [2.0], [1.7])
        r = stability_report(apply_amplification_conditions(with_rule_line(p, 2.0).replace(G2=TWO_PI * 1.7)))
        assert grid.status.shape == (1, 1)
        assert grid.verdicts[0, 0] == r.stable
        assert math.isclose(grid.max_real_parts[0, 0], r.max_real_part, rel_tol=1e-10)

    def test_axis_orientation(self):
        g = stability_grid(preset("fig2"), [0.5, 1.0, 2.0], [0.1, 0.2])
        assert g.status.shape == (3, 2)

    def test_grid_against_numpy(self, rng):
        p = preset("fig2")
        g1 = np.linspace(0.05, 5, 23)
        g2 = np.linspace(0.05, 5, 19)
        grid = stability_grid(p, g1, g2)
        for i in rng.integers(0, 23, 40):
            j = rng.integers(0, 19)
            q = apply_amplification_conditions(p.replace(G1=TWO_PI * g1[i], G2=TWO_PI * g2[j]))
            assert math.isclose(grid.max_real_parts[i, j], np.linalg.eigvals(build_M(q)).real.max(),
                                rel_tol=1e-8, abs_tol=1e-9)

    def test_without_conditions(self, fig3):
        q = fig3.replace(phi=0.4, J=1.0, G3=0.5)
        grid = stability_grid(q, [2.0], [1.5], apply_conditions=False)
        ref = np.linalg.eigvals(build_M(q.replace(G1=TWO_PI * 2.0, G2=TWO_PI * 1.5))).real.max()
        assert math.isclose(grid.max_real_parts[0, 0], ref, rel_tol=1e-9)

    def test_indeterminate_cells(self, monkeypatch):
        real = numkernel.quartic_eigenvalues_batch

        def flaky(M):
            lam, ok = real(M)
            ok = ok.copy()
            ok.flat[0] = False
            return lam, ok

        monkeypatch.setattr(numkernel, "quartic_eigenvalues_batch", flaky)
        g = stability_grid(preset("fig2"), [1.0, 2.0], [1.0])
        assert g.status[0, 0] == INDETERMINATE and np.isnan(g.margins[0, 0])
        assert g.status[1, 0] in (STABLE, UNSTABLE)

    @pytest.mark.parametrize("axis", [[], [1.0, 1.0], [2.0, 1.0], [[1.0]]])
    def test_axis_validation(self, axis):
        with pytest.raises(ValidationError):
            stability_grid(preset("fig2"), axis, [1.0])

    def test_figure_resolution_fast(self):
        import time
        axis = np.linspace(0, 5, 251)
        t0 = time.perf_counter()
        g = stability_grid(preset("fig2"), axis, axis)
        assert time.perf_counter() - t0 < 10
        assert not (g.status == INDETERMINATE).any()


class TestRuleLine:
    def test_critical_value(self):
        c = critical_g1(preset("fig2"))
        assert 0.9 <= c <= 1.3

    def test_critical_brackets_brute_force(self):
        p = preset("fig2")
        c = critical_g1(p)
        assert brute_stable(with_rule_line(p, c + 2e-4))
        assert not brute_stable(with_rule_line(p, c - 2e-4))

    def test_stable_above_critical(self):
        p = preset("fig2")
        c = critical_g1(p)
        for f in np.linspace(c + 0.01, 10, 40):
            assert rule_line_report(p, f).stable

    def test_passive_is_stable_everywhere(self):
        assert critical_g1(preset("fig2", f_ga=-2.0)) == 0.01

    def test_monotone_in_gain(self):
        values = [critical_g1(preset("fig2", f_ga=ga)) for ga in (0.5, 1.0, 2.0)]
        assert values[0] < values[1] < values[2]

    def test_not_found(self):
        with pytest.raises(NotFound):
            critical_g1(preset("fig2"), hi=0.5)

    def test_verdict_uses_kernel(self, monkeypatch):
        calls = []
        real = stability.numkernel.quartic_eigenvalues

        def spy(A, *a, **k):
            calls.append(1)
            return real(A, *a, **k)

        monkeypatch.setattr(stability.numkernel, "quartic_eigenvalues", spy)
        stability_report(preset("fig2"))
        assert calls
