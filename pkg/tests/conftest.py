import math

import numpy as np
import pytest

from optoamp.sysmodel import TWO_PI, SystemParams, build_M, preset


def random_params(rng, stable=True, max_tries=10_000):
    """Random parameter set (rates drawn in MHz); rejection-sampled for stability."""
    for _ in range(max_tries):
        f_k = rng.uniform(0.5, 4.0, 3)
        f_G1 = rng.uniform(0.5, 8.0)
        p = SystemParams(
            g_a=TWO_PI * rng.uniform(-f_k[0], 3.0),
            kappa1=TWO_PI * f_k[0], kappa2=TWO_PI * f_k[1], kappa3=TWO_PI * f_k[2],
            eta1=rng.uniform(0.3, 1.0), eta2=rng.uniform(0.3, 1.0), eta3=rng.uniform(0.3, 1.0),
            gamma_m=TWO_PI * rng.uniform(0.005, 0.2),
            G1=TWO_PI * f_G1, G2=TWO_PI * f_G1 * rng.uniform(0.3, 1.1),
            G3=TWO_PI * rng.uniform(0.0, 5.0),
            phi=rng.uniform(-math.pi, math.pi),
            J=TWO_PI * rng.uniform(0.2, 3.0),
            n_m=rng.uniform(0, 200),
        )
        if not stable or np.linalg.eigvals(build_M(p)).real.max() < 0:
            return p
    raise RuntimeError("no stable parameter set found")


def rel_err(a, b, floor=1e-12):
    """Elementwise |a - b| / max(|a|, |b|), with an absolute floor for near-zero pairs."""
    a, b = np.asarray(a), np.asarray(b)
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def fig3():
    return preset("fig3")


@pytest.fixture
def fig6():
    return preset("fig6")
