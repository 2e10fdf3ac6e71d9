"""Named parameter sets, in the MHz (rate / 2pi) convention.

These are the only place figure defaults live. Everything here is a plain
dict so it can be echoed into config files and dataset snapshots verbatim.
"""
import math


def rule_g2(f_G1):
    """Companion coupling that keeps the amplifier stable: G2 = G1 - 0.1 sqrt(G1), in MHz."""
    return f_G1 - 0.1 * math.sqrt(f_G1)


def _with_conditions(raw):
    # phi = -pi/2, J = sqrt(k2 k3)/2, G3 = G2 k3 / (2 J); scale-free in the MHz convention
    out = dict(raw)
    out["phi"] = -math.pi / 2
    out["f_J"] = math.sqrt(raw["f_kappa2"] * raw["f_kappa3"]) / 2
    out["f_G3"] = raw["f_G2"] * raw["f_kappa3"] / (2 * out["f_J"])
    return out


# kappa_1 = kappa_2 = g_a = 2 MHz throughout.
FIG2 = _with_conditions({
    "f_ga": 2.0,
    "f_kappa1": 2.0,
    "f_kappa2": 2.0,
    "f_kappa3": 3.0,
    "eta1": 1.0,
    "eta2": 1.0,
    "eta3": 1.0,
    "f_gamma_m": 0.02,
    "f_G1": 2.0,
    "f_G2": rule_g2(2.0),
    "n_m": 0.0,
    "s_in": [0.0, 0.0, 0.0],
})

FIG3 = dict(FIG2)

FIG5 = _with_conditions({**FIG3, "f_G1": 5.0, "f_G2": rule_g2(5.0)})

FIG6 = {**FIG3, "n_m": 100.0}

FIG8 = dict(FIG5)

PRESETS = {
    "fig2": FIG2,
    "fig3": FIG3,
    "fig4": FIG3,
    "fig5": FIG5,
    "fig6": FIG6,
    "fig7": FIG6,
    "fig8": FIG8,
}

DEFAULT = FIG3
