"""Amplifier parameters and the linearised dynamical system.

Internal units are angular rates in rad/us. User-facing values use the
external convention ``f = rate / 2pi`` in MHz, with an ``f_`` prefix
on every key that carries a rate. Group delays therefore come out in us.

Mode order is (a1, a2, a3, b). Input/output channel order is::

    0 a1_in    1 a2_in    2 a3_in       external ports
    3 a1_in0   4 a2_in0   5 a3_in0      intrinsic loss baths
    6 a1_ing                            gain-medium noise
    7 b_in                              mechanical bath

Indices in code are 0-based; matrix element ``T[1, 0]`` is T21.
"""
import dataclasses
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import presets
from .errors import DegenerateCoupling, NegativeCoupling, ValidationError

TWO_PI = 2 * math.pi

MODES = ("a1", "a2", "a3", "b")
CHANNELS = ("a1_in", "a2_in", "a3_in", "a1_in0", "a2_in0", "a3_in0", "a1_ing", "b_in")
N_MODES = len(MODES)
N_CHANNELS = len(CHANNELS)

# rate fields: (SystemParams attribute, MHz key)
RATE_FIELDS = (
    ("g_a", "f_ga"),
    ("kappa1", "f_kappa1"),
    ("kappa2", "f_kappa2"),
    ("kappa3", "f_kappa3"),
    ("gamma_m", "f_gamma_m"),
    ("G1", "f_G1"),
    ("G2", "f_G2"),
    ("G3", "f_G3"),
    ("J", "f_J"),
)
PLAIN_FIELDS = ("eta1", "eta2", "eta3", "phi", "n_m", "s_in")
RAW_KEYS = tuple(k for _, k in RATE_FIELDS) + PLAIN_FIELDS


def invariant_violations(p):
    """All invariant violations of a parameter object, as (field, message) pairs."""
    bad = []
    for name in ("g_a", "kappa1", "kappa2", "kappa3", "gamma_m", "G1", "G2", "G3",
                 "J", "eta1", "eta2", "eta3", "phi", "n_m"):
        v = getattr(p, name)
        if not isinstance(v, (int, float)) or not math.isfinite(v):
            bad.append((name, f"{name} must be a finite number, got {v!r}"))
    if bad:
        return bad
    for name in ("kappa1", "kappa2", "kappa3", "gamma_m"):
        if not getattr(p, name) > 0:
            bad.append((name, f"{name} must be > 0, got {getattr(p, name)!r}"))
    for name in ("G1", "G2", "G3", "J", "n_m"):
        if getattr(p, name) < 0:
            bad.append((name, f"{name} must be >= 0, got {getattr(p, name)!r}"))
    for name in ("eta1", "eta2", "eta3"):
        if not 0 <= getattr(p, name) <= 1:
            bad.append((name, f"{name} must lie in [0, 1], got {getattr(p, name)!r}"))
    if p.g_a < -p.kappa1:
        bad.append(("g_a", f"g_a = {p.g_a!r} is below -kappa1 = {-p.kappa1!r}; "
                           "raw gain g = g_a + kappa1 would be negative"))
    if len(p.s_in) != 3 or not all(math.isfinite(s) and s >= 0 for s in p.s_in):
        bad.append(("s_in", f"s_in must be three finite non-negative fluxes, got {p.s_in!r}"))
    return bad


@dataclass(frozen=True)
class SystemParams:
    """One amplifier instance. Rates in rad/us."""

    g_a: float
    kappa1: float
    kappa2: float
    kappa3: float
    eta1: float
    eta2: float
    eta3: float
    gamma_m: float
    G1: float
    G2: float
    G3: float
    phi: float
    J: float
    n_m: float = 0.0
    s_in: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "s_in", tuple(float(s) for s in self.s_in))
        bad = invariant_violations(self)
        if bad:
            field, msg = bad[0]
            raise ValidationError(msg, fields=[field])

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @property
    def kappa(self):
        return (self.kappa1, self.kappa2, self.kappa3)

    @property
    def eta(self):
        return (self.eta1, self.eta2, self.eta3)

    @property
    def kappa_ex(self):
        return tuple(e * k for e, k in zip(self.eta, self.kappa))

    @property
    def kappa_0(self):
        return tuple((1 - e) * k for e, k in zip(self.eta, self.kappa))

    @property
    def g(self):
        """Raw medium gain g = g_a + kappa1."""
        return self.g_a + self.kappa1

    def scaled(self, s):
        """Copy with every rate multiplied by `s`."""
        return self.replace(**{name: getattr(self, name) * s for name, _ in RATE_FIELDS})

    def as_dict(self):
        d = dataclasses.asdict(self)
        d["s_in"] = list(self.s_in)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    def to_megahertz(self):
        """Inverse of :func:`params_from_megahertz`."""
        raw = {key: getattr(self, name) / TWO_PI for name, key in RATE_FIELDS}
        raw.update(eta1=self.eta1, eta2=self.eta2, eta3=self.eta3, phi=self.phi,
                   n_m=self.n_m, s_in=list(self.s_in))
        return raw


class DerivedQuantities(NamedTuple):
    C1: float
    C2: float
    C3: float
    g: float


def params_from_megahertz(raw, base=None):
    """Build :class:`SystemParams` from a map in the ``f = rate / 2pi`` MHz convention.

    Keys absent from `raw` are taken from `base` (the ``fig3`` preset by
    default). Unknown keys are rejected.
    """
    base = presets.DEFAULT if base is None else base
    unknown = sorted(set(raw) - set(RAW_KEYS))
    if unknown:
        raise ValidationError(f"unknown parameter key(s): {', '.join(unknown)}", fields=unknown)
    merged = {**base, **raw}
    kwargs = {}
    for name, key in RATE_FIELDS:
        kwargs[name] = TWO_PI * _number(merged[key], key)
    for key in ("eta1", "eta2", "eta3", "phi", "n_m"):
        kwargs[key] = _number(merged[key], key)
    s_in = merged["s_in"]
    if not isinstance(s_in, (list, tuple)) or len(s_in) != 3:
        raise ValidationError(f"s_in must be a list of three fluxes, got {s_in!r}", fields=["s_in"])
    kwargs["s_in"] = tuple(_number(s, "s_in") for s in s_in)
    return SystemParams(**kwargs)


def _number(v, key):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"{key} must be a number, got {v!r}", fields=[key])
    return float(v)


def conditions_satisfied(p, rtol=1e-10):
    """True if phi, J and G3 obey the directional-amplification conditions."""
    J = math.sqrt(p.kappa2 * p.kappa3) / 2
    G3 = p.G2 * p.kappa3 / (2 * J) if J > 0 else math.inf
    return (abs(p.phi + math.pi / 2) <= rtol * math.pi / 2
            and abs(p.J - J) <= rtol * J
            and abs(p.G3 - G3) <= rtol * max(G3, p.G2, 1e-300))


def apply_amplification_conditions(p):
    """Set phi = -pi/2, J = sqrt(kappa2 kappa3)/2 and G3 = G2 kappa3 / (2J).

    This makes the a2 -> a1 path interfere destructively at zero detuning
    (isolation) and routes nothing into a3.
    """
    J = math.sqrt(p.kappa2 * p.kappa3) / 2
    if not J > 0:
        raise DegenerateCoupling(f"hopping rate J = {J!r} from kappa2, kappa3 must be positive")
    return p.replace(phi=-math.pi / 2, J=J, G3=p.G2 * p.kappa3 / (2 * J))


def g2_stability_rule(f_G1):
    """``f_G1 - 0.1 sqrt(f_G1)`` in MHz; keeps G2 just below G1 so the gain stays stable."""
    if f_G1 < 0:
        raise NegativeCoupling(f"f_G1 must be >= 0, got {f_G1!r}", fields=["f_G1"])
    f_G2 = presets.rule_g2(f_G1)
    if f_G2 < 0:
        # round-off at the f_G1 = 0.01 boundary
        if f_G2 > -1e-15 * max(1.0, f_G1):
            return 0.0
        raise NegativeCoupling(f"rule gives negative f_G2 = {f_G2!r} for f_G1 = {f_G1!r}",
                               fields=["f_G1"])
    return f_G2


def with_rule_line(p, f_G1, conditions=True):
    """Copy of `p` with G1 = 2pi f_G1, G2 from the stability rule, conditions re-applied."""
    q = p.replace(G1=TWO_PI * f_G1, G2=TWO_PI * g2_stability_rule(f_G1))
    return apply_amplification_conditions(q) if conditions else q


def cooperativities(p):
    gm = p.gamma_m
    return DerivedQuantities(
        C1=4 * p.G1 ** 2 / (p.kappa1 * gm),
        C2=4 * p.G2 ** 2 / (p.kappa2 * gm),
        C3=4 * p.G3 ** 2 / (p.kappa3 * gm),
        g=p.g,
    )


def build_M(p):
    """4x4 dynamical matrix of the linearised Langevin equations."""
    M = np.zeros((4, 4), dtype=np.complex128)
    M[0, 0] = p.g_a / 2
    M[1, 1] = -p.kappa2 / 2
    M[2, 2] = -p.kappa3 / 2
    M[3, 3] = -p.gamma_m / 2
    M[0, 3] = M[3, 0] = -1j * p.G1
    M[1, 2] = M[2, 1] = -1j * p.J
    M[1, 3] = M[3, 1] = -1j * p.G2
    M[2, 3] = -1j * p.G3 * np.exp(-1j * p.phi)
    M[3, 2] = -1j * p.G3 * np.exp(1j * p.phi)
    return M


def build_L(p):
    """4x8 coupling matrix from input channels to modes."""
    L = np.zeros((4, 8), dtype=np.complex128)
    for k in range(3):
        L[k, k] = math.sqrt(p.kappa_ex[k])
        L[k, 3 + k] = math.sqrt(p.kappa_0[k])
    L[0, 6] = math.sqrt(p.g)
    L[3, 7] = math.sqrt(p.gamma_m)
    return L


def preset(name, **overrides):
    """SystemParams for a named figure preset, with MHz-convention overrides."""
    return params_from_megahertz(overrides, base=presets.PRESETS[name])
