"""Radial initial-data families and their exact diagnostics.

    q             lam^{3/2} Q(lam r) e^{i gamma r^2}
    gaussian      p e^{-alpha r^2/2} e^{i gamma r^2}
    supergaussian p e^{-alpha r^4/2} e^{i gamma r^2}
    offcentered   p r^2 e^{-alpha r^2} e^{i gamma r^2}
    oscillatory   p cos(beta r) e^{-r^2} e^{i gamma r^2}
"""
from dataclasses import dataclass, fields, replace
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.special import erf, gamma as gamma_fn

from .grid import RadialGrid
from .quantities import Diagnostics, RadialField, hhalf_norm_sq, radial_fourier, scale_invariants

SQRT2 = np.sqrt(2.0)
PI32 = np.pi**1.5
G34 = gamma_fn(0.75)


class ResolutionError(ValueError):
    pass


def _positive(name, x):
    if not (np.isfinite(x) and x > 0):
        raise ValueError(f"{name} must be positive, got {x}")


@dataclass(frozen=True)
class QProfile:
    lam: float = 1.0
    gamma: float = 0.0
    family = "q"

    def __post_init__(self):
        _positive("lam", self.lam)

    def values(self, r, ground):
        return self.lam**1.5 * ground(self.lam * r) * np.exp(1j * self.gamma * r**2)

    core = property(lambda self: 1 / self.lam)
    extent = property(lambda self: 32 / self.lam)
    beta_osc = 0.0


@dataclass(frozen=True)
class Gaussian:
    p: float = 1.0
    alpha: float = 1.0
    gamma: float = 0.0
    family = "gaussian"

    def __post_init__(self):
        _positive("p", self.p)
        _positive("alpha", self.alpha)

    def values(self, r, ground=None):
        return self.p * np.exp((-0.5 * self.alpha + 1j * self.gamma) * r**2)

    core = property(lambda self: self.alpha**-0.5)
    extent = property(lambda self: np.sqrt(80 / self.alpha))
    beta_osc = 0.0


@dataclass(frozen=True)
class SuperGaussian:
    p: float = 1.0
    alpha: float = 1.0
    gamma: float = 0.0
    family = "supergaussian"

    def __post_init__(self):
        _positive("p", self.p)
        _positive("alpha", self.alpha)

    def values(self, r, ground=None):
        return self.p * np.exp(-0.5 * self.alpha * r**4 + 1j * self.gamma * r**2)

    core = property(lambda self: self.alpha**-0.25)
    extent = property(lambda self: (80 / self.alpha) ** 0.25)
    beta_osc = 0.0


@dataclass(frozen=True)
class OffCentered:
    p: float = 1.0
    alpha: float = 1.0
    gamma: float = 0.0
    family = "offcentered"

    def __post_init__(self):
        _positive("p", self.p)
        _positive("alpha", self.alpha)

    def values(self, r, ground=None):
        return self.p * r**2 * np.exp((-self.alpha + 1j * self.gamma) * r**2)

    core = property(lambda self: self.alpha**-0.5)
    extent = property(lambda self: np.sqrt(48 / self.alpha))
    beta_osc = 0.0


@dataclass(frozen=True)
class Oscillatory:
    p: float = 1.0
    beta: float = 0.0
    gamma: float = 0.0
    family = "oscillatory"

    def __post_init__(self):
        _positive("p", self.p)
        if not (np.isfinite(self.beta) and self.beta >= 0):
            raise ValueError("beta must be nonnegative")

    def values(self, r, ground=None):
        return self.p * np.cos(self.beta * r) * np.exp((-1 + 1j * self.gamma) * r**2)

    core = property(lambda self: 1 / SQRT2)
    extent = property(lambda self: np.sqrt(40.0))
    beta_osc = property(lambda self: self.beta)


FAMILIES = {c.family: c for c in (QProfile, Gaussian, SuperGaussian, OffCentered, Oscillatory)}
ALIASES = {
    "qprofile": "q", "ground": "q", "gauss": "gaussian", "super": "supergaussian",
    "supergauss": "supergaussian", "off": "offcentered", "offgauss": "offcentered",
    "osc": "oscillatory",
}
KEY_ALIASES = {"lambda": "lam", "a": "alpha", "b": "beta", "g": "gamma"}


def param_names(family):
    return [f.name for f in fields(FAMILIES[family])]


def make_profile(family, **params):
    family = ALIASES.get(family, family)
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {sorted(FAMILIES)}")
    params = {KEY_ALIASES.get(k, k): float(v) for k, v in params.items()}
    unknown = set(params) - set(param_names(family))
    if unknown:
        raise ValueError(f"unknown parameters for {family}: {sorted(unknown)}")
    return FAMILIES[family](**params)


def parse_profile(text):
    """Parse 'family=gaussian p=2.07 alpha=1 gamma=0' (or the equivalent token list)."""
    tokens = text.split() if isinstance(text, str) else list(text)
    kv = {}
    for tok in tokens:
        if "=" not in tok:
            raise ValueError(f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        kv[k.strip()] = v.strip()
    if "family" not in kv:
        raise ValueError("profile spec needs family=...")
    family = kv.pop("family")
    return make_profile(family, **kv)


def format_profile(profile):
    parts = [f"family={profile.family}"]
    parts += [f"{f.name}={getattr(profile, f.name)!r}" for f in fields(profile)]
    return " ".join(parts)


def with_param(profile, name, value):
    name = KEY_ALIASES.get(name, name)
    return replace(profile, **{name: float(value)})


# sampling

def auto_grid(profile):
    dr = min(1 / 400, profile.core / 40)
    if profile.beta_osc > 0:
        dr = min(dr, 1 / (20 * profile.beta_osc))
    return RadialGrid(dr, profile.extent)


def sample(profile, ground=None, grid=None):
    if grid is None:
        grid = auto_grid(profile)
    need = profile.core / 20
    if profile.beta_osc > 0:
        need = min(need, 1 / (10 * profile.beta_osc))
    if grid.dr > need * (1 + 1e-12):
        raise ResolutionError(f"grid spacing {grid.dr:.4g} does not resolve the profile (need <= {need:.4g})")
    if isinstance(profile, QProfile) and ground is None:
        from .groundstate import default_ground_state

        ground = default_ground_state()
    return RadialField(grid.dr, profile.values(grid.r, ground))


# closed forms

class OscillatoryHelpers(NamedTuple):
    m: float
    a: float
    b: float
    v: float


def osc_m(beta):
    return 1 + (1 - beta**2) * np.exp(-(beta**2) / 2)


def osc_a(beta, gamma):
    g2 = gamma**2
    return 3 * (1 + g2) + beta**2 + (3 * (1 + g2) - beta**2 * (1 + 6 * g2) + beta**4 * g2) * np.exp(-(beta**2) / 2)


def osc_b(beta):
    return (3 + (1 - 2 * beta**2) * np.exp(-(beta**2)) + 2 * (2 - beta**2) * np.exp(-(beta**2) / 4)) / (16 * SQRT2)


def osc_v(beta):
    return 3 + (3 - 6 * beta**2 + beta**4) * np.exp(-(beta**2) / 2)


def oscillatory_helpers(beta, gamma=0.0):
    return OscillatoryHelpers(osc_m(beta), osc_a(beta, gamma), osc_b(beta), osc_v(beta))


def oscillatory_hhalf_real(p, beta):
    """Hhalf norm squared of p cos(beta r) e^{-r^2}, from integrating its sine transform exactly."""
    return np.pi / 8 * p**2 * (np.sqrt(2 * np.pi) * beta * erf(beta / SQRT2) - 2 * (beta**2 - 4) * np.exp(-(beta**2) / 2))


def _base(profile, ground):
    """(M, grad_sq, E, E_gamma, V, V_t, hhalf or None) from exact formulas."""
    if isinstance(profile, QProfile):
        lam, g = profile.lam, profile.gamma
        var = ground.var / lam**2
        grad0 = lam**2 * ground.grad_sq
        e0 = 0.5 * grad0 - 0.25 * lam**3 * ground.l4_fourth
        eg = 2 * g**2 * var
        h = lam * ground.hhalf_sq if g == 0 else None
        return ground.mass_sq, grad0 + 4 * g**2 * var, e0 + eg, eg, var, 8 * g * var, h
    p, g = profile.p, profile.gamma
    if isinstance(profile, Gaussian):
        a = profile.alpha
        mass = PI32 * p**2 / a**1.5
        grad = 1.5 * PI32 * p**2 / a**0.5 * (1 + 4 * g**2 / a**2)
        e = PI32 * p**2 / (4 * a**0.5) * (3 * (1 + 4 * g**2 / a**2) - p**2 / (2 * SQRT2 * a))
        eg = 3 * PI32 * p**2 * g**2 / a**2.5
        var = 1.5 * PI32 * p**2 / a**2.5
        h = 2 * np.pi * p**2 / a * np.sqrt(1 + 4 * g**2 / a**2)
    elif isinstance(profile, SuperGaussian):
        a = profile.alpha
        mass = np.pi * p**2 * G34 / a**0.75
        grad = np.pi**2 * p**2 / (2 * SQRT2 * a**0.25 * G34) * (5 + 4 * g**2 / a)
        e = np.pi * p**2 / (4 * SQRT2 * a**0.25 * G34) * (np.pi * (5 + 4 * g**2 / a) - G34**2 * p**2 / (2**0.25 * np.sqrt(a)))
        eg = np.pi**2 * p**2 * g**2 / (SQRT2 * a**1.25 * G34)
        var = np.pi**2 * p**2 / (2 * SQRT2 * a**1.25 * G34)
        h = None
    elif isinstance(profile, OffCentered):
        a = profile.alpha
        q = g**2 / a**2
        mass = 15 * PI32 * p**2 / (32 * SQRT2 * a**3.5)
        k = 3 * PI32 * p**2 / (32 * SQRT2 * a**2.5)
        grad = k * (11 + 35 * q)
        e = 0.5 * k * (11 + 35 * q - 315 * p**2 / (2**10 * SQRT2 * a**3))
        eg = 0.5 * k * 35 * q
        var = 105 * PI32 * p**2 / (128 * SQRT2 * a**4.5)
        h = 3 * np.pi * p**2 / (4 * a**3) * (1 + 2 * q) / np.sqrt(1 + q)
    elif isinstance(profile, Oscillatory):
        bt = profile.beta
        k = PI32 * p**2 / (4 * SQRT2)
        hp = oscillatory_helpers(bt, g)
        mass = k * hp.m
        grad = k * hp.a
        e = 0.5 * k * (hp.a - p**2 * hp.b)
        eg = 0.5 * k * (hp.a - osc_a(bt, 0.0))
        var = 0.25 * k * hp.v
        h = None
    else:
        raise TypeError(f"not a profile: {profile!r}")
    return mass, grad, e, eg, var, 8 * g * var, h


@lru_cache(maxsize=512)
def _hhalf_unit(profile):
    """Quadrature Hhalf norm for the profile with unit amplitude."""
    if not isinstance(profile, QProfile):
        profile = replace(profile, p=1.0)
    from .groundstate import default_ground_state

    field = sample(profile, default_ground_state())
    return hhalf_norm_sq(radial_fourier(field))


def hhalf_quadrature(profile):
    h = _hhalf_unit(profile if isinstance(profile, QProfile) else replace(profile, p=1.0))
    return h if isinstance(profile, QProfile) else h * profile.p**2


def closed_form_diagnostics(profile, ground=None, hhalf=True):
    """Exact diagnostics; the Hhalf norm falls back to quadrature where no closed form is used."""
    if ground is None:
        from .groundstate import default_ground_state

        ground = default_ground_state()
    mass, grad, e, eg, var, vt, h = _base(profile, ground)
    notes = []
    if h is None:
        if hhalf:
            h = hhalf_quadrature(profile)
            notes.append("hhalf_sq by quadrature")
        else:
            h = float("nan")
    eta, me = scale_invariants(mass, e, grad, ground)
    return Diagnostics(
        mass=float(mass), energy=float(e), grad_sq=float(grad), l4_fourth=float(2 * grad - 4 * e),
        variance=float(var), variance_rate=float(vt), eta=eta, me_ratio=me, hhalf_sq=float(h),
        energy_gamma=float(eg), notes=tuple(notes),
    )


def tilde_gamma_sq(gamma, ground):
    """Rescaled phase gamma~^2 = (4/3) gamma^2 |yQ|^2 / |Q|^2 used for the Q family."""
    return 4 / 3 * gamma**2 * ground.var / ground.mass_sq
