"""Conserved and scale-invariant diagnostics of radial fields in 3D.

All integrals are 4*pi*int f(r) r^2 dr evaluated by composite Simpson on the
uniform grid.  Radial derivatives use a fourth-order centered stencil with the
even reflection u(-r) = u(r) at the origin.
"""
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.fft import dst
from scipy.integrate import simpson

from .grid import RadialGrid

FOUR_PI = 4 * np.pi


@dataclass(frozen=True, eq=False)
class RadialField:
    """Complex samples u(r_k) on r_k = k*dr, k = 0..n."""

    dr: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 1 or v.size < 5:
            raise ValueError("field needs a 1d array of at least 5 samples")
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite samples")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, f, grid: RadialGrid):
        return cls(grid.dr, f(grid.r))

    @property
    def r(self):
        return np.arange(self.values.size) * self.dr

    @property
    def r_max(self):
        return (self.values.size - 1) * self.dr

    def tail_ok(self, floor=1e-8):
        peak = np.max(np.abs(self.values))
        return peak == 0 or np.abs(self.values[-1]) <= floor * peak

    def conj(self):
        return RadialField(self.dr, np.conj(self.values))


@dataclass(frozen=True)
class Diagnostics:
    mass: float
    energy: float
    grad_sq: float
    l4_fourth: float
    variance: float
    variance_rate: float
    eta: float
    me_ratio: float
    hhalf_sq: float = float("nan")
    energy_gamma: float = 0.0
    momentum: float = 0.0
    untrusted: bool = False
    notes: tuple = dc_field(default_factory=tuple)

    @property
    def energy_0(self):
        """Energy with the optimal quadratic phase removed, E - V_t^2/(32 V)."""
        return self.energy - self.energy_gamma

    def as_dict(self):
        d = {
            "mass": self.mass,
            "energy": self.energy,
            "energy_0": self.energy_0,
            "energy_gamma": self.energy_gamma,
            "momentum": self.momentum,
            "grad_sq": self.grad_sq,
            "l4_fourth": self.l4_fourth,
            "variance": self.variance,
            "variance_rate": self.variance_rate,
            "eta": self.eta,
            "me_ratio": self.me_ratio,
            "hhalf_sq": self.hhalf_sq,
            "untrusted": self.untrusted,
        }
        if self.notes:
            d["notes"] = ";".join(self.notes)
        return d


@dataclass(frozen=True, eq=False)
class Spectrum:
    R: np.ndarray
    values: np.ndarray
    truncated: bool = False


def radial_integral(f, dr):
    """4*pi * int f(r) r^2 dr on the uniform grid."""
    r = np.arange(len(f)) * dr
    return FOUR_PI * simpson(f * r**2, dx=dr)


def radial_derivative(u, dr):
    u = np.asarray(u)
    n = u.size
    ext = np.concatenate([u[2:0:-1], u, [0, 0]])
    d = (-ext[4:] + 8 * ext[3:-1] - 8 * ext[1:-3] + ext[:-4]) / (12 * dr)
    # one-sided second order at the outer edge
    d[n - 2] = (u[n - 1] - u[n - 3]) / (2 * dr)
    d[n - 1] = (3 * u[n - 1] - 4 * u[n - 2] + u[n - 3]) / (2 * dr)
    return d


def ground_norms(ground):
    return ground.mass_sq, ground.grad_sq


def scale_invariants(mass, energy, grad_sq, ground):
    mq, gq = ground_norms(ground)
    eq = ground.energy
    eta = np.sqrt(max(mass * grad_sq, 0.0) / (mq * gq))
    return float(eta), float(mass * energy / (mq * eq))


def compute_diagnostics(field: RadialField, ground=None, tail_floor=1e-8, hhalf=True):
    if ground is None:
        from .groundstate import default_ground_state

        ground = default_ground_state()
    u, dr = field.values, field.dr
    r = field.r
    a2 = np.abs(u) ** 2
    du = radial_derivative(u, dr)
    mass = radial_integral(a2, dr)
    grad_sq = radial_integral(np.abs(du) ** 2, dr)
    l4 = radial_integral(a2**2, dr)
    var = radial_integral(r**2 * a2, dr)
    vt = 4 * radial_integral(r * np.imag(np.conj(u) * du), dr)
    energy = 0.5 * grad_sq - 0.25 * l4
    e_gamma = vt**2 / (32 * var) if var > 0 else 0.0
    notes = []
    untrusted = not field.tail_ok(tail_floor)
    if untrusted:
        notes.append("tail above floor")
    if mass == 0:
        return Diagnostics(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0 if hhalf else float("nan"))
    eta, me = scale_invariants(mass, energy, grad_sq, ground)
    h = float("nan")
    if hhalf:
        spec = radial_fourier(field)
        h = hhalf_norm_sq(spec)
        if spec.truncated:
            untrusted = True
            notes.append("spectrum truncated")
    return Diagnostics(
        mass=float(mass),
        energy=float(energy),
        grad_sq=float(grad_sq),
        l4_fourth=float(l4),
        variance=float(var),
        variance_rate=float(vt),
        eta=eta,
        me_ratio=me,
        hhalf_sq=float(h),
        energy_gamma=float(e_gamma),
        untrusted=untrusted,
        notes=tuple(notes),
    )


def _simpson_weights(n, dx):
    w = np.ones(n)
    if n % 2 == 1:
        w[1:-1:2] = 4
        w[2:-1:2] = 2
        return w * dx / 3
    # even count: Simpson on the first n-1 points, trapezoid on the last interval
    w[:-1] = _simpson_weights(n - 1, dx)
    w[-2] += dx / 2
    w[-1] = dx / 2
    return w


def _fourier_at(field, R, chunk=256):
    r = field.r
    w = _simpson_weights(r.size, field.dr) * field.values * r
    out = np.empty(R.size, dtype=complex)
    for i in range(0, R.size, chunk):
        Rc = R[i : i + chunk]
        s = np.sin(2 * np.pi * np.outer(Rc, r))
        with np.errstate(divide="ignore", invalid="ignore"):
            out[i : i + chunk] = 2 * (s @ w) / Rc
    zero = R == 0
    if np.any(zero):
        out[zero] = FOUR_PI * np.sum(w * r)
    return out


def _coarse_spectrum(field):
    """u_hat on R_j = j/(2 r_max) over the full band, via one sine transform (trapezoid rule)."""
    n = field.values.size - 1
    r = field.r[1:-1]
    y = dst(r * field.values[1:-1], type=1)
    R = np.arange(1, n) / (2 * n * field.dr)
    return R, field.dr * y / R


def _auto_frequency_grid(field):
    a = np.abs(field.values)
    peak = a.max()
    if peak == 0:
        return RadialGrid(0.05, 1.0), False
    mass = radial_integral(a**2, field.dr)
    r_ext = max(field.r[np.nonzero(a > 1e-12 * peak)[0][-1]], 1.0)
    dR = min(1 / (32 * r_ext), 1 / 300)
    R, uh = _coarse_spectrum(field)
    big = np.nonzero(R**4 * np.abs(uh) ** 2 > 1e-13 * mass)[0]
    nyq = 1 / (4 * field.dr)
    top = 1.0 if big.size == 0 else 1.25 * R[big[-1]] + 0.5
    if top > nyq:
        return RadialGrid(dR, nyq), True
    return RadialGrid(dR, max(top, 1.0)), False


def radial_fourier(field: RadialField, R_grid: RadialGrid | None = None):
    """u_hat(R) = (2/R) int u(r) sin(2 pi R r) r dr, with the R = 0 limit 4 pi int u r^2 dr."""
    truncated = False
    if R_grid is None:
        R_grid, truncated = _auto_frequency_grid(field)
    R = R_grid.r
    vals = _fourier_at(field, R)
    if not truncated:
        peak = np.max(R**3 * np.abs(vals) ** 2)
        truncated = bool(peak > 0 and R[-1] ** 3 * abs(vals[-1]) ** 2 > 1e-10 * peak)
    return Spectrum(R, vals, truncated)


def _gaussian_tail(R, p):
    """int_{R_end}^inf R^3 A exp(-c R^2) dR from a fit on the last decade of samples."""
    k = max(R.size // 10, 5)
    Rt, pt = R[-k:], p[-k:]
    keep = pt > 0
    if keep.sum() < 3:
        return 0.0
    slope, icpt = np.polyfit(Rt[keep] ** 2, np.log(pt[keep]), 1)
    c = -slope
    if not np.isfinite(c) or c <= 0:
        return 0.0
    re = R[-1]
    return float(np.exp(icpt - c * re**2) * (c * re**2 + 1) / (2 * c**2))


def hhalf_norm_sq(spectrum: Spectrum):
    """8 pi^2 int R^3 |u_hat|^2 dR with an analytic Gaussian tail beyond the grid."""
    R = spectrum.R
    p = np.abs(spectrum.values) ** 2
    body = simpson(R**3 * p, x=R)
    return float(8 * np.pi**2 * (body + _gaussian_tail(R, p)))


def plancherel_mass(spectrum: Spectrum):
    R = spectrum.R
    return float(FOUR_PI * simpson(R**2 * np.abs(spectrum.values) ** 2, x=R))


# localized variance weight: r^2 inside the unit ball, 2 outside radius 2,
# and a monotone C^2 quintic in between
def psi(x):
    x = np.abs(np.asarray(x, dtype=float))
    s = np.clip(x - 1, 0, 1)
    mid = 1 + 2 * s + s**2 - 5 * s**3 + 4 * s**4 - s**5
    return np.where(x <= 1, x**2, np.where(x >= 2, 2.0, mid))


def psi_prime(x):
    x = np.abs(np.asarray(x, dtype=float))
    s = np.clip(x - 1, 0, 1)
    mid = (1 - s) ** 2 * (2 + 6 * s - 5 * s**2)
    return np.where(x <= 1, 2 * x, np.where(x >= 2, 0.0, mid))


def localized_variance(field: RadialField, R: float):
    """(V_R, d/dt V_R) for V_R = int R^2 psi(|x|/R) |u|^2 dx."""
    if not R > 0:
        raise ValueError("localization radius must be positive")
    u, dr, r = field.values, field.dr, field.r
    du = radial_derivative(u, dr)
    vr = radial_integral(R**2 * psi(r / R) * np.abs(u) ** 2, dr)
    rate = radial_integral(2 * R * psi_prime(r / R) * np.imag(np.conj(u) * du), dr)
    return float(vr), float(rate)
