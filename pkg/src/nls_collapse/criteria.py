"""Analytic blow-up and scattering criteria evaluated on Diagnostics records.

Every test uses strict inequalities; boundary cases give NoConclusion.
"""
from dataclasses import dataclass, field as dc_field
from enum import Enum

import numpy as np

from .quantities import RadialField, compute_diagnostics, radial_integral


class Verdict(str, Enum):
    BLOW_UP = "BlowUp"
    SCATTER = "Scatter"
    NO_CONCLUSION = "NoConclusion"


class Criterion(str, Enum):
    DHR = "DHR"
    NEGATIVE_ENERGY = "NegativeEnergy"
    LUSHNIKOV = "Lushnikov"
    ADAPTED = "Adapted"
    RADIAL_LOCALIZED = "RadialLocalized"
    MASS_CONCENTRATION = "MassConcentration"


@dataclass(frozen=True)
class CriterionVerdict:
    criterion: Criterion
    verdict: Verdict
    witnesses: dict = dc_field(default_factory=dict)

    @property
    def blow_up(self):
        return self.verdict is Verdict.BLOW_UP


class InapplicableError(ValueError):
    pass


# constants
C_SHARP = (2**2 * 7**5 * np.pi**2 / (3**5 * 5**2)) ** (1 / 14)
C_INF = (2**11 * np.pi**2 / 3**2) ** (1 / 14)
C_LA = 1 / (4 * C_SHARP ** (14 / 3))
DELTA_DEFAULT = 0.01
DELTA_MAX = 0.1
KAPPA_PSI = 64.0


@dataclass(frozen=True)
class Constants:
    C: float = C_SHARP
    C_inf: float = C_INF
    c: float = C_LA
    delta: float = DELTA_DEFAULT
    kappa_psi: float = KAPPA_PSI


def g(omega):
    """+sqrt(2/sqrt(w) + w - 3) for w <= 1 and minus the same root for w >= 1."""
    w = np.asarray(omega, dtype=float)
    if np.any(~(w > 0)):
        raise ValueError("g is defined for omega > 0 only")
    rad = np.maximum(2 / np.sqrt(w) + w - 3, 0.0)
    out = np.where(w <= 1, 1.0, -1.0) * np.sqrt(rad)
    return float(out) if out.ndim == 0 else out


def classify_dhr(d):
    w = {"me_ratio": d.me_ratio, "eta": d.eta, "energy": d.energy, "variance": d.variance}
    if d.me_ratio < 1 and d.eta < 1:
        return CriterionVerdict(Criterion.DHR, Verdict.SCATTER, w)
    if d.me_ratio < 1 and d.eta > 1:
        return CriterionVerdict(Criterion.DHR, Verdict.BLOW_UP, w)
    if d.energy < 0 and np.isfinite(d.variance):
        return CriterionVerdict(Criterion.NEGATIVE_ENERGY, Verdict.BLOW_UP, w)
    return CriterionVerdict(Criterion.DHR, Verdict.NO_CONCLUSION, w)


def _boundary_close(a, b, rel=1e-9):
    return abs(a - b) <= rel * max(abs(a), abs(b), 1e-300)


def lushnikov_simplified(d):
    """Sign-split quadratic form of the Lushnikov test: S_L > 0 or < 0 depending on sign(V_t)."""
    m, e, v, vt = d.mass, d.energy, d.variance, d.variance_rate
    s = np.sqrt(1.5) * m / np.sqrt(e * v) + 8 / 3 * d.energy_0 * v / m**2 - 3
    omega = 8 * e * v / (3 * m**2)
    if vt > 0:
        fires = omega <= 1 and s > 0
    elif vt < 0:
        fires = omega <= 1 or s < 0
    else:
        fires = omega < 1
    return bool(fires), float(s)


def adapted_simplified(d, C=C_SHARP):
    m, e, v, vt = d.mass, d.energy, d.variance, d.variance_rate
    s = m**1.5 / (C**7 * np.sqrt(v)) + 4 * d.energy_0 * v / m**2 - 3 * np.cbrt(m * e / C**14)
    kappa = 4 * C ** (14 / 3) * e ** (2 / 3) * v / m ** (7 / 3)
    if vt > 0:
        fires = kappa <= 1 and s > 0
    elif vt < 0:
        fires = kappa <= 1 or s < 0
    else:
        fires = kappa < 1
    return bool(fires), float(s)


def _precondition(d, crit):
    if not d.energy > 0:
        return CriterionVerdict(crit, Verdict.NO_CONCLUSION, {"precondition": "E > 0 fails", "energy": d.energy})
    if not (np.isfinite(d.variance) and d.variance > 0 and d.mass > 0):
        return CriterionVerdict(crit, Verdict.NO_CONCLUSION, {"precondition": "finite positive variance fails"})
    return None


def _check_agreement(direct, simple, lhs, rhs, name):
    if direct != simple and not _boundary_close(lhs, rhs, 1e-8):
        raise AssertionError(f"{name}: simplified form disagrees with direct test (lhs={lhs}, rhs={rhs})")


def lushnikov(d):
    bad = _precondition(d, Criterion.LUSHNIKOV)
    if bad:
        return bad
    m, e, v, vt = d.mass, d.energy, d.variance, d.variance_rate
    omega = 8 * e * v / (3 * m**2)
    gw = g(omega)
    lhs, rhs = vt / m, 2 * np.sqrt(3) * gw
    fires = lhs < rhs
    simple, s = lushnikov_simplified(d)
    _check_agreement(fires, simple, lhs, rhs, "lushnikov")
    w = {
        "omega": omega, "g": gw, "lhs": lhs, "rhs": rhs, "S_L": s, "simplified_fires": simple,
        "variance_bound_real": 3 * m**2 / (8 * e),
    }
    return CriterionVerdict(Criterion.LUSHNIKOV, Verdict.BLOW_UP if fires else Verdict.NO_CONCLUSION, w)


def adapted(d, C=C_SHARP):
    bad = _precondition(d, Criterion.ADAPTED)
    if bad:
        return bad
    m, e, v, vt = d.mass, d.energy, d.variance, d.variance_rate
    kappa = 4 * C ** (14 / 3) * e ** (2 / 3) * v / m ** (7 / 3)
    gk = g(kappa)
    lhs = vt / m
    rhs = 2 * np.sqrt(2) * (m * e) ** (1 / 6) / C ** (7 / 3) * gk
    fires = lhs < rhs
    simple, s = adapted_simplified(d, C)
    _check_agreement(fires, simple, lhs, rhs, "adapted")
    w = {
        "kappa": kappa, "g": gk, "lhs": lhs, "rhs": rhs, "S_A": s, "simplified_fires": simple,
        "variance_bound_real": m ** (7 / 3) / (4 * C ** (14 / 3) * e ** (2 / 3)),
    }
    return CriterionVerdict(Criterion.ADAPTED, Verdict.BLOW_UP if fires else Verdict.NO_CONCLUSION, w)


def adapted_as_lushnikov_form(d, C=C_SHARP):
    """Adapted test rewritten as V_t/M < 2 sqrt(3) mu g(mu^-2 omega)."""
    m, e, v, vt = d.mass, d.energy, d.variance, d.variance_rate
    mu = np.sqrt(2) * (m * e) ** (1 / 6) / (np.sqrt(3) * C ** (7 / 3))
    omega = 8 * e * v / (3 * m**2)
    return vt / m, 2 * np.sqrt(3) * mu * g(omega / mu**2)


@dataclass(frozen=True)
class LocalizedDiagnostics:
    R: float
    V_R: float
    V_R_rate: float


def radial_localized(loc, mass, energy, delta=DELTA_DEFAULT, kappa_psi=KAPPA_PSI, C_inf=C_INF):
    if not (0 < delta <= DELTA_MAX):
        raise ValueError(f"delta must lie in (0, {DELTA_MAX}]")
    R, vr, vrt = loc.R, loc.V_R, loc.V_R_rate
    me = mass * energy
    w = {"ME": me, "R": R, "V_R": vr, "V_R_rate": vrt, "delta": delta,
         "note": "ME > 1 taken literally in the equation's units"}
    failed = []
    if not me > 1:
        failed.append("ME > 1")
    if not vr / mass <= R**2 / 2:
        failed.append("V_R/M <= R^2/2")
    if not R**2 >= kappa_psi * mass**2 / delta:
        failed.append("R^2 >= kappa_psi M^2/delta")
    if failed:
        w["precondition"] = "; ".join(failed)
        return CriterionVerdict(Criterion.RADIAL_LOCALIZED, Verdict.NO_CONCLUSION, w)
    arg = (8 + delta) ** (2 / 3) * (1 - delta) ** (-2 / 3) * C_inf ** (14 / 3) * energy ** (2 / 3) * vr / mass ** (7 / 3)
    coef = np.sqrt(6) * (8 + delta) ** (1 / 6) * (1 - delta) ** (1 / 3) * me ** (1 / 6) / C_inf ** (7 / 3)
    gv = g(arg)
    lhs, rhs = vrt / mass, coef * gv
    w.update({"kappa_inf": arg, "g": gv, "lhs": lhs, "rhs": rhs})
    fires = lhs < rhs
    return CriterionVerdict(Criterion.RADIAL_LOCALIZED, Verdict.BLOW_UP if fires else Verdict.NO_CONCLUSION, w)


def mass_concentration(field: RadialField, delta=DELTA_DEFAULT, ground=None, imag_tol=1e-12):
    if not (0 < delta <= DELTA_MAX):
        raise ValueError(f"delta must lie in (0, {DELTA_MAX}]")
    u = field.values
    if np.max(np.abs(u.imag)) > imag_tol * max(np.max(np.abs(u)), 1e-300):
        raise InapplicableError("mass concentration criterion needs real initial data")
    d = compute_diagnostics(field, ground, hhalf=False)
    me = d.mass * d.energy
    w = {"ME": me, "delta": delta}
    if not me > 1:
        w["precondition"] = "ME > 1"
        return CriterionVerdict(Criterion.MASS_CONCENTRATION, Verdict.NO_CONCLUSION, w)
    rho = np.sqrt(delta) * d.mass * me ** (-1 / 3)
    outside = np.where(field.r >= rho, np.abs(u) ** 2, 0.0)
    frac = radial_integral(outside, field.dr) / d.mass
    bound = delta**2 * me ** (-2 / 3)
    w.update({"radius": rho, "outside_fraction": frac, "bound": bound})
    fires = frac <= bound
    return CriterionVerdict(Criterion.MASS_CONCENTRATION, Verdict.BLOW_UP if fires else Verdict.NO_CONCLUSION, w)


@dataclass(frozen=True)
class InequalityReport:
    uncertainty_residual: float
    uncertainty_relative: float
    interpolation_residual: float
    interpolation_relative: float
    lagrangian: float
    extremality_gap: float


def verify_inequalities(field: RadialField, ground=None):
    """Residuals (right side minus left side) of the uncertainty and interpolation inequalities."""
    d = compute_diagnostics(field, ground, hhalf=False)
    m, v, gr, l4 = d.mass, d.variance, d.grad_sq, d.l4_fourth
    im = d.variance_rate / 4
    u_rhs = 4 / 9 * v * gr
    u_res = u_rhs - m**2 - 4 / 9 * im**2
    i_rhs = C_SHARP * v ** (3 / 14) * l4 ** (1 / 7)
    i_res = i_rhs - np.sqrt(m)
    lag = v ** (3 / 14) * l4 ** (1 / 7) / np.sqrt(m)
    return InequalityReport(
        uncertainty_residual=float(u_res),
        uncertainty_relative=float(u_res / u_rhs),
        interpolation_residual=float(i_res),
        interpolation_relative=float(i_res / i_rhs),
        lagrangian=float(lag),
        extremality_gap=float(lag - 1 / C_SHARP),
    )


def evaluate_all(d):
    """DHR/negative energy, Lushnikov and adapted verdicts for one Diagnostics record."""
    return [classify_dhr(d), lushnikov(d), adapted(d)]


def any_blow_up(verdicts):
    return any(v.blow_up for v in verdicts)
