"""Regenerate the reference tables from closed forms, quadrature and root finding.

Root tables list the positive zeros of a criterion function in p on the
positive-energy range (0, p_E).  When only one sign change lies inside, the
energy-zero endpoint p_E is reported as the upper root, since the criterion
functions are only defined while E > 0.
"""
import csv
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np
from scipy.optimize import brentq

from . import criteria
from .profiles import _base, closed_form_diagnostics, make_profile


@dataclass(frozen=True)
class TableRow:
    table: str
    param: float
    row: str
    computed: float
    reference: float

    @property
    def abs_diff(self):
        return abs(self.computed - self.reference)


class UnknownTable(KeyError):
    pass


@lru_cache(maxsize=1)
def reference_values():
    """{table: [(param, row, value), ...]} from the packaged reference file."""
    text = resources.files("nls_collapse").joinpath("data/reference_values.csv").read_text()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    out = {}
    for rec in csv.DictReader(lines):
        out.setdefault(rec["table"], []).append((float(rec["param"]), rec["row"], float(rec["value"])))
    return out


# root finding

def roots_in(func, lo, hi, n=400):
    """All sign changes of func on [lo, hi] refined by brentq (grid of n intervals)."""
    xs = np.linspace(lo, hi, n + 1)
    return _roots_on(func, xs)


def _roots_on(func, xs):
    with np.errstate(all="ignore"):
        ys = np.array([func(x) for x in xs])
    out = []
    for i in range(xs.size - 1):
        a, b = ys[i], ys[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0:
            out.append(float(xs[i]))
        elif a * b < 0:
            out.append(float(brentq(func, xs[i], xs[i + 1], xtol=1e-12)))
    return out


def first_crossing(pred, lo, hi, n=400, tol=1e-10):
    """Smallest x in [lo, hi] where the boolean pred switches value, by scan then bisection."""
    xs = np.linspace(lo, hi, n + 1)
    v0 = pred(xs[0])
    for a, b in zip(xs[:-1], xs[1:]):
        if pred(b) != v0:
            while b - a > tol * max(1.0, abs(b)):
                m = 0.5 * (a + b)
                if pred(m) == v0:
                    a = m
                else:
                    b = m
            return 0.5 * (a + b)
    return None


def energy_zero(family, **fixed):
    """Amplitude where the closed-form energy changes sign (energy is a - b p^2 times p^2)."""
    e1 = _base(make_profile(family, p=1.0, **fixed), None)[2]
    e2 = _base(make_profile(family, p=2.0, **fixed), None)[2]
    # E(p) = A p^2 - B p^4
    B = (4 * e1 - e2) / 12
    A = e1 + B
    return float(np.sqrt(A / B))


def _positive_energy_grid(p_e, n=400):
    lin = np.linspace(1e-3 * p_e, p_e, n, endpoint=False)
    near = p_e * (1 - np.logspace(-9, -2, 120))
    return np.unique(np.concatenate([lin, near]))


def criterion_roots(family, which, ground=None, **fixed):
    """Zeros in p of the chosen criterion function: 'me' (me_ratio - 1), 'L' (S_L) or 'LA' (S_A)."""
    p_e = energy_zero(family, **fixed)

    def f(p):
        d = closed_form_diagnostics(make_profile(family, p=p, **fixed), ground, hhalf=False)
        if which == "me":
            return d.me_ratio - 1
        if which == "L":
            return criteria.lushnikov_simplified(d)[1]
        if which == "LA":
            return criteria.adapted_simplified(d)[1]
        raise ValueError(which)

    rts = _roots_on(f, _positive_energy_grid(p_e))
    if which != "me" and len(rts) == 1:
        rts.append(p_e)
    return rts


def _two(rts, names):
    vals = list(rts) + [float("nan")] * (len(names) - len(rts))
    return dict(zip(names, vals[: len(names)]))


def hhalf_rows(family, ground=None, **fixed):
    from .groundstate import default_ground_state

    ground = ground or default_ground_state()
    prof = make_profile(family, p=1.0, **fixed)
    d = closed_form_diagnostics(prof, ground)
    h = d.hhalf_sq
    return {"hhalf_over_p2": h, "p_half": float(np.sqrt(ground.hhalf_sq / h))}


def coefficient_rows(family, ground=None):
    """Criterion amplitudes at alpha = 1, gamma = 0 for the real families."""
    from .groundstate import default_ground_state

    ground = ground or default_ground_state()
    p_e = energy_zero(family, alpha=1.0)

    def diag(p):
        return closed_form_diagnostics(make_profile(family, p=p, alpha=1.0), ground, hhalf=False)

    mg = ground.mass_sq * ground.grad_sq
    d1 = diag(1.0)
    out = {"posE": p_e, "MG": float((mg / (d1.mass * d1.grad_sq)) ** 0.25)}
    me = criterion_roots(family, "me", ground, alpha=1.0)
    out["ME_low"], out["ME_high"] = me[0], me[-1]
    if family != "supergaussian":
        out["H12"] = hhalf_rows(family, ground, alpha=1.0)["p_half"]

    # real data: V_t = 0, so both tests reduce to omega < 1 and kappa < 1
    def omega(p):
        d = diag(p)
        return 8 * d.energy * d.variance / (3 * d.mass**2) - 1

    def kappa(p):
        d = diag(p)
        return 4 * criteria.C_SHARP ** (14 / 3) * d.energy ** (2 / 3) * d.variance / d.mass ** (7 / 3) - 1

    grid = _positive_energy_grid(p_e)
    out["L"] = _roots_on(omega, grid)[0]
    out["LA"] = _roots_on(kappa, grid)[0]
    return out


ROOT_TABLES = {
    "T1:ME": ("gaussian", "alpha", "me", ("p1", "p2")),
    "T1:Lgauss": ("gaussian", "alpha", "L", ("p_b", "p_t")),
    "T1:LAgauss": ("gaussian", "alpha", "LA", ("p_b", "p_t")),
    "T2:MEphase": ("supergaussian", "alpha", "me", ("p1", "p2")),
    "T2:Lsuper": ("supergaussian", "alpha", "L", ("p_b", "p_t")),
    "T2:LAsuperphase": ("supergaussian", "alpha", "LA", ("p_b", "p_t")),
    "T3:MEphase": ("offcentered", "alpha", "me", ("p1", "p2")),
    "T3:Lsimple": ("offcentered", "alpha", "L", ("p_b", "p_t")),
    "T3:LAsimple": ("offcentered", "alpha", "LA", ("p_b", "p_t")),
    "T4:ME": ("oscillatory", "beta", "me", ("p1", "p2")),
    "T4:MEphase": ("oscillatory", "beta", "me", ("p1", "p2")),
    "T4:L-phase": ("oscillatory", "beta", "L", ("p_b", "p_t")),
    "T4:LAphase": ("oscillatory", "beta", "LA", ("p_b", "p_t")),
}
# tables computed with gamma = 0; all other root tables use gamma = 1/2
REAL_TABLES = {"T4:ME", "T2:num+H12", "T4:H12"}
HHALF_TABLES = {
    "T2:num+H12": ("supergaussian", "alpha"),
    "T2:H12-phase": ("supergaussian", "alpha"),
    "T4:H12": ("oscillatory", "beta"),
    "T4:H12-phase": ("oscillatory", "beta"),
}
COEF_TABLES = {"COEF:gaussian": "gaussian", "COEF:supergaussian": "supergaussian", "COEF:offcentered": "offcentered"}
TABLE_IDS = tuple(sorted(set(ROOT_TABLES) | set(HHALF_TABLES) | set(COEF_TABLES)))


def _group(refs):
    by_param = {}
    for param, row, val in refs:
        by_param.setdefault(param, {})[row] = val
    return by_param


def compute_table(table_id, ground=None):
    """Computed values next to the reference values, one TableRow per entry."""
    if table_id not in TABLE_IDS:
        raise UnknownTable(table_id)
    from .groundstate import default_ground_state

    ground = ground or default_ground_state()
    refs = _group(reference_values()[table_id])
    gamma = 0.0 if table_id in REAL_TABLES else 0.5
    out = []
    for param, ref in refs.items():
        if table_id in ROOT_TABLES:
            family, pname, which, names = ROOT_TABLES[table_id]
            got = _two(criterion_roots(family, which, ground, **{pname: param, "gamma": gamma}), names)
        elif table_id in HHALF_TABLES:
            family, pname = HHALF_TABLES[table_id]
            got = hhalf_rows(family, ground, **{pname: param, "gamma": gamma})
        else:
            got = coefficient_rows(COEF_TABLES[table_id], ground)
        for row, val in ref.items():
            out.append(TableRow(table_id, param, row, float(got[row]), val))
    return out


__all__ = [
    "TableRow", "UnknownTable", "reference_values", "roots_in", "first_crossing", "energy_zero",
    "criterion_roots", "hhalf_rows", "coefficient_rows", "compute_table", "TABLE_IDS",
]
