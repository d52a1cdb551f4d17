"""Bisection for the blow-up/scattering threshold in one profile parameter."""
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field, fields

import numpy as np

from . import criteria
from .profiles import QProfile, closed_form_diagnostics, make_profile, with_param
from .solver import Classification, EvolveParams, evolve_profile
from .tables import first_crossing


class BracketError(ValueError):
    pass


@dataclass
class ThresholdResult:
    family: str
    fixed: dict
    vary: str
    p_scatter: float
    p_blowup: float
    tol: float
    scatter_summary: dict = dc_field(default_factory=dict)
    blowup_summary: dict = dc_field(default_factory=dict)
    scatter_criteria: dict = dc_field(default_factory=dict)
    blowup_criteria: dict = dc_field(default_factory=dict)
    inconclusive: bool = False
    runs: int = 0
    notes: list = dc_field(default_factory=list)
    curves: dict = dc_field(default_factory=dict)

    @property
    def width(self):
        return self.p_blowup - self.p_scatter

    @property
    def midpoint(self):
        return 0.5 * (self.p_scatter + self.p_blowup)

    @property
    def status(self):
        if self.notes and not np.isfinite(self.width):
            return "failed"
        return "inconclusive" if self.inconclusive else "ok"


def _default_classify(profile, params, ground):
    return evolve_profile(profile, ground, params)


def _verdicts(profile, ground):
    try:
        d = closed_form_diagnostics(profile, ground, hhalf=False)
        return {v.criterion.value: v.verdict.value for v in criteria.evaluate_all(d)}
    except (ValueError, ArithmeticError) as exc:
        return {"error": str(exc)}


def _fixed(profile, vary):
    return {f.name: getattr(profile, f.name) for f in fields(profile) if f.name != vary}


def find_threshold(template, vary, bracket, tol=0.01, params=EvolveParams(), ground=None, classify=None):
    """Shrink (low, high) until its width is <= tol, with low Scattered and high BlowUp.

    classify(profile, params, ground) returns an object with .classification and
    .summary(); the default evolves the profile with the radial solver.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise BracketError("bracket must satisfy low < high")
    classify = classify or _default_classify
    if ground is None and isinstance(template, QProfile):
        from .groundstate import default_ground_state

        ground = default_ground_state()
    runs = 0
    notes = []

    def run(x):
        nonlocal runs
        prof = with_param(template, vary, x)
        out = classify(prof, params, ground)
        runs += 1
        if out.classification in (Classification.UNDETERMINED, Classification.UNRELIABLE):
            notes.append(f"{vary}={x!r}: {out.classification.value}, retried with refined parameters")
            out = classify(prof, params.refined(), ground)
            runs += 1
        return out

    def result(a, b, sa, sb, inconclusive=False):
        ta, tb = with_param(template, vary, a), with_param(template, vary, b)
        return ThresholdResult(
            family=template.family, fixed=_fixed(template, vary), vary=vary, p_scatter=a, p_blowup=b,
            tol=tol, scatter_summary=sa, blowup_summary=sb, scatter_criteria=_verdicts(ta, ground),
            blowup_criteria=_verdicts(tb, ground), inconclusive=inconclusive, runs=runs, notes=notes,
        )

    low = run(lo)
    if low.classification is not Classification.SCATTERED:
        raise BracketError(f"low end {vary}={lo} classified {low.classification.value}, expected Scattered")
    high = run(hi)
    if high.classification is not Classification.BLOW_UP:
        raise BracketError(f"high end {vary}={hi} classified {high.classification.value}, expected BlowUp")
    s_lo, s_hi = low.summary(), high.summary()
    while hi - lo > tol * (1 + 1e-9):
        mid = 0.5 * (lo + hi)
        out = run(mid)
        if out.classification is Classification.BLOW_UP:
            hi, s_hi = mid, out.summary()
        elif out.classification is Classification.SCATTERED:
            lo, s_lo = mid, out.summary()
        else:
            notes.append(f"{vary}={mid!r} stayed {out.classification.value}; stopping")
            return result(lo, hi, s_lo, s_hi, inconclusive=True)
    return result(lo, hi, s_lo, s_hi)


# closed-form criterion curves for overlaying on thresholds

def _search_range(vary, bracket):
    lo, hi = bracket
    if vary == "p":
        return 1e-3 * hi, 4 * hi
    return lo, hi


def criterion_curves(template, vary, bracket, ground=None):
    """First parameter values where DHR stops predicting scattering and where each blow-up test fires."""
    if ground is None:
        from .groundstate import default_ground_state

        ground = default_ground_state()
    a, b = _search_range(vary, bracket)

    def diag(x):
        return closed_form_diagnostics(with_param(template, vary, x), ground, hhalf=False)

    def crossing(pred):
        try:
            x = first_crossing(pred, a, b)
        except (ValueError, ArithmeticError, AssertionError):
            return float("nan")
        return float("nan") if x is None else float(x)

    curves = {
        "p_dhr_scatter": crossing(lambda x: criteria.classify_dhr(diag(x)).verdict is criteria.Verdict.SCATTER),
        "p_lushnikov": crossing(lambda x: criteria.lushnikov(diag(x)).blow_up),
        "p_adapted": crossing(lambda x: criteria.adapted(diag(x)).blow_up),
        "p_hhalf": float("nan"),
    }
    if vary == "p" and not isinstance(template, QProfile):
        h1 = closed_form_diagnostics(with_param(template, "p", 1.0), ground).hhalf_sq
        curves["p_hhalf"] = float(np.sqrt(ground.hhalf_sq / h1))
    return curves


def worker_count(requested=None):
    cap = os.environ.get("NLS_COLLAPSE_THREADS")
    n = requested or (os.cpu_count() or 1)
    if cap:
        n = min(n, max(int(cap), 1))
    return max(int(n), 1)


def _sweep_point(args):
    family, fixed, vary, bracket, tol, params, classify = args
    template = make_profile(family, **{**fixed, vary: bracket[1]})
    try:
        res = find_threshold(template, vary, bracket, tol, params, classify=classify)
    except Exception as exc:  # a failed point must not abort the sweep
        res = ThresholdResult(family=template.family, fixed=_fixed(template, vary), vary=vary,
                              p_scatter=float("nan"), p_blowup=float("nan"), tol=tol,
                              inconclusive=True, notes=[f"{type(exc).__name__}: {exc}"])
    try:
        res.curves = criterion_curves(template, vary, bracket)
    except Exception as exc:
        res.notes.append(f"criterion curves failed: {exc}")
    return res


def sweep(family, lattice, vary, bracket, tol=0.01, params=EvolveParams(), workers=None, classify=None):
    """find_threshold at every lattice point (a dict of fixed parameters).

    bracket is either one (low, high) pair or a callable fixed -> (low, high).
    Results come back in lattice order.
    """
    lattice = list(lattice)
    if not lattice:
        raise ValueError("lattice must be nonempty")
    jobs = []
    for fixed in lattice:
        br = bracket(fixed) if callable(bracket) else bracket
        jobs.append((family, dict(fixed), vary, tuple(br), tol, params, classify))
    n = min(worker_count(workers), len(jobs))
    if n == 1:
        return [_sweep_point(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(_sweep_point, jobs))


CURVE_COLUMNS = ("p_dhr_scatter", "p_lushnikov", "p_adapted", "p_hhalf")


def sweep_rows(results):
    """Header and rows for the sweep CSV: fixed params, bracket, criterion curves, status."""
    keys = []
    for r in results:
        keys += [k for k in r.fixed if k not in keys]
    header = keys + ["threshold_lo", "threshold_hi", *CURVE_COLUMNS, "status"]
    rows = []
    for r in results:
        row = [r.fixed.get(k, float("nan")) for k in keys]
        row += [r.p_scatter, r.p_blowup] + [r.curves.get(c, float("nan")) for c in CURVE_COLUMNS]
        rows.append(row + [r.status])
    return header, rows
