import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from nls_collapse import criteria
from nls_collapse.criteria import (
    C_INF, C_SHARP, Criterion, InapplicableError, LocalizedDiagnostics, Verdict, adapted, adapted_as_lushnikov_form,
    adapted_simplified, classify_dhr, evaluate_all, g, lushnikov, lushnikov_simplified, mass_concentration,
    radial_localized, verify_inequalities,
)
from nls_collapse.profiles import Gaussian, OffCentered, Oscillatory, QProfile, SuperGaussian, closed_form_diagnostics
from nls_collapse.quantities import Diagnostics, RadialField, compute_diagnostics, localized_variance
from nls_collapse.solver import Classification, evolve
from nls_collapse.tables import first_crossing


def diag(prof, ground):
    return closed_form_diagnostics(prof, ground, hhalf=False)


def test_g_values():
    assert g(1.0) == 0
    assert g(4.0) == pytest.approx(-np.sqrt(2))
    assert g(0.25) == pytest.approx(np.sqrt(1.25))
    assert g(1 - 1e-9) == pytest.approx(0, abs=1e-4)
    assert g(1 + 1e-9) == pytest.approx(0, abs=1e-4)
    assert np.allclose(g(np.array([0.25, 4.0])), [np.sqrt(1.25), -np.sqrt(2)])


@pytest.mark.parametrize("w", [0.0, -1.0])
def test_g_domain(w):
    with pytest.raises(ValueError):
        g(w)


def test_constants():
    assert round(C_SHARP, 4) == 1.3983
    assert C_INF == pytest.approx((2**5.5 * np.pi / 3) ** (1 / 7), rel=1e-14)
    assert criteria.C_LA == pytest.approx(1 / (4 * C_SHARP ** (14 / 3)))


def test_dhr_examples(ground):
    assert classify_dhr(diag(QProfile(0.9), ground)).verdict is Verdict.SCATTER
    v = classify_dhr(diag(QProfile(1.1), ground))
    assert v.verdict is Verdict.BLOW_UP and v.criterion is Criterion.DHR
    d = diag(Gaussian(3.0), ground)
    assert d.energy < 0 and classify_dhr(d).verdict is Verdict.BLOW_UP
    # negative energy with eta below one cannot occur for real data, so check the branch directly
    v = classify_dhr(Diagnostics(1, -1, 1, 1, 1, 0, eta=0.5, me_ratio=2.0))
    assert v.verdict is Verdict.BLOW_UP and v.criterion is Criterion.NEGATIVE_ENERGY
    d = diag(QProfile(1.0), ground)
    assert d.eta == pytest.approx(1) and d.me_ratio == pytest.approx(1)
    boundary = Diagnostics(1, 1, 1, 1, 1, 0, eta=1.0, me_ratio=1.0)
    assert classify_dhr(boundary).verdict is Verdict.NO_CONCLUSION


def test_witnesses_rederive_verdict(ground):
    v = lushnikov(diag(Gaussian(2.5), ground))
    assert (v.witnesses["lhs"] < v.witnesses["rhs"]) == v.blow_up
    assert v.witnesses["g"] == pytest.approx(g(v.witnesses["omega"]))
    v = adapted(diag(Gaussian(2.5, 1, -0.2), ground))
    assert (v.witnesses["lhs"] < v.witnesses["rhs"]) == v.blow_up
    assert v.witnesses["g"] == pytest.approx(g(v.witnesses["kappa"]))


def crossing(test, family, ground, lo=1.0, hi=2.9, **kw):
    return first_crossing(lambda p: test(diag(family(p=p, **kw), ground)).blow_up, lo, hi)


def test_gaussian_real_thresholds(ground):
    assert crossing(lushnikov, Gaussian, ground) == pytest.approx(np.sqrt(4 * np.sqrt(2)), abs=1e-6)
    assert crossing(adapted, Gaussian, ground) == pytest.approx(2.45, abs=0.005)
    assert crossing(adapted, SuperGaussian, ground, hi=3.5) == pytest.approx(2.89, abs=0.005)
    assert not lushnikov(diag(Gaussian(2.37), ground)).blow_up
    assert lushnikov(diag(Gaussian(2.39), ground)).blow_up


def test_ground_state_phase_thresholds(ground):
    assert lushnikov(diag(QProfile(1.0, -0.18), ground)).blow_up
    assert not lushnikov(diag(QProfile(1.0, -0.17), ground)).blow_up
    gl = first_crossing(lambda x: lushnikov(diag(QProfile(1.0, x), ground)).blow_up, -0.5, 0.0)
    ga = first_crossing(lambda x: adapted(diag(QProfile(1.0, x), ground)).blow_up, -0.5, 0.0)
    assert gl == pytest.approx(-0.177, abs=0.002)
    assert ga == pytest.approx(-0.279, abs=0.002)


def test_gaussian_phase_roots(ground):
    # focusing phase: blow-up between the roots 1.58 and 4.08; defocusing phase: never at alpha = 1
    for p, fires in ((1.5, False), (1.7, True), (2.5, True), (4.0, True), (4.2, False)):
        assert lushnikov(diag(Gaussian(p, 1, -0.5), ground)).blow_up is fires
        assert not lushnikov(diag(Gaussian(p, 1, 0.5), ground)).blow_up


def test_real_data_reductions(ground):
    for p in (2.2, 2.4, 2.6):
        d = diag(Gaussian(p), ground)
        assert lushnikov(d).blow_up == (d.variance < 3 / 8 * d.mass**2 / d.energy)
        assert adapted(d).blow_up == (d.variance < criteria.C_LA * d.mass ** (7 / 3) / d.energy ** (2 / 3))


def test_boundary_is_no_conclusion():
    # omega = 1 exactly with V_t = 0
    m, e = 2.0, 1.0
    v = 3 * m**2 / (8 * e)
    d = Diagnostics(m, e, 10.0, 1.0, v, 0.0, eta=1.2, me_ratio=2.0)
    assert lushnikov(d).verdict is Verdict.NO_CONCLUSION


def test_preconditions():
    neg = Diagnostics(1, -1, 1, 1, 1, 0, eta=1, me_ratio=-1)
    assert lushnikov(neg).verdict is Verdict.NO_CONCLUSION
    assert "E > 0" in adapted(neg).witnesses["precondition"]
    inf = Diagnostics(1, 1, 1, 1, float("inf"), 0, eta=1, me_ratio=1)
    assert adapted(inf).verdict is Verdict.NO_CONCLUSION


profiles = st.one_of(
    st.builds(Gaussian, st.floats(0.2, 5), st.floats(0.3, 5), st.floats(-2, 2)),
    st.builds(SuperGaussian, st.floats(0.2, 5), st.floats(0.3, 5), st.floats(-2, 2)),
    st.builds(OffCentered, st.floats(0.2, 10), st.floats(0.3, 5), st.floats(-2, 2)),
    st.builds(Oscillatory, st.floats(0.2, 5), st.floats(0, 6), st.floats(-2, 2)),
    st.builds(QProfile, st.floats(0.5, 2), st.floats(-1, 1)),
)


@settings(max_examples=300, deadline=None)
@given(profiles)
def test_simplified_forms_agree(ground, prof):
    d = diag(prof, ground)
    assume(d.energy > 0)
    lv, av = lushnikov(d), adapted(d)  # both raise on disagreement away from the boundary
    fl, sl = lushnikov_simplified(d)
    fa, sa = adapted_simplified(d)
    if abs(lv.witnesses["lhs"] - lv.witnesses["rhs"]) > 1e-6 * max(1.0, abs(lv.witnesses["rhs"])):
        assert fl == lv.blow_up
    if abs(av.witnesses["lhs"] - av.witnesses["rhs"]) > 1e-6 * max(1.0, abs(av.witnesses["rhs"])):
        assert fa == av.blow_up


@settings(max_examples=300, deadline=None)
@given(profiles)
def test_scatter_only_from_dhr(ground, prof):
    for v in evaluate_all(diag(prof, ground)):
        if v.verdict is Verdict.SCATTER:
            assert v.criterion is Criterion.DHR


@settings(max_examples=300)
@given(st.floats(0.1, 100), st.floats(0.01, 100), st.floats(0.01, 1000), st.floats(-100, 100))
def test_comparison_identity(m, e, v, vt):
    d = Diagnostics(m, e, 1.0, 1.0, v, vt, eta=1.0, me_ratio=1.0, energy_gamma=vt**2 / (32 * v))
    lhs, rhs = adapted_as_lushnikov_form(d)
    w = adapted(d).witnesses
    mu = np.sqrt(2) * (m * e) ** (1 / 6) / (np.sqrt(3) * C_SHARP ** (7 / 3))
    assert lhs == pytest.approx(w["lhs"], rel=1e-12)
    # g is evaluated on a cancelling radicand, so compare against the prefactor scale
    assert abs(rhs - w["rhs"]) <= 1e-12 * 2 * np.sqrt(3) * mu * max(1.0, abs(w["g"]))


def test_implication_flip(ground):
    # real data: Lushnikov fires iff omega < 1, adapted iff kappa < 1, and kappa = omega / mu^2
    mqeq = ground.mass_sq * ground.energy

    def implies(me_ratio):
        m = 1.0
        e = me_ratio * mqeq / m
        omegas = np.concatenate([np.linspace(0.01, 0.99, 100), 1 - np.logspace(-12, -2, 100)])
        ds = [Diagnostics(m, e, 1, 1, w * 3 * m**2 / (8 * e), 0.0, eta=1, me_ratio=me_ratio) for w in omegas]
        return all(adapted(d).blow_up for d in ds if lushnikov(d).blow_up)

    flip = first_crossing(implies, 1.0, 3.0, tol=1e-12)
    assert flip == pytest.approx(7**5 * np.pi**2 / 450 / mqeq, abs=1e-3)
    assert round(flip, 2) == 2.06
    assert not implies(flip - 0.01) and implies(flip + 0.01)


def scaled(prof, lam):
    """The NLS symmetry lam u(lam x) expressed in profile parameters."""
    if isinstance(prof, Gaussian):
        return Gaussian(lam * prof.p, lam**2 * prof.alpha, lam**2 * prof.gamma)
    if isinstance(prof, SuperGaussian):
        return SuperGaussian(lam * prof.p, lam**4 * prof.alpha, lam**2 * prof.gamma)
    return OffCentered(lam**3 * prof.p, lam**2 * prof.alpha, lam**2 * prof.gamma)


scalable = st.one_of(
    st.builds(Gaussian, st.floats(0.2, 5), st.floats(0.3, 5), st.floats(-2, 2)),
    st.builds(SuperGaussian, st.floats(0.2, 5), st.floats(0.3, 5), st.floats(-2, 2)),
    st.builds(OffCentered, st.floats(0.2, 10), st.floats(0.3, 5), st.floats(-2, 2)),
)


@settings(max_examples=200, deadline=None)
@given(scalable, st.sampled_from([0.5, 2.0]))
def test_verdicts_scale_invariant(ground, prof, lam):
    d0, d1 = diag(prof, ground), diag(scaled(prof, lam), ground)
    assert d1.eta == pytest.approx(d0.eta, rel=1e-9)
    assert d1.me_ratio == pytest.approx(d0.me_ratio, rel=1e-9, abs=1e-12)
    for a, b in zip(evaluate_all(d0), evaluate_all(d1)):
        near = "lhs" in a.witnesses and abs(a.witnesses["lhs"] - a.witnesses["rhs"]) < 1e-8
        if not near:
            assert a.verdict is b.verdict


def test_verdicts_scale_invariant_sampled(ground):
    lam = 2.0
    r = np.arange(6001) / 400
    u = lambda x: (2.2 * np.exp(-(x**2) / 2) + 0.8 * np.exp(-(x**2) / 8)) * np.exp(-0.3j * x**2)
    d0 = compute_diagnostics(RadialField(1 / 400, u(r)), ground, hhalf=False)
    # lam u(lam x) sampled at r / lam is lam u(r)
    d1 = compute_diagnostics(RadialField(1 / 800, lam * u(r)), ground, hhalf=False)
    assert d1.mass == pytest.approx(d0.mass / lam, rel=1e-8)
    assert [v.verdict for v in evaluate_all(d0)] == [v.verdict for v in evaluate_all(d1)]


# localized criterion

def test_localized_preconditions():
    loc = LocalizedDiagnostics(R=100.0, V_R=1.0, V_R_rate=0.0)
    v = radial_localized(loc, mass=1.0, energy=0.5)
    assert v.verdict is Verdict.NO_CONCLUSION and "ME > 1" in v.witnesses["precondition"]
    v = radial_localized(LocalizedDiagnostics(R=1.0, V_R=1.0, V_R_rate=0.0), mass=2.0, energy=1.0)
    assert "R^2 >= kappa_psi" in v.witnesses["precondition"]


@pytest.mark.parametrize("delta", [0.0, -0.01, 0.2])
def test_localized_delta_range(delta):
    with pytest.raises(ValueError):
        radial_localized(LocalizedDiagnostics(1, 1, 0), 1, 2, delta=delta)


def test_localized_small_delta_limit():
    m, e, vr = 2.0, 1.0, 0.5
    loc = LocalizedDiagnostics(R=1e8, V_R=vr, V_R_rate=0.0)
    w = radial_localized(loc, m, e, delta=1e-12).witnesses
    arg = 8 ** (2 / 3) * C_INF ** (14 / 3) * e ** (2 / 3) * vr / m ** (7 / 3)
    coef = np.sqrt(6) * 8 ** (1 / 6) * (m * e) ** (1 / 6) / C_INF ** (7 / 3)
    assert w["kappa_inf"] == pytest.approx(arg, rel=1e-9)
    assert w["rhs"] == pytest.approx(coef * g(arg), rel=1e-9)


def tail_field(p=2.87, eps=0.02, dr=0.05, r_end=1.5e5):
    r = np.arange(int(r_end / dr) + 1) * dr
    tail = np.where(r > 3, 1 / np.maximum(r, 1) ** 2, 0) * (1 - np.exp(-np.clip(r - 3, 0, None) ** 2))
    return RadialField(dr, p * np.exp(-(r**2) / 2) + eps * tail)


def test_localized_fires_on_tailed_data(ground):
    # a Gaussian core with a slowly decaying r^-2 tail: the variance grows with the cutoff, so the
    # finite-variance tests give nothing, while the localized test fires
    f = tail_field()
    d = compute_diagnostics(f, ground, hhalf=False)
    R = 1.01 * np.sqrt(criteria.KAPPA_PSI * d.mass**2 / criteria.DELTA_DEFAULT)
    v = radial_localized(LocalizedDiagnostics(R, *localized_variance(f, R)), d.mass, d.energy)
    assert v.verdict is Verdict.BLOW_UP
    assert not lushnikov(d).blow_up and not adapted(d).blow_up
    assert d.mass * d.energy > 1
    # the truncated variance keeps growing with the cutoff
    d_short = compute_diagnostics(tail_field(r_end=5e4), ground, hhalf=False)
    assert d.variance > 2.5 * d_short.variance - 1e3


@pytest.mark.slow
def test_localized_example_blows_up(ground):
    f = tail_field(r_end=30.0, dr=30 / 8192)
    assert evolve(f, ground).classification is Classification.BLOW_UP


# mass concentration

def bump(A, dr=30 / 8192, r_max=30.0):
    r = np.arange(int(round(r_max / dr)) + 1) * dr
    return RadialField(dr, A * np.where(r < 1, (1 - r**2) ** 3, 0.0))


# ME and the ratio of the ball radius to the support are both invariant under
# u -> s^-1 u(r/s), so the unit-radius bump covers every s
BUMP_A = 7.848  # ball radius just above 1 at delta = 0.1


def test_mass_concentration_bump_fires(ground):
    v = mass_concentration(bump(BUMP_A), 0.1, ground=ground)
    assert v.witnesses["ME"] == pytest.approx(162.3, rel=1e-3)
    assert v.witnesses["radius"] > 1
    assert v.witnesses["outside_fraction"] == 0
    assert v.verdict is Verdict.BLOW_UP
    # at the default delta the ball is smaller than the support
    assert mass_concentration(bump(BUMP_A), ground=ground).verdict is Verdict.NO_CONCLUSION


def test_mass_concentration_spread_data(ground):
    v = mass_concentration(bump(5.0), 0.01, ground=ground)
    assert v.witnesses["outside_fraction"] > 0.5 and v.verdict is Verdict.NO_CONCLUSION
    assert v.witnesses["outside_fraction"] > v.witnesses["bound"]


def test_mass_concentration_needs_positive_me(ground):
    v = mass_concentration(bump(12.0), ground=ground)
    assert v.verdict is Verdict.NO_CONCLUSION and v.witnesses["precondition"] == "ME > 1"


def test_mass_concentration_rejects_complex(ground):
    r = np.arange(401) / 100
    with pytest.raises(InapplicableError):
        mass_concentration(RadialField(0.01, np.exp(-(r**2) + 0.3j * r**2)), ground=ground)
    with pytest.raises(ValueError):
        mass_concentration(bump(2.0), delta=0.5)


@pytest.mark.slow
def test_mass_concentration_bump_blows_up(ground):
    assert evolve(bump(BUMP_A), ground).classification is Classification.BLOW_UP


# sharp inequalities

def mixture(rng, dr=1 / 800, n=9601):
    r = np.arange(n) * dr
    k = rng.integers(1, 4)
    u = sum(rng.normal() * np.exp(-rng.uniform(0.2, 3) * r**2) for _ in range(k))
    return RadialField(dr, u * np.exp(1j * rng.uniform(-1, 1) * r**2))


def test_inequalities_random_fields(ground):
    rng = np.random.default_rng(7)
    for _ in range(200):
        rep = verify_inequalities(mixture(rng), ground)
        assert rep.uncertainty_relative >= -1e-10
        assert rep.interpolation_relative >= -1e-10
        assert rep.extremality_gap >= -1e-10


def test_gaussian_saturates_uncertainty(ground):
    r = np.arange(2401) / 200
    for gamma in (0.0, 0.4):
        rep = verify_inequalities(RadialField(1 / 200, 1.7 * np.exp((-0.8 + 1j * gamma) * r**2)), ground)
        assert abs(rep.uncertainty_relative) < 1e-8


def test_extremizer(ground):
    n = 4000
    r = np.arange(2 * n + 1) / n
    phi = np.sqrt(np.clip(1 - r**2, 0, None))
    f = RadialField(1 / n, phi)
    d = compute_diagnostics(f, ground, hhalf=False)
    assert d.l4_fourth == pytest.approx(32 * np.pi / 105, rel=1e-10)
    assert d.variance == pytest.approx(8 * np.pi / 35, rel=1e-10)
    assert d.mass == pytest.approx(8 * np.pi / 15, rel=1e-10)
    rep = verify_inequalities(f, ground)
    assert rep.lagrangian**14 == pytest.approx(3**5 * 5**2 / (2**2 * 7**5 * np.pi**2), rel=1e-4)
    assert abs(rep.extremality_gap) < 1e-10
