"""Radial 3D cubic NLS  i u_t + Lap u + g |u|^2 u = 0  by Strang splitting.

With v = r u the equation becomes i v_t + v_rr + g |v|^2 v / r^2 = 0 with
v(0) = v(R) = 0, so the linear flow is exact in the discrete sine basis.
"""
from dataclasses import dataclass, field as dc_field, replace
from enum import Enum

import numpy as np
from scipy.fft import dct, dst, idst
from scipy.interpolate import CubicSpline

from .quantities import RadialField


class Classification(str, Enum):
    BLOW_UP = "BlowUp"
    SCATTERED = "Scattered"
    UNDETERMINED = "Undetermined"
    UNRELIABLE = "Unreliable"


@dataclass(frozen=True)
class EvolveParams:
    t_max: float = 20.0
    dt0: float = 6e-4
    dt_floor: float = 1e-9
    phase_step: float = 0.006
    amp_blowup_factor: float = 50.0
    grad_blowup_factor: float = 10.0
    scatter_l4_fraction: float = 0.01
    scatter_window: float = 1.0
    sponge_width: float = 0.2
    sponge_strength: float = 5.0
    sponge_every: int = 10
    conservation_tol: float = 1e-6
    energy_tol: float = 1e-2
    r_max: float = 30.0
    n_points: int = 8192
    sample_every: int = 50
    window: int = 5
    nonlinearity: float = 1.0
    fixed_dt: bool = False
    backward: bool = False

    def __post_init__(self):
        if not (0 < self.dt_floor < self.dt0):
            raise ValueError("need 0 < dt_floor < dt0")
        if not (self.amp_blowup_factor > 1 and self.grad_blowup_factor > 1):
            raise ValueError("blow-up factors must exceed 1")
        if not (0 < self.scatter_l4_fraction < 1):
            raise ValueError("scatter_l4_fraction must lie in (0, 1)")
        if not (0 <= self.sponge_width < 1 and self.sponge_strength >= 0):
            raise ValueError("bad sponge parameters")
        if self.t_max <= 0 or self.n_points < 16 or self.r_max <= 0:
            raise ValueError("bad domain or horizon")
        if self.sample_every < 1 or self.sponge_every < 1 or self.window < 3:
            raise ValueError("sampling intervals must be positive and the window at least 3")

    @property
    def dr(self):
        return self.r_max / self.n_points

    def refined(self):
        """Doubled horizon and halved spacing, used for retries."""
        return replace(self, t_max=2 * self.t_max, n_points=2 * self.n_points)


SERIES_FIELDS = ("t", "dt", "mass", "absorbed_mass", "energy", "absorbed_energy", "grad_sq",
                 "l4_fourth", "variance", "variance_rate", "amp_max", "eta", "me_ratio")


@dataclass
class TimeSeries:
    t: np.ndarray
    dt: np.ndarray
    mass: np.ndarray
    absorbed_mass: np.ndarray
    energy: np.ndarray
    absorbed_energy: np.ndarray
    grad_sq: np.ndarray
    l4_fourth: np.ndarray
    variance: np.ndarray
    variance_rate: np.ndarray
    amp_max: np.ndarray
    eta: np.ndarray
    me_ratio: np.ndarray

    def __len__(self):
        return self.t.size

    @property
    def total_mass(self):
        return self.mass + self.absorbed_mass

    @property
    def total_energy(self):
        return self.energy + self.absorbed_energy


@dataclass
class SimulationOutcome:
    classification: Classification
    t_end: float
    series: TimeSeries
    mass_drift: float
    energy_drift: float
    final: RadialField
    params: EvolveParams
    t_estimate: float | None = None
    reason: str = ""
    notes: list = dc_field(default_factory=list)

    def summary(self):
        d = {
            "classification": self.classification.value,
            "t_end": self.t_end,
            "mass_drift_per_time": self.mass_drift,
            "energy_drift_per_time": self.energy_drift,
            "reason": self.reason,
        }
        if self.t_estimate is not None:
            d["t_estimate"] = self.t_estimate
        return d


class _State:
    """Sine-basis discretization on r_k = k dr, interior k = 1..n-1."""

    def __init__(self, params, ground):
        self.p = params
        n = params.n_points
        self.n = n
        self.dr = params.dr
        self.r = np.arange(1, n) * self.dr
        self.k = np.pi * np.arange(1, n) / params.r_max
        r0 = (1 - params.sponge_width) * params.r_max
        x = np.clip((self.r - r0) / max(params.r_max - r0, 1e-300), 0, None)
        self.sigma = params.sponge_strength * x**2 if params.sponge_width > 0 else np.zeros_like(self.r)
        self.ground = ground
        self.gnl = params.nonlinearity

    def coeffs(self, v):
        return dst(v, type=1) / self.n

    def measure(self, v):
        p, dr, r, k = self.p, self.dr, self.r, self.k
        c = self.coeffs(v)
        a2 = np.abs(v) ** 2
        mass = 4 * np.pi * dr * a2.sum()
        grad = 4 * np.pi * np.sum(k**2 * np.abs(c) ** 2) * p.r_max / 2
        l4 = 4 * np.pi * dr * np.sum(a2**2 / r**2)
        var = 4 * np.pi * dr * np.sum(r**2 * a2)
        x = np.zeros(self.n + 1, dtype=complex)
        x[1:-1] = c * k
        vr = dct(x, type=1)[1:-1] / 2
        vt = 16 * np.pi * dr * np.sum(r * np.imag(np.conj(v) * vr))
        return mass, grad, l4, var, vt

    def energy(self, grad, l4):
        return 0.5 * grad - 0.25 * self.gnl * l4


def _initial_values(u0, params, ground, profile=None):
    r = np.arange(1, params.n_points) * params.dr
    if profile is not None:
        return profile.values(r, ground)
    if np.isclose(u0.dr, params.dr) and u0.values.size >= params.n_points:
        return u0.values[1 : params.n_points]
    rr = np.concatenate([-u0.r[:0:-1], u0.r])
    out = np.zeros(r.size, dtype=complex)
    inside = r <= u0.r_max
    for part in (np.real, np.imag):
        vals = part(u0.values)
        s = CubicSpline(rr, np.concatenate([vals[:0:-1], vals]))
        out[inside] += (1 if part is np.real else 1j) * s(r[inside])
    return out


def evolve(u0: RadialField | None, ground=None, params: EvolveParams = EvolveParams(), profile=None):
    """Integrate from u0 (or a profile sampled directly on the solver grid) and classify the run."""
    if ground is None:
        from .groundstate import default_ground_state

        ground = default_ground_state()
    st = _State(params, ground)
    u = _initial_values(u0, params, ground, profile)
    v = st.r * u.astype(complex)
    r, k = st.r, st.k
    sgn = -1.0 if params.backward else 1.0
    mq, gq, eq = ground.mass_sq, ground.grad_sq, ground.energy

    rows = []
    absorbed_m = absorbed_e = 0.0

    def sample(t, dt):
        m, gr, l4, var, vt = st.measure(v)
        e = st.energy(gr, l4)
        amp = np.max(np.abs(v) / r)
        eta = np.sqrt(max(m * gr, 0) / (mq * gq))
        rows.append((t, dt, m, absorbed_m, e, absorbed_e, gr, l4, var, vt, amp, eta, m * e / (mq * eq)))
        return rows[-1]

    first = sample(0.0, 0.0)
    m0, e0, g0, l40, amp0 = first[2], first[4], first[6], first[7], first[10]
    e_scale = max(abs(e0), 1e-3 * g0, 1e-300)

    def finish(cls, t, reason, t_est=None):
        ts = TimeSeries(*[np.array(col) for col in zip(*rows)])
        span = max(t, 1e-300)
        mdrift = abs(ts.total_mass[-1] - m0) / max(m0, 1e-300) / max(span, 1.0)
        edrift = abs(ts.total_energy[-1] - e0) / e_scale / max(span, 1.0)
        uf = np.zeros(params.n_points + 1, dtype=complex)
        uf[1:-1] = v / r
        uf[0] = (4 * uf[1] - uf[2]) / 3
        return SimulationOutcome(cls, t, ts, float(mdrift), float(edrift), RadialField(params.dr, uf),
                                 params, t_est, reason)

    if m0 == 0:
        return finish(Classification.SCATTERED, 0.0, "zero data")

    def blow_up_window():
        w = rows[-params.window:]
        if len(w) < params.window:
            return False
        amp = np.array([x[10] for x in w])
        gr = np.array([x[6] for x in w])
        return bool(np.all(np.diff(amp) > 0) and np.all(np.diff(gr) > 0))

    def t_star():
        w = rows[-params.window:]
        t = np.array([x[0] for x in w])
        y = np.array([x[10] for x in w]) ** -2.0
        slope, icpt = np.polyfit(t, y, 1)
        return float(-icpt / slope) if slope < 0 else float(t[-1])

    t, n_step, since_sponge = 0.0, 0, 0.0
    use_sponge = params.sponge_strength > 0 and params.sponge_width > 0
    gnl = params.nonlinearity
    while t < params.t_max - 1e-14:
        amp = np.max(np.abs(v) / r)
        dt = params.dt0 if params.fixed_dt else min(params.dt0, params.phase_step / max(gnl * amp**2, 1e-300))
        floor_hit = dt < params.dt_floor
        dt = max(dt, params.dt_floor)
        dt = min(dt, params.t_max - t)
        half = np.exp(sgn * 0.5j * dt * gnl * (np.abs(v) / r) ** 2)
        v *= half
        c = dst(v, type=1)
        c *= np.exp(-sgn * 1j * k**2 * dt)
        v = idst(c, type=1)
        v *= np.exp(sgn * 0.5j * dt * gnl * (np.abs(v) / r) ** 2)
        t += dt
        n_step += 1
        since_sponge += dt
        if use_sponge and n_step % params.sponge_every == 0:
            m1, g1, l1, _, _ = st.measure(v)
            v *= np.exp(-st.sigma * since_sponge)
            m2, g2, l2, _, _ = st.measure(v)
            absorbed_m += m1 - m2
            absorbed_e += st.energy(g1, l1) - st.energy(g2, l2)
            since_sponge = 0.0
        amp = np.max(np.abs(v) / r)
        amp_trigger = amp >= params.amp_blowup_factor * amp0
        if n_step % params.sample_every and not (amp_trigger or floor_hit) and t < params.t_max - 1e-14:
            continue
        row = sample(t, dt)
        grad_trigger = np.sqrt(row[6]) >= params.grad_blowup_factor * np.sqrt(g0)
        if amp_trigger or grad_trigger or floor_hit:
            if blow_up_window():
                why = "amplitude" if amp_trigger else ("gradient" if grad_trigger else "step floor")
                return finish(Classification.BLOW_UP, t, f"{why} trigger with monotone growth", t_star())
            if floor_hit:
                return finish(Classification.UNDETERMINED, t, "step floor reached without monotone growth")
        mdrift = abs(row[2] + row[3] - m0) / m0
        if mdrift > params.conservation_tol * max(t, 1.0):
            return finish(Classification.UNRELIABLE, t, f"mass drift {mdrift:.2e}")
        if abs(row[4] + row[5] - e0) / e_scale > params.energy_tol:
            return finish(Classification.UNRELIABLE, t, "energy drift beyond tolerance")
        if row[7] < params.scatter_l4_fraction * l40 and t >= params.scatter_window:
            recent = [x for x in rows if x[0] >= t - params.scatter_window]
            if len(recent) >= 2 and all(x[7] < params.scatter_l4_fraction * l40 for x in recent):
                gap = [abs(x[11] ** 2 - x[12] / 3) for x in recent]
                if gap[-1] <= gap[0]:
                    return finish(Classification.SCATTERED, t, "L4 norm decayed")
    return finish(Classification.UNDETERMINED, t, "time horizon reached")


@dataclass
class VirialResiduals:
    t: np.ndarray
    v_tt: np.ndarray
    residual_energy: np.ndarray
    residual_l4: np.ndarray

    @property
    def max_residual(self):
        return float(max(np.max(np.abs(self.residual_energy)), np.max(np.abs(self.residual_l4))))


def virial_check(outcome: SimulationOutcome):
    """Second difference of V(t) against 24E - 4|grad u|^2 and 16E - 2 g |u|_4^4."""
    s = outcome.series
    if len(s) < 3:
        raise ValueError("virial check needs at least three samples")
    if outcome.params.sponge_strength > 0 and outcome.params.sponge_width > 0:
        raise ValueError("virial check needs a sponge-free run")
    t, V = s.t, s.variance
    h1 = t[1:-1] - t[:-2]
    h2 = t[2:] - t[1:-1]
    # the three-point formula is only first order on uneven spacing (e.g. the
    # shortened last step), so keep evenly spaced triples
    even = np.abs(h1 - h2) <= 1e-9 * np.maximum(h1, h2)
    if not np.any(even):
        raise ValueError("virial check needs evenly spaced samples")
    vtt = 2 * ((V[2:] - V[1:-1]) / h2 - (V[1:-1] - V[:-2]) / h1) / (h1 + h2)
    gnl = outcome.params.nonlinearity
    e, gr, l4 = s.energy[1:-1], s.grad_sq[1:-1], s.l4_fourth[1:-1]
    vtt, e, gr, l4 = vtt[even], e[even], gr[even], l4[even]
    return VirialResiduals(t[1:-1][even], vtt, vtt - (24 * e - 4 * gr), vtt - (16 * e - 2 * gnl * l4))


def evolve_profile(profile, ground=None, params: EvolveParams = EvolveParams()):
    """Sample a profile on the solver grid and evolve it."""
    need = profile.core / 10
    if profile.beta_osc > 0:
        need = min(need, 1 / (10 * profile.beta_osc))
    if params.dr > need:
        n = int(np.ceil(params.r_max / need))
        params = replace(params, n_points=int(2 ** np.ceil(np.log2(n))))
    return evolve(None, ground, params, profile=profile)
