"""Radial ground state of -Q + Q'' + (2/r) Q' + Q^3 = 0 by shooting on Q(0)."""
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .grid import DEFAULT_GRID, RadialGrid
from .quantities import RadialField, hhalf_norm_sq, radial_fourier, radial_integral, radial_derivative


class GroundStateError(RuntimeError):
    pass


class NonConvergence(GroundStateError):
    pass


class GridTooSmall(GroundStateError):
    pass


@dataclass(frozen=True, eq=False)
class GroundState:
    dr: float
    samples: np.ndarray
    q0: float
    tail_c: float
    tail_k: float
    mass_sq: float
    grad_sq: float
    l4_fourth: float
    var: float
    hhalf_sq: float
    energy: float

    @property
    def r(self):
        return np.arange(self.samples.size) * self.dr

    @property
    def field(self):
        return RadialField(self.dr, self.samples)

    def __call__(self, r):
        """Q at arbitrary radii: cubic interpolation inside the grid, fitted tail beyond."""
        r = np.abs(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        inside = r <= self.r[-1]
        out[inside] = self._spline(r[inside])
        ro = r[~inside]
        out[~inside] = self.tail_c * np.exp(-self.tail_k * ro) / ro
        return out

    @cached_property
    def _spline(self):
        # even extension keeps the slope zero at the origin
        r = self.r
        rr = np.concatenate([-r[:0:-1], r])
        qq = np.concatenate([self.samples[:0:-1], self.samples])
        return CubicSpline(rr, qq)


def _rhs(r, y):
    q, dq = y
    return [dq, -2 * dq / r + q - q**3]


def _shoot(a, r_end, rtol):
    r0 = 1e-6
    y0 = [a + (a - a**3) * r0**2 / 6, (a - a**3) * r0 / 3]

    def cross(r, y):
        return y[0]

    cross.terminal = True
    cross.direction = -1

    def turn(r, y):
        return y[1]

    turn.terminal = True
    turn.direction = 1
    sol = solve_ivp(_rhs, (r0, r_end), y0, method="DOP853", rtol=rtol, atol=rtol * 1e-2,
                    events=[cross, turn], dense_output=True)
    if sol.t_events[0].size:
        return 1, sol
    if sol.t_events[1].size:
        return -1, sol
    return 0, sol


def solve_ground_state(grid: RadialGrid = DEFAULT_GRID, tol: float = 1e-10, bracket=(3.0, 6.0)):
    """Shoot on a = Q(0): overshooting profiles cross zero, undershooting ones turn up."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    rtol = min(max(tol * 1e-3, 1e-13), 1e-6)
    width = max(tol * 1e-3, 1e-15)
    r_end = 60.0
    lo, hi = bracket
    s_lo, _ = _shoot(lo, r_end, rtol)
    s_hi, _ = _shoot(hi, r_end, rtol)
    if s_lo != -1 or s_hi != 1:
        raise NonConvergence(f"no sign change of the shooting functional on [{lo}, {hi}]")
    while hi - lo > width * lo:
        mid = 0.5 * (lo + hi)
        s, _ = _shoot(mid, r_end, rtol)
        if s == 1:
            hi = mid
        elif s == -1:
            lo = mid
        else:
            break
    a = 0.5 * (lo + hi)
    _, sol_lo = _shoot(lo, r_end, rtol)
    _, sol_hi = _shoot(hi, r_end, rtol)
    # trust the shot until the bracketing solutions separate, then attach the
    # linear tail c e^{-r}/r
    r_sep = min(sol_lo.t[-1], sol_hi.t[-1])
    rr = np.linspace(1e-3, r_sep, 4000)
    qa, qb = sol_lo.sol(rr)[0], sol_hi.sol(rr)[0]
    bad = np.nonzero(np.abs(qa - qb) > 1e-3 * np.abs(qa))[0]
    r_trust = rr[bad[0]] if bad.size else r_sep
    r_match = min(12.0, 0.6 * r_trust)

    r = grid.r
    q = np.empty_like(r)
    core = r <= r_match
    rc = np.where(r[core] < 1e-6, 1e-6, r[core])
    sol = sol_lo if abs(lo - a) <= abs(hi - a) else sol_hi
    q[core] = sol.sol(rc)[0]
    qm = sol.sol([r_match])[0][0]
    c = qm * r_match * np.exp(r_match)
    q[~core] = c * np.exp(-r[~core]) / r[~core]
    if q[-1] > tol:
        raise GridTooSmall(f"Q(r_max) = {q[-1]:.3g} exceeds tol; enlarge the grid")

    # refit the tail on the last two grid points, as the norms' analytic tail
    r1, r2 = r[-2], r[-1]
    k = np.log((q[-2] * r1) / (q[-1] * r2)) / (r2 - r1)
    ct = q[-1] * r2 * np.exp(k * r2)
    R = r[-1]
    tail_m = 4 * np.pi * ct**2 * np.exp(-2 * k * R) / (2 * k)
    tail_v = 4 * np.pi * ct**2 * np.exp(-2 * k * R) * (R**2 / (2 * k) + R / (2 * k**2) + 1 / (4 * k**3))

    dr = grid.dr
    dq = radial_derivative(q, dr)
    mass = radial_integral(q**2, dr) + tail_m
    grad = radial_integral(dq**2, dr) + k**2 * tail_m
    l4 = radial_integral(q**4, dr)
    var = radial_integral(r**2 * q**2, dr) + tail_v
    field = RadialField(dr, q)
    h = hhalf_norm_sq(radial_fourier(field))
    return GroundState(
        dr=dr, samples=q, q0=float(a), tail_c=float(ct), tail_k=float(k),
        mass_sq=float(mass), grad_sq=float(grad), l4_fourth=float(l4), var=float(var),
        hhalf_sq=float(h), energy=float(0.5 * grad - 0.25 * l4),
    )


@lru_cache(maxsize=1)
def default_ground_state():
    return solve_ground_state()
