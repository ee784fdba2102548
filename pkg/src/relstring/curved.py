"""Reduced system on a maximal cylinder in a vacuum background.

In conformal coordinates the second-fundamental-form components satisfy
M + P = 0 and the two transport identities

    (M + N)(tau, xi) = (M + N)(0, xi - tau),
    (M - N)(tau, xi) = (M - N)(0, xi + tau),

so they are evaluated exactly as translates.  The conformal factor solves

    u_tt = u_xx - e^{-2u} (M^2 - N^2),

integrated by an explicit leapfrog with centered space differences.  When
a_lb = min(M0^2 - N0^2) > 0 the spatial mean w of u obeys w'' <= -a_lb e^{-2w}
(after flipping time so w'(0) <= 0), which forces w -> -infinity no later than
the blow-up of the scalar comparison equation w'' = -a_lb e^{-2w}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

from .errors import PreconditionError, StepSizeError, StructuralError
from .periodic import PeriodicFunction


@dataclass(frozen=True)
class ReducedBackgroundData:
    """(M0, N0, u0, v0) on one period Xi; M + P = 0 is implied."""

    m0: PeriodicFunction
    n0: PeriodicFunction
    u0: PeriodicFunction
    v0: PeriodicFunction

    def __post_init__(self):
        fns = (self.m0, self.n0, self.u0, self.v0)
        base = self.m0.period
        if any(abs(f.period - base) > 1e-12 * base for f in fns):
            raise StructuralError("all background fields must share the period")
        if any(f.dim != 1 for f in fns):
            raise StructuralError("background fields are scalar")

    @property
    def period(self):
        return self.m0.period

    @classmethod
    def from_callables(cls, m0, n0, u0, v0, period, n=512):
        mk = lambda f: PeriodicFunction.from_callable(f, period, n=n)
        return cls(mk(m0), mk(n0), mk(u0), mk(v0))

    @classmethod
    def constant(cls, m0, n0, u0, v0, period=2 * np.pi):
        mk = lambda v: PeriodicFunction.constant(v, period)
        return cls(mk(m0), mk(n0), mk(u0), mk(v0))


@dataclass(frozen=True)
class HypothesisReport:
    a_lb: float                  # refined min of M0^2 - N0^2
    min_abs_m_minus_n: float
    min_abs_m_plus_n: float
    scale: float                 # max |M0^2 - N0^2|, for the zero gate

    @property
    def holds(self):
        return self.a_lb > 1e-12 * max(self.scale, 1.0)


def _refined_min(fn, period, n):
    """Grid minimum refined by golden-section search around the argmin."""
    xi = np.arange(n) * (period / n)
    vals = fn(xi)
    i = int(np.argmin(vals))
    h = period / n
    res = minimize_scalar(lambda x: float(fn(np.asarray(x))),
                          bracket=None, bounds=(xi[i] - h, xi[i] + h),
                          method="bounded", options={"xatol": 1e-12})
    return float(min(res.fun, vals[i]))


def hypothesis_check(data, n=4096):
    """a_lb = min(M0^2 - N0^2); the blow-up hypothesis holds iff a_lb > 0."""
    m0, n0 = data.m0, data.n0
    a_lb = _refined_min(lambda x: m0(x) ** 2 - n0(x) ** 2, data.period, n)
    mm = _refined_min(lambda x: (m0(x) - n0(x)) ** 2, data.period, n)
    mp = _refined_min(lambda x: (m0(x) + n0(x)) ** 2, data.period, n)
    xi = np.arange(n) * (data.period / n)
    scale = float(np.max(np.abs(m0(xi) ** 2 - n0(xi) ** 2)))
    return HypothesisReport(a_lb, float(np.sqrt(max(mm, 0.0))),
                            float(np.sqrt(max(mp, 0.0))), scale)


def transport_MN(data, tau):
    """(M, N) at time tau as exact translates of the initial profiles."""
    plus = (data.m0 + data.n0).shift(-tau)
    minus = (data.m0 - data.n0).shift(+tau)
    return 0.5 * (plus + minus), 0.5 * (plus - minus)


@dataclass(frozen=True)
class CurvedState:
    tau: float
    u: np.ndarray
    u_tau: np.ndarray
    w: float
    w_prime: float
    u_max: float
    u_min: float
    em2u_max: float


@dataclass
class Trajectory:
    states: list
    a_lb: float
    dt: float
    dx: float
    blow_up_threshold: float
    blow_up_bracket: tuple | None = None
    reflected: bool = False

    @property
    def taus(self):
        return np.array([st.tau for st in self.states])

    @property
    def w(self):
        return np.array([st.w for st in self.states])

    @property
    def w_prime(self):
        return np.array([st.w_prime for st in self.states])


def _source_profile(data, tau, xi, reflected):
    """Exact transported M^2 - N^2 on the grid at time tau."""
    if not reflected:
        return (data.m0(xi - tau) + data.n0(xi - tau)) \
            * (data.m0(xi + tau) - data.n0(xi + tau))
    # reflected run integrates u(-tau): the two transport directions swap
    return (data.m0(xi + tau) + data.n0(xi + tau)) \
        * (data.m0(xi - tau) - data.n0(xi - tau))


def evolve_u(data, tau_max, n=512, cfl=0.5, blow_threshold=1e8,
             out_every=None, halvings=6):
    """Leapfrog the conformal factor until tau_max or blow-up.

    If the mean of v0 is positive, the run is reflected in time so the decay
    mechanism points forward.  On crossing the e^{-2u} threshold the last step
    is re-run with halved steps (`halvings` times) to bracket the blow-up
    time; the bracket (below, above) lands in `blow_up_bracket`.
    """
    if n < 64:
        raise StructuralError("need at least 64 grid points")
    if not 0.0 < cfl <= 0.9:
        raise StructuralError("cfl must lie in (0, 0.9]")
    Xi = data.period
    dx = Xi / n
    dt = cfl * dx
    xi = np.arange(n) * dx
    u = data.u0(xi).astype(float)
    v = data.v0(xi).astype(float)
    reflected = bool(v.mean() > 0.0)
    if reflected:
        v = -v

    if out_every is None:
        out_every = max(1, int(np.ceil(tau_max / dt / 256.0)))

    def lap(f):
        return (np.roll(f, -1) - 2.0 * f + np.roll(f, 1)) / (dx * dx)

    def accel(tau, f):
        # clamp the exponent: one clamped step past the blow-up threshold
        # keeps the crossing state representable for the bracket
        return lap(f) - np.exp(np.minimum(-2.0 * f, 700.0)) \
            * _source_profile(data, tau, xi, reflected)

    states = []

    def em2u(f):
        return float(np.exp(min(-2.0 * f.min(), 700.0)))

    def record(tau, f, fv):
        states.append(CurvedState(
            tau=float(tau), u=f.copy(), u_tau=fv.copy(),
            w=float(f.mean()), w_prime=float(fv.mean()),
            u_max=float(f.max()), u_min=float(f.min()),
            em2u_max=em2u(f)))

    def blown(f):
        return em2u(f) > blow_threshold

    def stream(u0, v0, tau0, step, record_stride):
        """Generate (tau, u, v) leapfrog states; yields after every step."""
        u_prev = u0.copy()
        u_cur = u0 + step * v0 + 0.5 * step * step * accel(tau0, u0)
        m = 1
        while True:
            tau_cur = tau0 + m * step
            u_next = 2.0 * u_cur - u_prev + step * step * accel(tau_cur, u_cur)
            if not np.all(np.isfinite(u_next)) or float(u_next.max()) > 80.0:
                raise StepSizeError("evolution went unstable (growth without source)")
            v_cur = (u_next - u_prev) / (2.0 * step)
            yield tau_cur, u_cur, v_cur, m % record_stride == 0
            u_prev, u_cur = u_cur, u_next
            m += 1

    record(0.0, u, v)
    bracket = None
    tau_base, u_base, v_base, step = 0.0, u, v, dt
    done = False
    while not done:
        last_ok = (tau_base, u_base, v_base)
        crossed = None
        for tau_cur, u_cur, v_cur, do_rec in stream(u_base, v_base, tau_base, step, out_every):
            if blown(u_cur):
                crossed = (tau_cur, u_cur, v_cur)
                break
            last_ok = (tau_cur, u_cur, v_cur)
            if do_rec:
                record(tau_cur, u_cur, v_cur)
            if tau_cur >= tau_max:
                done = True
                break
        if crossed is None:
            break
        if halvings <= 0 or step <= dt / 2 ** 12:
            bracket = (last_ok[0], crossed[0])
            record(crossed[0], crossed[1], crossed[2])
            done = True
        else:
            tau_base, u_base, v_base = last_ok
            step *= 0.5
            halvings -= 1

    traj = Trajectory(states, hypothesis_check(data).a_lb, dt, dx,
                      blow_threshold, bracket, reflected)
    return traj


@dataclass(frozen=True)
class MonitorReport:
    wpp_violation: float          # max of w'' + a_lb e^{-2w} (should be <= tol)
    wprime_decreasing: bool
    energy_min_increment: float   # min increment of (w')^2 - a_lb e^{-2w}
    tol: float
    resolved_tau_max: float       # monitoring window end

    @property
    def holds(self):
        return (self.wpp_violation <= self.tol and self.wprime_decreasing
                and self.energy_min_increment >= -self.tol)


def mean_monitor(trajectory, tol=1e-3, source_cap=10.0):
    """Check the three mean-value inequalities along a recorded trajectory.

    Restricted to the window where e^{-2w} <= source_cap: beyond it the
    recorded sampling cannot resolve the difference quotients (w'''' grows
    like the squared source), so a violation there would only flag the
    discretization, not the mechanism.
    """
    if not trajectory.states:
        raise PreconditionError("empty trajectory")
    taus = trajectory.taus
    w = trajectory.w
    wp = trajectory.w_prime
    a = trajectory.a_lb
    keep = np.exp(-2.0 * w) <= source_cap
    stop = int(np.argmin(keep)) if not keep.all() else len(w)
    if stop < 3:
        raise PreconditionError("trajectory too short to monitor")
    taus, w, wp = taus[:stop], w[:stop], wp[:stop]
    wpp = np.gradient(wp, taus)
    violation = float(np.max(wpp[1:-1] + a * np.exp(-2.0 * w[1:-1])))
    decreasing = bool(np.all(np.diff(wp) < 1e-12))
    energy = wp * wp - a * np.exp(-2.0 * w)
    min_inc = float(np.min(np.diff(energy))) if len(energy) > 1 else 0.0
    return MonitorReport(violation, decreasing, min_inc, tol, float(taus[-1]))


def blow_up_bound(a_lb, w0, w0_prime, depth=-30.0, rtol=1e-12):
    """Blow-up time of the comparison equation w'' = -a_lb e^{-2w}.

    Integrates with an adaptive high-order scheme until w reaches `depth`
    (or the step size underflows inside the blow-up), then adds the analytic
    tail e^w / sqrt(a_lb), which is below 1e-13 at the default depth.
    """
    if a_lb <= 0.0:
        raise PreconditionError("comparison bound needs a_lb > 0")

    def rhs(_, y):
        return [y[1], -a_lb * np.exp(-2.0 * min(y[0], 60.0))]

    def hit_depth(_, y):
        return y[0] - depth

    hit_depth.terminal = True
    hit_depth.direction = -1

    def tail(w):
        return float(np.exp(w) / np.sqrt(a_lb))

    t0, y = 0.0, [float(w0), float(w0_prime)]
    chunk = max(1.0, np.pi / np.sqrt(a_lb) * np.exp(min(w0, 20.0)))
    with np.errstate(over="ignore"):
        for _ in range(80):
            sol = solve_ivp(rhs, (t0, t0 + chunk), y, method="DOP853",
                            rtol=rtol, atol=1e-14, events=hit_depth)
            if sol.t_events[0].size:
                return float(sol.t_events[0][0]) + tail(depth)
            w_end = float(sol.y[0][-1])
            if sol.status == -1 and w_end < -20.0:
                # step size underflowed inside the singularity
                return float(sol.t[-1]) + tail(w_end)
            t0 = float(sol.t[-1])
            y = [w_end, float(sol.y[1][-1])]
            chunk *= 2.0
    raise PreconditionError("comparison solution did not blow up (a_lb too small?)")
