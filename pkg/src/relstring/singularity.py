"""Singularity detection, classification, tracking, and local motion models.

The slice tangent vanishes at (t, s) exactly when the lifted angle difference

    D(u, v) = psi(u) - psitilde(v),      u = s + t,  v = s - t,

is a multiple of 2*pi.  For regular data the range of D(., 0) sits strictly
inside one band (2*pi*k, 2*pi*(k+1)); the first singular time is the first
delta = u - v at which the extremes of D(., delta) reach the band edge.  The
search scans a (u, delta) grid, brackets the first edge contact in delta, and
polishes tangency points by Newton on (D - level, zeta(u) - eta(v)).

Classification at an event compares the angular speeds and their derivatives:

    zeta != eta, zeta^2 != eta^2   ordinary cusp
    zeta != eta, zeta^2 == eta^2   bare tangent reversal
    zeta == eta, zeta' != eta'     4/3-cusp (formation vertex)
    gamma_s(t0, .) == 0            whole slice collapses to a point
    otherwise                      higher order

The infinitesimal motion at an event is set by p = (zeta - eta)/2 and
q = (zeta + eta)/2: rotation at rate q/p when p != 0, +-q (track curvature
k0 = p - q^2/p), translation when p = +-q != 0, and a self-similar swallowtail
profile (third-order coefficient u3 = (zeta' - eta')/2) when p = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .curves import NullPair, to_null_pair
from .errors import (InternalConsistencyError, InvalidEventError,
                     PreconditionError, RegularityError,
                     UnclassifiedDegenerateError)
from .evolution import evolve_point
from .periodic import TWO_PI

KINDS = ("ordinary_cusp", "tangent_reversal", "degenerate_43",
         "shrink_to_point", "higher_order")

EVENT_TOL = 1e-6          # defining-equation gate for externally supplied events
CLASSIFY_REL_TOL = 1e-6   # relative gate for zeta == eta comparisons


@dataclass
class SingularEvent:
    """A zero of the slice tangent with its angle-lift data."""

    t0: float
    s0: float
    u0: float
    v0: float
    zeta: float
    eta: float
    zeta_prime: float
    eta_prime: float
    residual: float
    direction: np.ndarray          # e = a(u0)
    position: np.ndarray = None    # gamma(t0, s0) when position data exists
    kind: str = None


@dataclass
class LocalModel:
    """Infinitesimal motion of the slices at a singular event."""

    e: np.ndarray
    p: float
    q: float
    u3: float
    k0: float
    motion: str                    # "rotation" | "translation" | "self_similar" | "unclassified"
    rotation_rate: float = None    # q/p for rotation
    center_offset: float = None    # p/(p^2 - q^2) along e_perp for rotation


@dataclass
class MonotonicityReport:
    winding_a: int
    winding_b: int
    psi_monotone: str | None
    psitilde_monotone: str | None
    extremal_collision: bool | None

    @property
    def both_monotone(self):
        return self.psi_monotone is not None and self.psi_monotone == self.psitilde_monotone


@dataclass
class TrackedCurve:
    """Sampled singular-point track with its on-track diagnostics."""

    param: np.ndarray              # t for propagation, s for formation
    values: np.ndarray             # S(t) resp. T(s)
    residual_max: float
    null_deviation_max: float
    halted: bool
    tpp0: float = None             # formation only: spectral T''(s0)
    future_directed: bool = None   # formation only: sign of T''(s0)

    def __iter__(self):
        return iter((self.param, self.values))


def _as_pair(obj):
    return obj if isinstance(obj, NullPair) else to_null_pair(obj)


def _event_values(pair, t0, s0, data=None):
    u0, v0 = s0 + t0, s0 - t0
    a0 = pair.a(u0)
    b0 = pair.b(v0)
    residual = float(np.linalg.norm(a0 + b0))
    position = None
    if data is not None and hasattr(data, "alpha"):
        position = evolve_point(data, t0, s0)
    return SingularEvent(
        t0=float(t0), s0=float(s0), u0=float(u0), v0=float(v0),
        zeta=float(pair.zeta(u0)), eta=float(pair.eta(v0)),
        zeta_prime=float(pair.zeta.derivative()(u0)),
        eta_prime=float(pair.eta.derivative()(v0)),
        residual=residual, direction=a0, position=position)


def event_at(data, t0, s0, tol=EVENT_TOL, classify_now=True):
    """Build a SingularEvent at (t0, s0), checking the defining equation."""
    pair = _as_pair(data)
    ev = _event_values(pair, t0, s0, data=data)
    if ev.residual > tol:
        raise InvalidEventError(
            f"|a(u0)+b(v0)| = {ev.residual:.3e} at (t0={t0}, s0={s0})")
    if classify_now:
        ev.kind = classify(pair, ev)
    return ev


def classify(data, event, rel_tol=CLASSIFY_REL_TOL, grid=4096):
    """Event kind from the zeta/eta table; shrink-to-point checked first."""
    pair = _as_pair(data)
    if event.residual > EVENT_TOL:
        raise InvalidEventError(
            f"event violates its defining equation ({event.residual:.3e})")
    s = np.arange(grid) * (pair.period / grid)
    speeds = np.linalg.norm(pair.gamma_s(event.t0, s), axis=-1)
    if float(speeds.max()) < 1e-6:
        return "shrink_to_point"
    z, e = event.zeta, event.eta
    gate = rel_tol * max(abs(z), abs(e), 1.0)
    if abs(z - e) >= gate:
        gate2 = rel_tol * max(z * z, e * e, 1.0)
        return "ordinary_cusp" if abs(z * z - e * e) >= gate2 else "tangent_reversal"
    zp, ep = event.zeta_prime, event.eta_prime
    if abs(zp - ep) >= rel_tol * max(abs(zp), abs(ep), 1.0):
        return "degenerate_43"
    return "higher_order"


# -- first-singularity search ------------------------------------------------

def _polish_extremum(pair, delta, u_start, h, maximize):
    """Newton on zeta(u) - eta(u - delta) near a grid extremum of D(., delta)."""
    zeta, eta = pair.zeta, pair.eta
    zeta_p, eta_p = zeta.derivative(), eta.derivative()
    u = float(u_start)
    for _ in range(12):
        g = float(zeta(u) - eta(u - delta))
        gp = float(zeta_p(u) - eta_p(u - delta))
        if abs(gp) < 1e-13:
            break
        step = -g / gp
        step = float(np.clip(step, -2.0 * h, 2.0 * h))
        u += step
        if abs(step) < 1e-14:
            break
    d_val = float(pair.psi(u) - pair.psitilde(u - delta))
    d_ref = float(pair.psi(u_start) - pair.psitilde(u_start - delta))
    if maximize and d_val < d_ref:
        return u_start, d_ref
    if not maximize and d_val > d_ref:
        return u_start, d_ref
    return u, d_val


def _extreme_D(pair, delta, n, maximize):
    """Polished extreme of D(., delta) and its location."""
    L = pair.period
    u = np.arange(n) * (L / n)
    vals = pair.psi(u) - pair.psitilde(u - delta)
    i = int(np.argmax(vals) if maximize else np.argmin(vals))
    u_star, d_star = _polish_extremum(pair, delta, u[i], L / n, maximize)
    return d_star, u_star


def _newton_2d(pair, u, delta, level, max_iter=30):
    """Joint Newton on (D - level, zeta(u) - eta(u - delta)) in (u, delta)."""
    zeta, eta = pair.zeta, pair.eta
    zeta_p, eta_p = zeta.derivative(), eta.derivative()
    for _ in range(max_iter):
        v = u - delta
        f1 = float(pair.psi(u) - pair.psitilde(v)) - level
        z, e = float(zeta(u)), float(eta(v))
        f2 = z - e
        if abs(f1) < 1e-14 and abs(f2) < 1e-12:
            break
        J = np.array([[z - e, e],
                      [float(zeta_p(u) - eta_p(v)), float(eta_p(v))]])
        try:
            du, dd = np.linalg.solve(J, [-f1, -f2])
        except np.linalg.LinAlgError:
            return None
        if not (np.isfinite(du) and np.isfinite(dd)):
            return None
        u += float(du)
        delta += float(dd)
    return u, delta


def _collect_level_events(pair, delta, level, n, data):
    """All tangency points of D(., delta) at the given 2*pi level."""
    L = pair.period
    u = np.arange(n) * (L / n)
    vals = pair.psi(u) - pair.psitilde(u - delta)
    maximize = level > vals.mean()

    if float(vals.max() - vals.min()) < 1e-8:
        # whole slice singular: polish delta through the mean value
        d = delta
        for _ in range(8):
            res = float(np.mean(pair.psi(u) - pair.psitilde(u - d))) - level
            slope = float(np.mean(pair.eta(u - d)))
            if abs(slope) < 1e-14 or abs(res) < 1e-14:
                break
            d -= res / slope
        ev = _event_values(pair, d / 2.0, 0.0, data=data)
        return d, [ev]

    sign = 1.0 if maximize else -1.0
    g = sign * vals
    neighbors = np.maximum(np.roll(g, 1), np.roll(g, -1))
    slack = max(1e-3, 3.0 * float(np.max(np.abs(np.diff(g)))))
    candidates = np.nonzero((g >= neighbors) & (g >= sign * level - slack))[0]

    found = []
    for i in candidates:
        out = _newton_2d(pair, float(u[i]), delta, level)
        if out is None:
            continue
        u_star, d_star = out
        resid = abs(float(pair.psi(u_star) - pair.psitilde(u_star - d_star)) - level)
        if resid > 1e-9 or abs(d_star - delta) > 1e-7 * max(1.0, L):
            continue
        found.append((u_star, d_star))
    if not found:
        return None, []

    delta_min = min(d for _, d in found)
    events = []
    seen = []
    for u_star, d_star in found:
        if d_star - delta_min > 1e-9:
            continue
        s0 = (u_star - d_star / 2.0) % L
        if any(abs(s0 - s) < 1e-7 or abs(abs(s0 - s) - L) < 1e-7 for s in seen):
            continue
        seen.append(s0)
        events.append(_event_values(pair, d_star / 2.0, s0, data=data))
    events.sort(key=lambda ev: ev.s0)
    return delta_min, events


def _column_extremes(pair, n):
    """Grid max/min over u of D(u, delta_j) for delta_j = j*L/n, j = 1..n."""
    L = pair.period
    u = np.arange(n) * (L / n)
    psi_v = pair.psi(u)
    psit_v = pair.psitilde(u)
    psit_ext = np.concatenate([psit_v - TWO_PI * pair.winding_b, psit_v])
    # row i of the (u, delta) table is psit_ext[i : i+n] reversed
    windows = np.lib.stride_tricks.sliding_window_view(psit_ext, n)[:n, ::-1]
    D = psi_v[:, None] - windows
    return D.max(axis=0), D.min(axis=0)


def _first_crossing(pair, n, level, maximize, data, col):
    """First delta in (0, L] where the D-extreme reaches `level`, with events."""
    L = pair.period
    h = L / n
    hit = np.nonzero(col >= level)[0] if maximize else np.nonzero(col <= level)[0]
    if hit.size == 0:
        return None, []
    j = int(hit[0])

    sign = 1.0 if maximize else -1.0

    def F(delta):
        d_star, _ = _extreme_D(pair, delta, n, maximize)
        return sign * (d_star - level)

    hi = (j + 1) * h
    lo = j * h if j > 0 else 1e-9 * L
    guard = 0
    while lo > 1e-9 * L and F(lo) >= 0.0 and guard < n:
        hi = lo
        lo = max(lo - h, 1e-9 * L)
        guard += 1
    if F(lo) >= 0.0:
        delta_star = lo
    else:
        delta_star = brentq(F, lo, hi, xtol=1e-13 * max(1.0, L), rtol=8.9e-16)
    return _collect_level_events(pair, delta_star, level, n, data)


def first_singularity_events(data, grid=2048, refine_budget=3):
    """All singular events at the minimal time t0 > 0, ordered by s0.

    Requires regular data; raises InternalConsistencyError if no event is
    found in (0, L/2] after grid refinement (impossible for valid data).
    """
    pair = _as_pair(data)
    if pair.singular_preset:
        raise RegularityError("first-singularity search requires regular data")
    if pair.winding_a != pair.winding_b:
        raise RegularityError("unequal windings: data is not regular gauge data")
    has_positions = hasattr(data, "alpha")
    src = data if has_positions else None

    n = grid
    for _ in range(max(1, refine_budget)):
        gap0 = float(pair.psi(0.0) - pair.psitilde(0.0))
        band = TWO_PI * np.floor(gap0 / TWO_PI)
        up, dn = band + TWO_PI, band

        colmax, colmin = _column_extremes(pair, n)
        d_up, ev_up = _first_crossing(pair, n, up, True, src, colmax)
        d_dn, ev_dn = _first_crossing(pair, n, dn, False, src, colmin)

        candidates = [(d, evs) for d, evs in ((d_up, ev_up), (d_dn, ev_dn))
                      if d is not None and evs]
        if candidates:
            d_min = min(d for d, _ in candidates)
            events = []
            for d, evs in candidates:
                if d - d_min <= 1e-9:
                    events.extend(evs)
            events.sort(key=lambda ev: (ev.t0, ev.s0))
            for ev in events:
                ev.kind = classify(pair, ev)
            return events
        n *= 2
    raise InternalConsistencyError(
        "no singular time found in (0, L/2] despite refinement; "
        "a singularity is guaranteed for closed regular data")


def first_singularity(data, grid=2048, refine_budget=3):
    """The first singular event (minimal t0, then minimal s0)."""
    return first_singularity_events(data, grid=grid, refine_budget=refine_budget)[0]


def singular_set_at_time(data, t, grid=4096):
    """All s in [0, L) with gamma_s(t, s) = 0, bracketed then polished."""
    pair = _as_pair(data)
    L = pair.period
    s = np.arange(grid + 1) * (L / grid)
    g = pair.psi(s + t) - pair.psitilde(s - t)
    zeta, eta = pair.zeta, pair.eta

    roots = []
    m_lo = int(np.floor(g.min() / TWO_PI))
    m_hi = int(np.ceil(g.max() / TWO_PI))
    for m in range(m_lo, m_hi + 1):
        level = TWO_PI * m
        f = g - level
        crossings = np.nonzero(f[:-1] * f[1:] < 0.0)[0]
        for i in crossings:
            root = brentq(lambda x: float(pair.psi(x + t) - pair.psitilde(x - t)) - level,
                          s[i], s[i + 1], xtol=1e-14 * max(1.0, L))
            roots.append(root)
        exact = np.nonzero(f == 0.0)[0]
        roots.extend(s[i] for i in exact if i < grid)

    # tangential contacts: polish interior extrema and near-level grid points
    interior = np.nonzero((g[1:-1] - g[:-2]) * (g[2:] - g[1:-1]) < 0.0)[0] + 1
    slack = max(1e-4, 3.0 * float(np.max(np.abs(np.diff(g)))))
    near = np.nonzero(np.abs(g - TWO_PI * np.round(g / TWO_PI)) < slack)[0]
    for i in np.unique(np.concatenate([interior, near])):
        x = s[min(i, grid)]
        for _ in range(10):
            gp = float(zeta(x + t) - eta(x - t))
            gpp = float(zeta.derivative()(x + t) - eta.derivative()(x - t))
            if abs(gpp) < 1e-13:
                break
            x -= gp / gpp
        val = float(pair.psi(x + t) - pair.psitilde(x - t))
        if abs(val - TWO_PI * np.round(val / TWO_PI)) < 1e-9:
            roots.append(x)

    roots = sorted(r % L for r in roots)
    out = []
    for r in roots:
        if not out or (r - out[-1] > 1e-8 and (L - r + out[0]) > 1e-8):
            out.append(r)
    return np.asarray(out)


# -- singular-point tracking ---------------------------------------------------

def _second_derivs(pair, t, s):
    """(gamma_ss, gamma_ts, gamma_sss) from the angle lifts."""
    u, v = s + t, s - t
    za, ev = float(pair.zeta(u)), float(pair.eta(v))
    zp, ep = float(pair.zeta.derivative()(u)), float(pair.eta.derivative()(v))
    a, b = pair.a(u), pair.b(v)
    a_perp = np.array([-a[1], a[0]])
    b_perp = np.array([-b[1], b[0]])
    g_ss = 0.5 * (za * a_perp + ev * b_perp)
    g_ts = 0.5 * (za * a_perp - ev * b_perp)
    g_sss = 0.5 * (zp * a_perp - za * za * a + ep * b_perp - ev * ev * b)
    return g_ss, g_ts, g_sss


def propagation_curve(data, event, t_range, step=1e-3, min_gss=1e-5):
    """Track S(t) with S' = -<gamma_ss, gamma_ts>/|gamma_ss|^2 from the event.

    Asserts on-track residual <= 1e-8 and nullity of the spacetime track
    velocity within 1e-6; halts with a partial track if |gamma_ss| drops
    below `min_gss` (the cusp stops being ordinary).
    """
    if event.kind != "ordinary_cusp":
        raise PreconditionError("propagation tracking needs an ordinary cusp")
    pair = _as_pair(data)

    def rhs(t, S):
        g_ss, g_ts, _ = _second_derivs(pair, t, S)
        n2 = float(g_ss @ g_ss)
        if n2 < min_gss ** 2:
            raise _LeftRegime
        return -float(g_ss @ g_ts) / n2

    t_lo, t_hi = t_range
    ts, Ss = [event.t0], [event.s0]
    res_max, null_max = event.residual, 0.0
    halted = False

    for direction in (+1, -1):
        t_end = t_hi if direction > 0 else t_lo
        n_steps = int(np.ceil(abs(t_end - event.t0) / step))
        t, S = event.t0, event.s0
        side_t, side_S = [], []
        try:
            for _ in range(n_steps):
                h = direction * min(step, abs(t_end - t))
                if h == 0.0:
                    break
                k1 = rhs(t, S)
                k2 = rhs(t + h / 2, S + h / 2 * k1)
                k3 = rhs(t + h / 2, S + h / 2 * k2)
                k4 = rhs(t + h, S + h * k3)
                S += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
                t += h
                g_s = pair.gamma_s(t, S)
                resid = float(np.linalg.norm(g_s))
                if resid > 1e-8:
                    raise InternalConsistencyError(
                        f"track left the singular locus (|gamma_s| = {resid:.2e} at t = {t:.6f})")
                vel = pair.gamma_t(t, S) + rhs(t, S) * g_s
                null_dev = abs(float(np.linalg.norm(vel)) - 1.0)
                if null_dev > 1e-6:
                    raise InternalConsistencyError(
                        f"track velocity is not null (deviation {null_dev:.2e})")
                res_max = max(res_max, resid)
                null_max = max(null_max, null_dev)
                side_t.append(t)
                side_S.append(S)
        except _LeftRegime:
            halted = True
        if direction > 0:
            ts = ts + side_t
            Ss = Ss + side_S
        else:
            ts = side_t[::-1] + ts
            Ss = side_S[::-1] + Ss

    return TrackedCurve(np.asarray(ts), np.asarray(Ss), res_max, null_max, halted)


class _LeftRegime(Exception):
    pass


def formation_curve(data, event, s_range, step=1e-3, min_gts=1e-6, verify_tol=1e-4):
    """Track T(s) with T' = -<gamma_ss, gamma_ts>/|gamma_ts|^2 from a 4/3 event.

    Verifies T'(s0) = 0 and that the discrete T''(s0) matches the spectral
    value -<gamma_sss, gamma_ts>/|gamma_ts|^2 within `verify_tol`.  The sign
    of T'' reports whether the split cusps lie in the future or the past.
    """
    if event.kind != "degenerate_43":
        raise PreconditionError("formation tracking needs a 4/3 (formation) event")
    pair = _as_pair(data)

    def rhs(s, T):
        g_ss, g_ts, _ = _second_derivs(pair, T, s)
        n2 = float(g_ts @ g_ts)
        if n2 < min_gts ** 2:
            raise _LeftRegime
        return -float(g_ss @ g_ts) / n2

    g_ss0, g_ts0, g_sss0 = _second_derivs(pair, event.t0, event.s0)
    tpp_spectral = -float(g_sss0 @ g_ts0) / float(g_ts0 @ g_ts0)
    tp0 = rhs(event.s0, event.t0)
    if abs(tp0) > 1e-5:
        raise InternalConsistencyError(f"T'(s0) = {tp0:.2e}, expected 0")

    s_lo, s_hi = s_range
    ss, Ts = [event.s0], [event.t0]
    res_max, null_max = event.residual, 0.0
    halted = False
    for direction in (+1, -1):
        s_end = s_hi if direction > 0 else s_lo
        n_steps = int(np.ceil(abs(s_end - event.s0) / step))
        s, T = event.s0, event.t0
        side_s, side_T = [], []
        try:
            for _ in range(n_steps):
                h = direction * min(step, abs(s_end - s))
                if h == 0.0:
                    break
                k1 = rhs(s, T)
                k2 = rhs(s + h / 2, T + h / 2 * k1)
                k3 = rhs(s + h / 2, T + h / 2 * k2)
                k4 = rhs(s + h, T + h * k3)
                T += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
                s += h
                resid = float(np.linalg.norm(pair.gamma_s(T, s)))
                res_max = max(res_max, resid)
                # spacetime tangent (T'(s), gamma_s + T' gamma_t): null iff
                # |gamma_s + T' gamma_t| = |T'|; near the vertex both sides -> 0
                null_dev = abs(float(np.linalg.norm(
                    pair.gamma_s(T, s) + rhs(s, T) * pair.gamma_t(T, s))) - abs(rhs(s, T)))
                null_max = max(null_max, null_dev)
                side_s.append(s)
                side_T.append(T)
        except _LeftRegime:
            halted = True
        if direction > 0:
            ss = ss + side_s
            Ts = Ts + side_T
        else:
            ss = side_s[::-1] + ss
            Ts = side_T[::-1] + Ts

    curve = TrackedCurve(np.asarray(ss), np.asarray(Ts), res_max, null_max, halted)
    # discrete T'' at s0 from the integrated track
    i0 = int(np.argmin(np.abs(curve.param - event.s0)))
    if 0 < i0 < len(curve.param) - 1:
        h1 = curve.param[i0] - curve.param[i0 - 1]
        h2 = curve.param[i0 + 1] - curve.param[i0]
        tpp_fd = 2.0 * (h1 * curve.values[i0 + 1] - (h1 + h2) * curve.values[i0]
                        + h2 * curve.values[i0 - 1]) / (h1 * h2 * (h1 + h2))
        if abs(tpp_fd - tpp_spectral) > verify_tol * max(1.0, abs(tpp_spectral)):
            raise InternalConsistencyError(
                f"discrete T'' = {tpp_fd:.6f} disagrees with spectral {tpp_spectral:.6f}")
    curve.tpp0 = tpp_spectral
    curve.future_directed = tpp_spectral > 0
    return curve


# -- local models ---------------------------------------------------------------

def local_model(data, event, rel_tol=CLASSIFY_REL_TOL, degenerate_floor=1e-7):
    """Motion coefficients (e, p, q, u3, k0) and the motion kind at an event."""
    pair = _as_pair(data)
    if event.residual > EVENT_TOL:
        raise InvalidEventError("event violates its defining equation")
    p = 0.5 * (event.zeta - event.eta)
    q = 0.5 * (event.zeta + event.eta)
    u3 = 0.5 * (event.zeta_prime - event.eta_prime)
    e = event.direction
    gate_p = rel_tol * max(abs(event.zeta), abs(event.eta), 1.0)

    if abs(p) > gate_p:
        if abs(abs(p) - abs(q)) <= rel_tol * max(abs(p), abs(q)):
            return LocalModel(e, p, q, u3, 0.0, "translation")
        k0 = p - q * q / p
        return LocalModel(e, p, q, u3, k0, "rotation",
                          rotation_rate=q / p, center_offset=p / (p * p - q * q))
    if max(abs(p), abs(q), abs(u3)) <= degenerate_floor:
        raise UnclassifiedDegenerateError(
            "all of p, q, u3 vanish below threshold at the event")
    if abs(q) > degenerate_floor and abs(u3) > degenerate_floor:
        return LocalModel(e, 0.0, q, u3, 0.0, "self_similar")
    return LocalModel(e, 0.0, q, u3, 0.0, "unclassified")


def self_similar_residual(source, event, scales=(2, 4, 8, 16),
                          window=(1.0, 1.0), n=33):
    """Deviation of rescaled slices from the self-similar profile, per scale.

    `source` is InitialData or a callable gamma(t, s) -> points.  For a
    self-similar event the residual (normalized by the leading cubic profile)
    decays like 1/scale.
    """
    if hasattr(source, "alpha"):
        def gamma(t, s):
            return evolve_point(source, t, s)
    elif callable(source):
        gamma = source
    else:
        raise PreconditionError("source must be InitialData or a callable gamma(t, s)")

    p = 0.5 * (event.zeta - event.eta)
    q = 0.5 * (event.zeta + event.eta)
    u3 = 0.5 * (event.zeta_prime - event.eta_prime)
    if abs(p) > CLASSIFY_REL_TOL * max(abs(event.zeta), abs(event.eta), 1.0) \
            or abs(q * u3) < 1e-12:
        raise PreconditionError("event is not of self-similar (formation) type")

    e = event.direction
    e_perp = np.array([-e[1], e[0]])
    T, S = window
    that = np.linspace(-T, T, n)
    shat = np.linspace(-S, S, n)
    TH, SH = np.meshgrid(that, shat, indexing="ij")
    base = gamma(event.t0, event.s0)
    normalizer = float(np.max(np.abs(q * TH * SH + u3 * SH ** 3 / 6.0)))

    out = {}
    for nu in scales:
        ts = TH / nu ** 2
        ss = SH / nu
        actual = gamma(event.t0 + ts, event.s0 + ss) - base
        X = q * ts * ss + u3 * ss ** 3 / 6.0
        Y = ts - 0.5 * q * q * ts * ss ** 2 - q * u3 * ss ** 4 / 8.0
        model = Y[..., None] * e + X[..., None] * e_perp
        diff = np.linalg.norm(actual - model, axis=-1)
        out[nu] = float(nu ** 3 * diff.max() / normalizer)
    return out


def monotonicity_diagnostics(pair_or_data, n=8192):
    """Monotonicity of the angle lifts and, for zero index, value collisions.

    Non-monotone lifts of nonzero-index data already certify curvature blow-up
    on the way; for zero index the report flags whether some lift value is
    shared by two parameters (the obstruction mechanism).  Diagnostic only.
    """
    pair = _as_pair(pair_or_data)
    L = pair.period
    s = np.arange(n + 1) * (L / n)
    zeta_v = pair.zeta(s)
    eta_v = pair.eta(s)
    tol = 1e-10 * max(1.0, float(np.max(np.abs(zeta_v))), float(np.max(np.abs(eta_v))))

    def direction(vals):
        if np.all(vals >= -tol):
            return "non-decreasing"
        if np.all(vals <= tol):
            return "non-increasing"
        return None

    collision = None
    if pair.winding_a == 0 and pair.winding_b == 0:
        psi_v = pair.psi(s)
        psit_v = pair.psitilde(s)
        p_lo, p_hi = float(psi_v.min()), float(psi_v.max())
        q_lo, q_hi = float(psit_v.min()), float(psit_v.max())
        collision = False
        m_lo = int(np.floor((p_lo - q_hi) / TWO_PI)) - 1
        m_hi = int(np.ceil((p_hi - q_lo) / TWO_PI)) + 1
        for m in range(m_lo, m_hi + 1):
            lo = max(p_lo, q_lo + TWO_PI * m)
            hi = min(p_hi, q_hi + TWO_PI * m)
            if hi > lo and (lo < p_hi and hi > p_lo):
                # psitilde values (mod 2*pi) land inside psi's open range:
                # each interior value is taken at least twice per period
                if hi > p_lo + 1e-12 and lo < p_hi - 1e-12:
                    collision = True
                    break

    return MonotonicityReport(pair.winding_a, pair.winding_b,
                              direction(zeta_v), direction(eta_v), collision)


def procrustes_fit(points_a, points_b):
    """Best rigid motion (rotation + translation) taking matched A onto B.

    Returns (theta, rotation_matrix, translation, rms_deviation).
    """
    A = np.asarray(points_a, dtype=float)
    B = np.asarray(points_b, dtype=float)
    ca, cb = A.mean(axis=0), B.mean(axis=0)
    za = (A[:, 0] - ca[0]) + 1j * (A[:, 1] - ca[1])
    zb = (B[:, 0] - cb[0]) + 1j * (B[:, 1] - cb[1])
    w = np.sum(np.conj(za) * zb)
    theta = float(np.angle(w))
    R = np.array([[np.cos(theta), -np.sin(theta)],
                  [np.sin(theta), np.cos(theta)]])
    trans = cb - R @ ca
    dev = (A @ R.T + trans) - B
    rms = float(np.sqrt(np.mean(np.sum(dev * dev, axis=1))))
    return theta, R, trans, rms
