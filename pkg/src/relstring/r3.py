"""Space curves in R^3 whose zero-velocity cylinder stays regular forever.

With zero initial velocity the worldsheet is gamma(t,s) = (alpha(s+t) +
alpha(s-t))/2 for an arclength-parametrized closed curve alpha, and

    2 gamma_s(t, s) = alpha'(s+t) + alpha'(s-t)

sweeps exactly all tangent pairs, so the surface is immersed for all time iff
no two tangents are antipodal.  A plane curve always has antipodal tangents;
a smoothed non-planar polygon need not.  The builder smooths the closed
polyline through four non-coplanar vertices with planar corner arcs whose
tangent angle turns strictly monotonically inside an open half-turn, which
rules out antipodal pairs within each corner plane.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize
from scipy.special import betainc

from .errors import GeometryError, StructuralError
from .periodic import PeriodicFunction, invert_cumulative


class SpaceCurve3:
    """Closed arclength-parametrized curve in R^3 (spectral, period = length)."""

    def __init__(self, position, tol=1e-8):
        if position.dim != 3:
            raise StructuralError("SpaceCurve3 needs 3D values")
        self.position = position
        self.tangent_fn = position.derivative()
        speed = np.linalg.norm(self.tangent_fn.sample(8192), axis=-1)
        dev = float(np.max(np.abs(speed - 1.0)))
        if dev > tol:
            raise StructuralError(f"curve is not arclength parametrized ({dev:.3e})")

    @property
    def length(self):
        return self.position.period

    def __call__(self, s):
        return self.position(s)

    def tangent(self, s):
        return self.tangent_fn(s)


@dataclass(frozen=True)
class TetraSmoothingSpec:
    """Four non-coplanar vertices, a corner cut-back radius, a profile order."""

    vertices: np.ndarray
    corner_radius: float
    profile_order: int = 7

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.asarray(self.vertices, dtype=float))
        if self.vertices.shape != (4, 3):
            raise StructuralError("need exactly four vertices in R^3")
        v = self.vertices
        vol = abs(np.linalg.det(np.stack([v[1] - v[0], v[2] - v[0], v[3] - v[0]]))) / 6.0
        if vol <= 1e-9:
            raise GeometryError(f"vertices are (nearly) coplanar, volume = {vol:.2e}")
        if self.corner_radius <= 0.0:
            raise GeometryError("corner radius must be positive "
                                "(r = 0 leaves tangent-angle jumps)")
        cyc = [v[i % 4] for i in range(5)]
        shortest = min(np.linalg.norm(cyc[i + 1] - cyc[i]) for i in range(4))
        if self.corner_radius >= 0.5 * shortest:
            raise GeometryError("corner radius must be below half the shortest edge")
        if self.profile_order < 3 or self.profile_order % 2 == 0:
            raise StructuralError("profile order must be an odd integer >= 3")


def _smoothstep(order, x):
    """Monotone [0,1] ramp with (order-1)/2 vanishing derivatives at the ends."""
    m = (order - 1) // 2
    return betainc(m + 1, m + 1, np.clip(x, 0.0, 1.0))


def smoothed_polygon_curve(vertices, corner_radius, profile_order=7, samples=4096):
    """Smooth a closed polyline into an arclength C^4 curve.

    Each corner is replaced by a planar arc whose tangent angle follows a
    monotone smoothstep ramp over the (sub-half-turn) exterior angle; the
    ramp's vanishing end derivatives make the assembled curve C^4 and fit for
    spectral resampling.  Cut-back distances equal the corner radius on both
    sides.  Planarity and monotone-angle conditions are re-verified per arc.
    """
    v = np.asarray(vertices, dtype=float)
    nv = v.shape[0]
    r = float(corner_radius)
    cyc = [v[i % nv] for i in range(nv + 2)]
    dense = 2048
    x = np.linspace(0.0, 1.0, dense)
    ramp = _smoothstep(profile_order, x)

    arcs = []
    for i in range(nv):
        vertex = cyc[i + 1]
        d_in = cyc[i + 1] - cyc[i]
        d_in = d_in / np.linalg.norm(d_in)
        d_out = cyc[i + 2] - cyc[i + 1]
        d_out = d_out / np.linalg.norm(d_out)
        cos_t = float(np.clip(d_in @ d_out, -1.0, 1.0))
        theta = float(np.arccos(cos_t))
        if theta < 1e-9 or theta > np.pi - 1e-9:
            raise GeometryError("consecutive edges are (anti)parallel")
        n = d_out - cos_t * d_in
        n = n / np.linalg.norm(n)

        omega = theta * ramp
        # cut-back per unit arclength; lam = mu by ramp symmetry
        I_c = float(np.trapezoid(np.cos(omega), x))
        I_s = float(np.trapezoid(np.sin(omega), x))
        lam_unit = I_c - I_s * cos_t / np.sin(theta)
        mu_unit = I_s / np.sin(theta)
        if abs(lam_unit - mu_unit) > 1e-12:
            raise GeometryError("asymmetric smoothing profile")
        ell = r / lam_unit
        start = vertex - r * d_in

        tangents = (np.cos(omega)[:, None] * d_in + np.sin(omega)[:, None] * n)
        rel = cumulative_simpson(tangents, x=x * ell, axis=0, initial=0.0)
        pts = start + rel
        # planarity residual of the corner arc
        binormal = np.cross(d_in, n)
        lp_res = float(np.max(np.abs((pts - vertex) @ binormal)))
        if lp_res > 1e-9 * max(1.0, r):
            raise GeometryError(f"corner arc left its plane ({lp_res:.2e})")
        if np.any(np.diff(omega) < 0.0) or theta >= np.pi:
            raise GeometryError("corner angle profile is not monotone inside a half-turn")
        arcs.append({
            "ell": ell,
            "spline": CubicSpline(x * ell, pts, axis=0),
            "end": pts[-1],
        })

    pieces = []  # (length, evaluator)
    for i in range(nv):
        arc = arcs[i]
        pieces.append((arc["ell"], arc["spline"]))
        seg_start = arc["end"]
        nxt = arcs[(i + 1) % nv]
        seg_end = nxt["spline"](0.0)
        seg = seg_end - seg_start
        seg_len = float(np.linalg.norm(seg))
        if seg_len < 1e-9:
            raise GeometryError("corner cut-backs collide on an edge")
        seg_dir = seg / seg_len

        def segment(sig, p0=seg_start.copy(), d=seg_dir.copy()):
            return p0 + np.asarray(sig)[..., None] * d

        pieces.append((seg_len, segment))

    lengths = np.array([p[0] for p in pieces])
    total = float(lengths.sum())
    offsets = np.concatenate([[0.0], np.cumsum(lengths)])

    s_vals = np.arange(samples) * (total / samples)
    pos = np.empty((samples, 3))
    idx = np.searchsorted(offsets, s_vals, side="right") - 1
    idx = np.clip(idx, 0, len(pieces) - 1)
    for k in range(len(pieces)):
        mask = idx == k
        if np.any(mask):
            pos[mask] = pieces[k][1](s_vals[mask] - offsets[k])

    return SpaceCurve3(PeriodicFunction.from_samples(pos, total))


def build_tetra_curve(spec, samples=4096):
    """Smoothed closed cycle P1 P2 P3 P4 P1 through four non-coplanar points.

    Satisfies the planar-corner and monotone-half-turn-angle conditions by
    construction.  Note that regardless of the vertices, the corner arc at
    P(i+1) somewhere runs parallel to the chord P(i+2) - P(i); for a 4-cycle
    the chords at opposite corners are exact negatives, so the curve always
    carries one antipodal tangent pair per diagonal and the zero-velocity
    cylinder over it is not everywhere regular.  Five or more vertices escape
    this (see smoothed_polygon_curve and skew_pentagon_curve).
    """
    return smoothed_polygon_curve(spec.vertices, spec.corner_radius,
                                  spec.profile_order, samples)


def regular_tetra_curve(radius_fraction=0.1):
    """Smoothed cycle through the vertices of a regular tetrahedron."""
    verts = np.array([[1.0, 1.0, 1.0], [1.0, -1.0, -1.0],
                      [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]])
    edge = float(np.linalg.norm(verts[1] - verts[0]))
    return build_tetra_curve(TetraSmoothingSpec(verts, radius_fraction * edge))


# smoothing this cycle leaves an antipodal-tangent margin of about 0.0397
_SKEW_PENTAGON = np.array([
    [0.2362125733347047, 0.1484234000177833, -0.7517603248524203],
    [-0.21605576508840607, -0.9243837970101338, -0.7770574271217394],
    [-0.9402118943166875, 0.33993821915295164, 0.8707692345381168],
    [0.6030837847536987, 0.915007521524748, -0.9585643000267279],
    [0.5869291059352861, -0.05561416696260113, 0.4166332937898225],
])


def skew_pentagon_curve(radius_fraction=0.3):
    """Smoothed skew pentagon whose cylinder is regular for all time.

    Unlike any 4-vertex cycle, a generic 5-vertex cycle has no antipodal
    corner-chord pairs, and this particular one has strictly positive
    antipodal margin: its zero-velocity cylinder never degenerates.
    """
    cyc = [_SKEW_PENTAGON[i % 5] for i in range(6)]
    shortest = min(float(np.linalg.norm(cyc[i + 1] - cyc[i])) for i in range(5))
    return smoothed_polygon_curve(_SKEW_PENTAGON, radius_fraction * shortest)


def torus_knot_curve(p=3, q=2, big_radius=2.0, small_radius=1.0, samples=8192):
    """(p, q) torus-knot-style closed curve, resampled to arclength."""
    phi = np.arange(samples) * (2.0 * np.pi / samples)
    raw = np.column_stack([
        (big_radius + small_radius * np.cos(q * phi)) * np.cos(p * phi),
        (big_radius + small_radius * np.cos(q * phi)) * np.sin(p * phi),
        small_radius * np.sin(q * phi),
    ])
    pf = PeriodicFunction.from_samples(raw, 2.0 * np.pi)
    speed = PeriodicFunction.from_samples(
        np.linalg.norm(pf.derivative().sample(samples), axis=-1), 2.0 * np.pi)
    total = float(speed.mean()) * 2.0 * np.pi
    targets = np.arange(samples) * (total / samples)
    phi_of_s = invert_cumulative(speed, targets)
    return SpaceCurve3(PeriodicFunction.from_samples(pf(phi_of_s), total))


class _TangentInterp:
    """Fast periodic cubic interpolant of the unit tangent field."""

    def __init__(self, curve, n=16384):
        L = curve.length
        grid = np.arange(n + 1) * (L / n)
        vals = np.concatenate([curve.tangent_fn.sample(n),
                               curve.tangent_fn.sample(n)[:1]], axis=0)
        self.L = L
        self.spline = CubicSpline(grid, vals, axis=0, bc_type="periodic")
        self.dspline = self.spline.derivative()

    def __call__(self, s):
        return self.spline(np.mod(s, self.L))

    def d(self, s):
        return self.dspline(np.mod(s, self.L))


def antipodal_margin(curve, grid=512, refine=True, n_starts=12):
    """min over (s1, s2) of |T(s1) + T(s2)|; positive iff no antipodal tangents.

    Coarse grid minimum over all tangent pairs, then local quasi-Newton
    refinement of the best cells; the refined value is re-evaluated with the
    exact spectral tangent.
    """
    L = curve.length
    s = np.arange(grid) * (L / grid)
    T = curve.tangent(s)
    G = 2.0 + 2.0 * (T @ T.T)
    flat = np.argsort(G, axis=None)[:n_starts]
    best = float(G.flat[flat[0]])
    if not refine:
        return float(np.sqrt(max(best, 0.0)))

    interp = _TangentInterp(curve)

    def fun(xv):
        t1, t2 = interp(xv[0]), interp(xv[1])
        v = t1 + t2
        g1 = 2.0 * v @ interp.d(xv[0])
        g2 = 2.0 * v @ interp.d(xv[1])
        return float(v @ v), np.array([g1, g2])

    best_val = best
    for k in flat:
        i, j = np.unravel_index(k, G.shape)
        res = minimize(fun, x0=np.array([s[i], s[j]]), jac=True, method="L-BFGS-B")
        v = curve.tangent(np.array([res.x[0] % L])) + curve.tangent(np.array([res.x[1] % L]))
        best_val = min(best_val, float(np.sum(v * v)))
    return float(np.sqrt(max(best_val, 0.0)))


def evolve3(curve, t, s):
    """Zero-velocity wave evolution: (alpha(s+t) + alpha(s-t)) / 2."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    return 0.5 * (curve.position(s + t) + curve.position(s - t))


def regularity_margin(curve, **kwargs):
    """inf over all (t, s) of |gamma_s| = half the antipodal margin."""
    return 0.5 * antipodal_margin(curve, **kwargs)


def min_slice_speed(curve, t_max, nt=512, ns=512, refine=True, n_starts=12):
    """Grid (plus local refinement) minimum of |gamma_s| over [0, t_max] x [0, L)."""
    L = curve.length
    interp = _TangentInterp(curve)
    tv = np.linspace(0.0, t_max, nt)
    sv = np.arange(ns) * (L / ns)
    TT, SS = np.meshgrid(tv, sv, indexing="ij")
    g = 0.5 * (interp(SS + TT) + interp(SS - TT))
    val = np.sum(g * g, axis=-1)
    order = np.argsort(val, axis=None)[:n_starts]
    best = float(val.flat[order[0]])
    if refine:
        def fun(xv):
            t1 = interp(xv[1] + xv[0])
            t2 = interp(xv[1] - xv[0])
            v = 0.5 * (t1 + t2)
            d1 = 0.5 * interp.d(xv[1] + xv[0])
            d2 = 0.5 * interp.d(xv[1] - xv[0])
            return float(v @ v), np.array([2.0 * v @ (d1 - d2), 2.0 * v @ (d1 + d2)])

        for k in order:
            i, j = np.unravel_index(k, val.shape)
            res = minimize(fun, x0=np.array([tv[i], sv[j]]), jac=True,
                           method="L-BFGS-B", bounds=[(0.0, t_max), (None, None)])
            tb, sb = res.x
            gs = 0.5 * (curve.tangent(np.array([sb + tb]))
                        + curve.tangent(np.array([sb - tb])))
            best = min(best, float(np.sum(gs * gs)))
    return float(np.sqrt(max(best, 0.0)))
