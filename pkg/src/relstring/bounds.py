"""Timelikeness index, curvature load, and guaranteed-existence certificates.

For an open arc with normal velocity field the timelikeness index

    j = length / integral of (1 - |beta*|^2)^(-1/2) |d alpha*|

lies in (0, 1] and measures the margin from null data.  When j exceeds 3/2
times the curvature load (the integral of |grad_U a| + |grad_U b| against
arclength, i.e. the total turning of the two null fields), the wave evolution
stays immersed on the full domain of dependence: the certificate carries the
time T = length/j, the triangular domain in gauge coordinates, and an explicit
floor on the slice tangent speed,

    floor = j/4 - (1/4) * integral (|grad_U a| + |grad_U b|)(|beta|/2 + 1) |d alpha|,

which the verifier checks against a direct evolution over the triangle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.chebyshev import Chebyshev
from scipy.integrate import quad

from .errors import NotTimelikeError, PreconditionError, StructuralError

QUAD_TOL = 1e-10


class OpenArc:
    """Non-periodic arc data: position, normal velocity, and null fields.

    Stores callables for alpha, beta, the unit null combinations a, b and
    their parameter derivatives.  Construct via `from_functions` (Chebyshev
    fits of arbitrary smooth maps) or `from_gauge_functions` (data already in
    orthogonal gauge, where a = alpha' + beta is exactly unit).
    """

    def __init__(self, domain, alpha, alpha_d, beta, a, a_d, b, b_d):
        self.domain = (float(domain[0]), float(domain[1]))
        if not self.domain[1] > self.domain[0]:
            raise StructuralError("empty arc domain")
        self.alpha = alpha
        self.alpha_d = alpha_d
        self.beta = beta
        self.a = a
        self.a_d = a_d
        self.b = b
        self.b_d = b_d
        self._check()

    def _check(self, n=2048, tol=1e-8):
        sig = np.linspace(*self.domain, n)
        ad = self.alpha_d(sig)
        bt = self.beta(sig)
        orth = float(np.max(np.abs(np.sum(ad * bt, axis=-1))))
        if orth > tol * max(1.0, float(np.max(np.linalg.norm(ad, axis=-1)))):
            raise StructuralError(f"velocity is not normal to the arc ({orth:.3e})")
        if float(np.max(np.linalg.norm(bt, axis=-1))) >= 1.0:
            raise NotTimelikeError("normal velocity reaches the light speed")
        unit_dev = max(float(np.max(np.abs(np.linalg.norm(self.a(sig), axis=-1) - 1.0))),
                       float(np.max(np.abs(np.linalg.norm(self.b(sig), axis=-1) - 1.0))))
        if unit_dev > 1e-7:
            raise StructuralError(f"null fields deviate from unit length ({unit_dev:.3e})")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def _fit_vec(fn, domain, deg):
        sig = np.linspace(*domain, 4 * deg)
        vals = np.asarray(fn(sig), dtype=float)
        fits = [Chebyshev.interpolate(lambda x, k=k: np.asarray(fn(x))[..., k],
                                      deg, domain=list(domain)) for k in range(vals.shape[-1])]

        def f(x, _fits=fits):
            return np.stack([c(np.asarray(x, float)) for c in _fits], axis=-1)

        dfits = [c.deriv() for c in fits]

        def fd(x, _fits=dfits):
            return np.stack([c(np.asarray(x, float)) for c in _fits], axis=-1)

        return f, fd

    @classmethod
    def from_functions(cls, alpha_fn, beta_fn, domain, deg=200):
        """Fit arbitrary smooth (alpha*, beta*) callables on [p, q]."""
        alpha, alpha_d = cls._fit_vec(alpha_fn, domain, deg)
        beta, _ = cls._fit_vec(beta_fn, domain, deg)

        def a_fn(x):
            ad = alpha_d(x)
            bt = beta(x)
            U = ad / np.linalg.norm(ad, axis=-1, keepdims=True)
            root = np.sqrt(1.0 - np.sum(bt * bt, axis=-1, keepdims=True))
            return root * U + bt

        def b_fn(x):
            ad = alpha_d(x)
            bt = beta(x)
            U = ad / np.linalg.norm(ad, axis=-1, keepdims=True)
            root = np.sqrt(1.0 - np.sum(bt * bt, axis=-1, keepdims=True))
            return root * U - bt

        a, a_d = cls._fit_vec(a_fn, domain, deg)
        b, b_d = cls._fit_vec(b_fn, domain, deg)
        return cls(domain, alpha, alpha_d, beta, a, a_d, b, b_d)

    @classmethod
    def from_gauge_functions(cls, alpha_fn, alpha_d_fn, alpha_dd_fn,
                             beta_fn, beta_d_fn, domain):
        """Arc already in orthogonal gauge: a = alpha' + beta is exactly unit,
        and the caller supplies analytic derivatives."""

        def a(x):
            return alpha_d_fn(x) + beta_fn(x)

        def b(x):
            return alpha_d_fn(x) - beta_fn(x)

        def a_d(x):
            return alpha_dd_fn(x) + beta_d_fn(x)

        def b_d(x):
            return alpha_dd_fn(x) - beta_d_fn(x)

        return cls(domain, alpha_fn, alpha_d_fn, beta_fn, a, a_d, b, b_d)

    @classmethod
    def from_initial_data(cls, data, s_range):
        """Restriction of closed orthogonal-gauge data to a parameter window."""
        if data.dim != 2:
            raise StructuralError("arcs are plane curves")
        ap = data.alpha_prime()
        app = data.alpha.derivative(2)
        bp = data.beta.derivative()

        def a(x):
            return ap(x) + data.beta(x)

        def b(x):
            return ap(x) - data.beta(x)

        def a_d(x):
            return app(x) + bp(x)

        def b_d(x):
            return app(x) - bp(x)

        return cls(s_range, data.alpha, ap, data.beta, a, a_d, b, b_d)


def _quad_vec(fn, lo, hi):
    val, _ = quad(fn, lo, hi, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=400)
    return val


def arc_length(arc):
    return _quad_vec(lambda x: float(np.linalg.norm(arc.alpha_d(np.atleast_1d(x))[0])),
                     *arc.domain)


def proper_weighted_length(arc):
    """Integral of (1 - |beta|^2)^(-1/2) |d alpha| (the gauge-parameter length)."""

    def f(x):
        xv = np.atleast_1d(x)
        sp = float(np.linalg.norm(arc.alpha_d(xv)[0]))
        b2 = float(np.sum(arc.beta(xv)[0] ** 2))
        return sp / np.sqrt(1.0 - b2)

    return _quad_vec(f, *arc.domain)


def timelikeness_index(arc):
    """j = length / proper-weighted length, in (0, 1]."""
    return arc_length(arc) / proper_weighted_length(arc)


def curvature_load(arc):
    """Total turning of the null fields: integral of |a'| + |b'| d sigma.

    Parametrization independent: |grad_U a| |d alpha| = |a'(sigma)| d sigma.
    """

    def f(x):
        xv = np.atleast_1d(x)
        return float(np.linalg.norm(arc.a_d(xv)[0]) + np.linalg.norm(arc.b_d(xv)[0]))

    return _quad_vec(f, *arc.domain)


@dataclass(frozen=True)
class Certificate:
    """Guaranteed-existence certificate for an arc: no singularity on Omega."""

    j: float
    load: float
    T: float                  # length / j
    floor: float              # lower bound on |gamma_s| over Omega
    gauge_length: float       # parameter length in orthogonal gauge
    domain: tuple             # arc parameter window (p, q)

    def as_dict(self):
        return {"j": self.j, "load": self.load, "T": self.T,
                "floor": self.floor, "issued": True,
                "gauge_length": self.gauge_length,
                "domain": list(self.domain)}


def existence_guarantee(arc):
    """Certificate if j > (3/2) * load, else None.

    The floor is j/4 - (1/4) integral (|a'| + |b'|)(|beta|/2 + 1) d sigma,
    positive exactly under the hypothesis since |beta| < 1.
    """
    j = timelikeness_index(arc)
    load = curvature_load(arc)
    if not j > 1.5 * load:
        return None

    def f(x):
        xv = np.atleast_1d(x)
        turn = float(np.linalg.norm(arc.a_d(xv)[0]) + np.linalg.norm(arc.b_d(xv)[0]))
        return turn * (0.5 * float(np.linalg.norm(arc.beta(xv)[0])) + 1.0)

    floor = 0.25 * j - 0.25 * _quad_vec(f, *arc.domain)
    L = arc_length(arc)
    return Certificate(j, load, L / j, floor, proper_weighted_length(arc), arc.domain)


@dataclass(frozen=True)
class VerificationReport:
    min_speed: float
    floor: float
    grid: int
    passed: bool


def verify_guarantee(arc, certificate, grid=512, slack=1e-6):
    """Direct evolution over the triangular domain: min |gamma_s| vs floor.

    In gauge coordinates 2*gamma_s(t, s) = a(z1) + b(z2) with z1 = s + t,
    z2 = s - t, so the minimum over the triangle is a minimum over ordered
    parameter pairs.  A violation would contradict a guaranteed bound and is
    reported as failed.
    """
    if certificate is None:
        raise PreconditionError("no certificate to verify")
    p, q = arc.domain
    # gauge parameter z(sigma): cumulative proper-weighted measure
    m = 4096
    sig = np.linspace(p, q, m)
    sp = np.linalg.norm(arc.alpha_d(sig), axis=-1)
    b2 = np.sum(arc.beta(sig) ** 2, axis=-1)
    dens = sp / np.sqrt(1.0 - b2)
    z = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(sig))])
    z_targets = np.linspace(0.0, z[-1], grid)
    sig_of_z = np.interp(z_targets, z, sig)
    A = arc.a(sig_of_z)
    B = arc.b(sig_of_z)
    G = A @ B.T  # <a(z1), b(z2)>
    iu = np.triu_indices(grid)  # z1 >= z2 pairs: (i, j) with z1 index >= z2 index
    pair_min = float(np.min(G.T[iu]))
    min_speed = 0.5 * np.sqrt(max(2.0 + 2.0 * pair_min, 0.0))
    return VerificationReport(min_speed, certificate.floor, grid,
                              bool(min_speed >= certificate.floor - slack))


def zero_velocity_curvature_gate(arc, n=4096):
    """Convenience predicate for resting arcs (beta == 0).

    Reports the total absolute curvature and the common smaller-than-one-half
    gate.  The authoritative hypothesis is j > (3/2)*load with load = 2*TC
    when beta == 0 (both null fields coincide with the tangent), i.e. TC < 1/3;
    the 1/2 gate is the looser advertised form.
    """
    sig = np.linspace(*arc.domain, n)
    if float(np.max(np.linalg.norm(arc.beta(sig), axis=-1))) > 1e-12:
        raise PreconditionError("gate applies to resting arcs only")
    tc = 0.5 * curvature_load(arc)
    return {"total_curvature": tc,
            "below_half": bool(tc < 0.5),
            "hypothesis_holds": bool(timelikeness_index(arc) > 1.5 * curvature_load(arc))}


def slice_load_ratio(data, t, sub_length, n=16384, n_starts=256):
    """Sup over sub-arcs of given length of load / j on the time-t slice.

    The slice of orthogonal-gauge data is already gauge parametrized, and its
    proper-weighted sub-arc length equals the parameter width (conservation
    law), so j_sub = arclength / width.  As the first singularity approaches,
    the sup exceeds 2/3.
    """
    from .curves import to_null_pair
    pair = to_null_pair(data) if hasattr(data, "alpha") else data
    L = pair.period
    z = np.arange(n + 1) * (L / n)
    speeds = np.linalg.norm(pair.gamma_s(t, z), axis=-1)
    turn = np.abs(pair.zeta(z + t)) + np.abs(pair.eta(z - t))
    arclen = np.concatenate([[0.0], np.cumsum(0.5 * (speeds[1:] + speeds[:-1]) * np.diff(z))])
    load_cum = np.concatenate([[0.0], np.cumsum(0.5 * (turn[1:] + turn[:-1]) * np.diff(z))])
    if sub_length >= arclen[-1]:
        raise PreconditionError("sub-arc length exceeds the slice length")

    best = 0.0
    starts = np.linspace(0.0, L, n_starts, endpoint=False)
    for z0 in starts:
        a0 = np.interp(z0, z, arclen)
        target = a0 + sub_length
        if target > arclen[-1]:
            continue
        z1 = np.interp(target, arclen, z)
        width = z1 - z0
        load = np.interp(z1, z, load_cum) - np.interp(z0, z, load_cum)
        j_sub = sub_length / width
        best = max(best, load / j_sub)
    return best
