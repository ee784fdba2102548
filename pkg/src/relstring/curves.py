"""Orthogonal-gauge string data and its null-angle encoding.

Initial data is a pair (alpha, beta) on one period L with

    <beta, alpha'> = 0,    |alpha'|^2 + |beta|^2 = 1,

so the worldsheet is recovered by the d'Alembert formula.  In the plane the
combinations a = alpha' + beta and b = alpha' - beta are unit vector fields;
their continuous angle lifts

    a = (cos psi, sin psi),      b = -(cos psitilde, sin psitilde)

carry all singularity structure: the slice tangent degenerates exactly where
a(s + t) + b(s - t) = 0, i.e. where psi(s+t) - psitilde(s-t) is a multiple of
2*pi.  The angular speeds zeta = psi', eta = psitilde' drive classification.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (ClosureError, GaugeViolationError, GeneratorError,
                     InternalConsistencyError, RegularityError, StructuralError)
from .periodic import (TWO_PI, LinearPlusPeriodic, PeriodicFunction, lift_angle,
                       wrap_angle)

STRUCT_TOL = 1e-9
REGULARITY_FLOOR = 1e-6


@dataclass(frozen=True)
class InitialData:
    """Closed-string initial data (alpha, beta) in orthogonal gauge."""

    alpha: PeriodicFunction
    beta: PeriodicFunction
    singular_preset: bool = False

    def __post_init__(self):
        if abs(self.alpha.period - self.beta.period) > 1e-12 * self.alpha.period:
            raise StructuralError("alpha and beta must share the period")
        if self.alpha.dim != self.beta.dim or self.alpha.dim not in (2, 3):
            raise StructuralError("alpha and beta must both be 2D or 3D valued")

    @property
    def period(self):
        return self.alpha.period

    @property
    def dim(self):
        return self.alpha.dim

    def alpha_prime(self, order=1):
        return self.alpha.derivative(order)


@dataclass(frozen=True)
class ValidationReport:
    """Max residuals of the gauge constraints plus the regularity floor."""

    orthogonality: float
    normalization: float
    closure: float
    min_tangent_speed: float
    singular_preset: bool
    tol: float = STRUCT_TOL

    @property
    def passed(self):
        structural = max(self.orthogonality, self.normalization, self.closure) <= self.tol
        regular = self.min_tangent_speed > REGULARITY_FLOOR or self.singular_preset
        return structural and regular

    def as_dict(self):
        return {
            "orthogonality": self.orthogonality,
            "normalization": self.normalization,
            "closure": self.closure,
            "min_tangent_speed": self.min_tangent_speed,
            "singular_preset": self.singular_preset,
            "tol": self.tol,
            "passed": self.passed,
        }


@dataclass
class NullPair:
    """Angle lifts (psi, psitilde) of the null tangent fields a, -b."""

    psi: LinearPlusPeriodic
    psitilde: LinearPlusPeriodic
    period: float
    winding_a: int
    winding_b: int
    singular_preset: bool = False
    _zeta: PeriodicFunction = field(default=None, repr=False)
    _eta: PeriodicFunction = field(default=None, repr=False)

    def __post_init__(self):
        if self._zeta is None:
            self._zeta = self.psi.derivative()
        if self._eta is None:
            self._eta = self.psitilde.derivative()

    @property
    def zeta(self):
        return self._zeta

    @property
    def eta(self):
        return self._eta

    def a(self, u):
        ang = self.psi(np.asarray(u, dtype=float))
        return np.stack([np.cos(ang), np.sin(ang)], axis=-1)

    def b(self, v):
        ang = self.psitilde(np.asarray(v, dtype=float))
        return -np.stack([np.cos(ang), np.sin(ang)], axis=-1)

    def a_perp(self, u):
        ang = self.psi(np.asarray(u, dtype=float))
        return np.stack([-np.sin(ang), np.cos(ang)], axis=-1)

    def b_perp(self, v):
        ang = self.psitilde(np.asarray(v, dtype=float))
        return -np.stack([-np.sin(ang), np.cos(ang)], axis=-1)

    def gamma_s(self, t, s):
        """Slice tangent gamma_s(t, s) = (a(s+t) + b(s-t)) / 2."""
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        return 0.5 * (self.a(s + t) + self.b(s - t))

    def gamma_t(self, t, s):
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        return 0.5 * (self.a(s + t) - self.b(s - t))


def validate_initial_data(data, n=4096, tol=STRUCT_TOL):
    """Residuals of orthogonality, normalization, closure, and min |alpha'|."""
    ap = data.alpha_prime().sample(n)
    bt = data.beta.sample(n)
    orth = float(np.max(np.abs(np.sum(ap * bt, axis=-1))))
    norm = float(np.max(np.abs(np.sum(ap * ap, axis=-1)
                               + np.sum(bt * bt, axis=-1) - 1.0)))
    closure = float(np.linalg.norm(data.alpha_prime().mean()) * data.period)
    min_speed = float(np.min(np.linalg.norm(ap, axis=-1)))
    return ValidationReport(orth, norm, closure, min_speed,
                            data.singular_preset, tol)


def to_null_pair(data, n=16384, tol=STRUCT_TOL):
    """Angle-lift encoding of 2D initial data.

    Raises GaugeViolationError if |a| or |b| strays from 1, and
    InternalConsistencyError if regular data produces unequal windings
    (orthogonality of alpha' and beta forces them equal).
    """
    if data.dim != 2:
        raise StructuralError("null-pair encoding is specific to plane curves")
    ap = data.alpha_prime().sample(n)
    bt = data.beta.sample(n)
    a = ap + bt
    b = ap - bt
    a_dev = float(np.max(np.abs(np.linalg.norm(a, axis=1) - 1.0)))
    b_dev = float(np.max(np.abs(np.linalg.norm(b, axis=1) - 1.0)))
    if max(a_dev, b_dev) > tol:
        raise GaugeViolationError(
            f"null fields deviate from unit length by {max(a_dev, b_dev):.3e}")

    psi, d_a = lift_angle(a, data.period)
    psitilde, d_b = lift_angle(-b, data.period)
    # pin psi(0) to the principal branch and psitilde below it by (0, 2*pi]
    psi = psi.shifted_offset(TWO_PI * np.round((wrap_angle(psi(0.0)) - psi(0.0)) / TWO_PI))
    gap = float(psi(0.0) - psitilde(0.0))
    psitilde = psitilde.shifted_offset(TWO_PI * np.floor(gap / TWO_PI))

    regular = not data.singular_preset
    if regular and d_a != d_b:
        raise InternalConsistencyError(
            f"regular data produced unequal windings d_a={d_a}, d_b={d_b}")
    return NullPair(psi, psitilde, data.period, d_a, d_b,
                    singular_preset=data.singular_preset)


def from_null_pair(pair, basepoint=(0.0, 0.0), n=4096, tol=1e-8):
    """Reconstruct (alpha, beta) from lifts; basepoint fixes alpha(0)."""
    s = np.arange(n) * (pair.period / n)
    a = pair.a(s)
    b = pair.b(s)
    ap = 0.5 * (a + b)
    bt = 0.5 * (a - b)
    closure = np.linalg.norm(ap.mean(axis=0)) * pair.period
    if closure > tol:
        raise ClosureError(f"tangent field integrates to |defect| = {closure:.3e}")
    min_speed = float(np.min(np.linalg.norm(ap, axis=1)))
    if min_speed <= REGULARITY_FLOOR and not pair.singular_preset:
        raise RegularityError(f"degenerate tangent, min |alpha'| = {min_speed:.3e}")

    ap_f = PeriodicFunction.from_samples(ap, pair.period)
    ap_f.cos_coeffs[0] = 0.0  # drop the (sub-tolerance) mean before integrating
    anti = ap_f.antiderivative()
    alpha_samples = anti.periodic(s) - anti.periodic(0.0) + np.asarray(basepoint, float)
    alpha = PeriodicFunction.from_samples(alpha_samples, pair.period)
    beta = PeriodicFunction.from_samples(bt, pair.period)
    return InitialData(alpha, beta, singular_preset=pair.singular_preset)


def rotation_index(data, n=16384):
    """Winding number of the unit tangent alpha'/|alpha'| over one period."""
    if data.singular_preset:
        raise RegularityError("rotation index is undefined through cusps")
    ap = data.alpha_prime().sample(n)
    if float(np.min(np.linalg.norm(ap, axis=1))) <= REGULARITY_FLOOR:
        raise RegularityError("tangent vanishes; rotation index undefined")
    _, winding = lift_angle(ap / np.linalg.norm(ap, axis=1, keepdims=True), data.period)
    return winding


def random_initial_data(seed, modes=3, amplitude=0.5, period=TWO_PI,
                        winding=1, max_tries=50):
    """Deterministic-in-seed regular initial data.

    Draws random turning-angle lifts with equal windings, enforces the closure
    integral by a damped Newton adjustment of one lift's constant and first
    cosine harmonic, and rejects draws whose tangent degenerates.
    """
    if modes < 1:
        raise StructuralError("need at least one mode")
    rng = np.random.default_rng(seed)
    L = float(period)
    n = 1024
    s = np.arange(n) * (L / n)
    w = TWO_PI / L
    first_cos = np.cos(w * s)

    for _ in range(max_tries):
        def draw():
            k = np.arange(1, modes + 1)
            coeff = amplitude * rng.standard_normal((2, modes)) / k
            return coeff[0] @ np.cos(np.outer(k * w, s)) + coeff[1] @ np.sin(np.outer(k * w, s))

        psi_base = TWO_PI * winding * s / L + draw()
        psit_vals = TWO_PI * winding * s / L - np.pi + draw()

        # keep psi - psitilde safely inside one 2*pi branch
        gap = psi_base - psit_vals
        if gap.min() < 0.15 * np.pi or gap.max() > 1.85 * np.pi:
            continue

        b_mean = -np.array([np.cos(psit_vals).mean(), np.sin(psit_vals).mean()])

        def defect(xv):
            ang = psi_base + xv[0] + xv[1] * first_cos
            return np.array([np.cos(ang).mean(), np.sin(ang).mean()]) + b_mean

        # damped Newton on (constant, first cosine harmonic) of psi
        x = np.zeros(2)
        ok = False
        d_cur = defect(x)
        for _ in range(60):
            if np.linalg.norm(d_cur) < 1e-13:
                ok = True
                break
            eps = 1e-7
            J = np.column_stack([(defect(x + [eps, 0.0]) - d_cur) / eps,
                                 (defect(x + [0.0, eps]) - d_cur) / eps])
            try:
                step = np.linalg.solve(J, -d_cur)
            except np.linalg.LinAlgError:
                break
            lam = 1.0
            for _ in range(30):
                d_trial = defect(x + lam * step)
                if np.linalg.norm(d_trial) < np.linalg.norm(d_cur):
                    x, d_cur = x + lam * step, d_trial
                    break
                lam *= 0.5
            else:
                break
        if not ok:
            continue

        psi_vals = psi_base + x[0] + x[1] * first_cos
        gap = psi_vals - psit_vals
        if gap.min() < 0.1 * np.pi or gap.max() > 1.9 * np.pi:
            continue
        psi = LinearPlusPeriodic(
            TWO_PI * winding / L, 0.0,
            PeriodicFunction.from_samples(psi_vals - TWO_PI * winding * s / L, L))
        psitilde = LinearPlusPeriodic(
            TWO_PI * winding / L, 0.0,
            PeriodicFunction.from_samples(psit_vals - TWO_PI * winding * s / L, L))
        pair = NullPair(psi, psitilde, L, winding, winding)
        try:
            data = from_null_pair(pair)
        except (ClosureError, RegularityError):
            continue
        if validate_initial_data(data).passed:
            return data
    raise GeneratorError(f"no valid data after {max_tries} draws (seed={seed})")
