"""Built-in initial data: exact solution families and stress cases.

Each preset is constructed from closed-form (alpha, beta) satisfying the
orthogonal-gauge constraints exactly; spectral fitting only introduces
round-off.  Presets whose initial tangent vanishes somewhere carry the
``singular_preset`` marker: the evolution and classification machinery accepts
them, while operations needing an immersed curve (rotation index, the
first-singularity search) refuse them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import jn_zeros

from .curves import InitialData, NullPair
from .periodic import TWO_PI, LinearPlusPeriodic, PeriodicFunction


def circle_data():
    """Unit circle at rest; collapses to a point at t = pi/2."""
    s = np.arange(64) * (TWO_PI / 64)
    alpha = PeriodicFunction.from_samples(np.column_stack([np.cos(s), np.sin(s)]), TWO_PI)
    beta = PeriodicFunction.constant([0.0, 0.0], TWO_PI)
    return InitialData(alpha, beta)


def rotation_data(lam1=3, lam2=1):
    """Exact rotating solution with permanent cusps (integer frequencies).

    Initial slice of gamma(t,s) = ((1/l1 + 1/l2 - cos(l1(s-t))/l1
    - cos(l2(s+t))/l2)/2, (-sin(l1(s-t))/l1 + sin(l2(s+t))/l2)/2).
    The tangent speed is |sin(((l1+l2)/2) s)|-like and vanishes on a cusp
    lattice, so the preset is marked singular.
    """
    l1, l2 = int(lam1), int(lam2)
    if l1 < 1 or l2 < 1:
        raise ValueError("frequencies must be positive integers")
    n = 16 * max(l1, l2) + 16
    s = np.arange(n) * (TWO_PI / n)
    alpha = np.column_stack([
        0.5 * (1.0 / l1 + 1.0 / l2 - np.cos(l1 * s) / l1 - np.cos(l2 * s) / l2),
        0.5 * (-np.sin(l1 * s) / l1 + np.sin(l2 * s) / l2),
    ])
    beta = np.column_stack([
        0.5 * (-np.sin(l1 * s) + np.sin(l2 * s)),
        0.5 * (np.cos(l1 * s) + np.cos(l2 * s)),
    ])
    return InitialData(PeriodicFunction.from_samples(alpha, TWO_PI),
                       PeriodicFunction.from_samples(beta, TWO_PI),
                       singular_preset=True)


def rotation_closed_form(lam1=3, lam2=1):
    """The exact worldsheet map (t, s) -> R^2 behind rotation_data."""
    l1, l2 = float(lam1), float(lam2)

    def gamma(t, s):
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        x = 0.5 * (1.0 / l1 + 1.0 / l2
                   - np.cos(l1 * (s - t)) / l1 - np.cos(l2 * (s + t)) / l2)
        y = 0.5 * (-np.sin(l1 * (s - t)) / l1 + np.sin(l2 * (s + t)) / l2)
        return np.stack([x, y], axis=-1)

    return gamma


def swallowtail_data():
    """Formation example: a 4/3-cusp at (t, s) = (0, 0) splitting into two cusps.

    alpha = (sin^3(s)/3, 2/3 - cos s + cos^3(s)/3) is the antiderivative of
    (sin^2 s cos s, sin^3 s), which the unit-speed constraint forces given
    |beta|^2 = 1 - sin^4 s.  beta = cos s * sqrt(1 + sin^2 s) * (-sin s, cos s)
    is the smooth square root of that norm (the naive nonnegative root has a
    kink at s = pi/2, 3pi/2 and would put a second, past-directed formation
    point into the future instead).
    """
    n = 512
    s = np.arange(n) * (TWO_PI / n)
    alpha = np.column_stack([np.sin(s) ** 3 / 3.0,
                             2.0 / 3.0 - np.cos(s) + np.cos(s) ** 3 / 3.0])
    amp = np.cos(s) * np.sqrt(1.0 + np.sin(s) ** 2)
    beta = np.column_stack([-amp * np.sin(s), amp * np.cos(s)])
    return InitialData(PeriodicFunction.from_samples(alpha, TWO_PI),
                       PeriodicFunction.from_samples(beta, TWO_PI),
                       singular_preset=True)


def swallowtail_as_printed_data():
    """Commonly quoted (uncorrected) variant of the swallowtail example.

    Its second alpha component is 2/3 - (2/3)cos s + sin^2(s) cos(s)/3, whose
    derivative is sin s (1/3 + cos^2 s) rather than the sin^3 s that the
    constraint |alpha'|^2 + |beta|^2 = 1 demands; validation fails.  Kept for
    comparison only.
    """
    n = 512
    s = np.arange(n) * (TWO_PI / n)
    alpha = np.column_stack([np.sin(s) ** 3 / 3.0,
                             2.0 / 3.0 - 2.0 * np.cos(s) / 3.0
                             + np.sin(s) ** 2 * np.cos(s) / 3.0])
    amp = np.sqrt(1.0 - np.sin(s) ** 4)
    beta = np.column_stack([-amp * np.sin(s), amp * np.cos(s)])
    return InitialData(PeriodicFunction.from_samples(alpha, TWO_PI),
                       PeriodicFunction.from_samples(beta, TWO_PI),
                       singular_preset=True)


def zero_index_data():
    """Regular closed curve of rotation index zero, at rest.

    Tangent angle theta(s) = A sin s with A the first zero of the Bessel
    function J0, so that the closure integral of (cos theta, sin theta)
    vanishes exactly (its mean is J0(A) by the Jacobi-Anger expansion).
    """
    A = float(jn_zeros(0, 1)[0])
    n = 1024
    s = np.arange(n) * (TWO_PI / n)
    theta = A * np.sin(s)
    ap = PeriodicFunction.from_samples(
        np.column_stack([np.cos(theta), np.sin(theta)]), TWO_PI)
    ap.cos_coeffs[0] = 0.0  # closure: mean is J0(A) = 0 up to round-off
    anti = ap.antiderivative()
    alpha = PeriodicFunction.from_samples(anti.periodic(s) - anti.periodic(0.0), TWO_PI)
    beta = PeriodicFunction.constant([0.0, 0.0], TWO_PI)
    return InitialData(alpha, beta)


def translation_pair(p=1.0):
    """Null-pair form of the translating-cusp approximant (open data).

    a winds once over the period pi/p while b = -(1, 0) is constant, giving
    equal local-model coefficients (both p), i.e. straight-line cusp motion.
    Not a closed curve, so only the angle-lift machinery applies.
    """
    p = float(p)
    L = np.pi / p
    psi = LinearPlusPeriodic(2.0 * p, 0.0, PeriodicFunction.constant(0.0, L))
    psitilde = LinearPlusPeriodic(0.0, 0.0, PeriodicFunction.constant(0.0, L))
    return NullPair(psi, psitilde, L, 1, 0, singular_preset=True)


@dataclass(frozen=True)
class PresetInfo:
    name: str
    kind: str  # "initial_data" or "curve3"
    singular: bool
    valid: bool
    note: str


_REGISTRY = [
    PresetInfo("circle", "initial_data", False, True,
               "unit circle at rest; shrinks to a point at t = pi/2"),
    PresetInfo("rotation-l3-1", "initial_data", True, True,
               "exact rotating solution, frequencies (3, 1); cusps on every slice"),
    PresetInfo("swallowtail", "initial_data", True, True,
               "corrected formation example: 4/3-cusp at the origin splitting into two cusps"),
    PresetInfo("swallowtail-as-printed", "initial_data", True, False,
               "uncorrected variant; violates the unit-speed constraint (for comparison)"),
    PresetInfo("zero-index", "initial_data", False, True,
               "figure-eight-style curve of rotation index zero, at rest"),
    PresetInfo("tetra", "curve3", False, True,
               "smoothed regular tetrahedron in R^3 (carries two antipodal "
               "tangent pairs: every smoothed 4-cycle does)"),
    PresetInfo("skew-pentagon", "curve3", False, True,
               "smoothed skew pentagon with positive antipodal margin; its "
               "zero-velocity cylinder stays regular for all time"),
    PresetInfo("torus-knot", "curve3", False, True,
               "(3,2) torus-knot-style space curve, arclength parametrized"),
]

_ALIASES = {"rotation-λ3-1": "rotation-l3-1", "rotation-l3-1": "rotation-l3-1"}


def presets():
    """Metadata for all built-in presets."""
    return list(_REGISTRY)


def get_preset(name):
    """Construct the named preset (InitialData or SpaceCurve3)."""
    key = _ALIASES.get(name, name)
    if key == "circle":
        return circle_data()
    if key == "rotation-l3-1":
        return rotation_data(3, 1)
    if key == "swallowtail":
        return swallowtail_data()
    if key == "swallowtail-as-printed":
        return swallowtail_as_printed_data()
    if key == "zero-index":
        return zero_index_data()
    if key == "tetra":
        from .r3 import regular_tetra_curve
        return regular_tetra_curve()
    if key == "skew-pentagon":
        from .r3 import skew_pentagon_curve
        return skew_pentagon_curve()
    if key == "torus-knot":
        from .r3 import torus_knot_curve
        return torus_knot_curve()
    raise KeyError(f"unknown preset {name!r}")
