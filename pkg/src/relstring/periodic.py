"""Truncated trigonometric series on a periodic interval.

Every smooth periodic object in this package (curve positions, velocity
fields, turning-angle fluctuations, background coefficients) is stored as a
real trigonometric polynomial

    f(s) = a_0 + sum_{k=1}^{K} a_k cos(k w s) + b_k sin(k w s),   w = 2 pi / L,

so differentiation, antidifferentiation, and translation are exact coefficient
operations.  Values may be scalar or vector; coefficients are (K+1, dim)
arrays.  Angle lifts and antiderivatives, which grow linearly, are handled by
:class:`LinearPlusPeriodic`.
"""

from __future__ import annotations

import numpy as np

from .errors import StructuralError

TWO_PI = 2.0 * np.pi


class PeriodicFunction:
    """A smooth L-periodic function represented by its truncated Fourier series."""

    __slots__ = ("period", "cos_coeffs", "sin_coeffs")

    def __init__(self, period, cos_coeffs, sin_coeffs):
        if period <= 0:
            raise StructuralError("period must be positive")
        a = np.atleast_2d(np.asarray(cos_coeffs, dtype=float))
        b = np.atleast_2d(np.asarray(sin_coeffs, dtype=float))
        if a.ndim != 2 or b.shape != a.shape:
            raise StructuralError("cos/sin coefficient arrays must share shape (K+1, dim)")
        b = b.copy()
        b[0] = 0.0  # k = 0 has no sine component
        self.period = float(period)
        self.cos_coeffs = a
        self.sin_coeffs = b

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_samples(cls, values, period, trim=1e-14):
        """Fit the series to uniform samples f(j*L/n), j = 0..n-1.

        The Nyquist mode of even n is dropped; sample densely enough that the
        tail is negligible.  Trailing modes below `trim` (relative to the
        largest coefficient) are discarded.
        """
        v = np.asarray(values, dtype=float)
        squeeze = v.ndim == 1
        if squeeze:
            v = v[:, None]
        n = v.shape[0]
        c = np.fft.rfft(v, axis=0) / n
        kmax = (n - 1) // 2
        a = np.empty((kmax + 1, v.shape[1]))
        b = np.zeros_like(a)
        a[0] = c[0].real
        a[1:] = 2.0 * c[1:kmax + 1].real
        b[1:] = -2.0 * c[1:kmax + 1].imag
        if trim is not None and kmax > 0:
            mag = np.abs(a) + np.abs(b)
            scale = max(mag.max(), 1e-300)
            keep = np.nonzero(mag.max(axis=1) > trim * scale)[0]
            kmax = int(keep.max()) if keep.size else 0
            a, b = a[:kmax + 1], b[:kmax + 1]
        return cls(period, a, b)

    @classmethod
    def from_callable(cls, fn, period, n=4096, trim=1e-14):
        s = np.arange(n) * (period / n)
        return cls.from_samples(np.asarray(fn(s), dtype=float), period, trim=trim)

    @classmethod
    def constant(cls, value, period):
        v = np.atleast_1d(np.asarray(value, dtype=float))
        return cls(period, v[None, :], np.zeros((1, v.size)))

    # -- basic queries -----------------------------------------------------

    @property
    def dim(self):
        return self.cos_coeffs.shape[1]

    @property
    def n_modes(self):
        return self.cos_coeffs.shape[0] - 1

    def mean(self):
        m = self.cos_coeffs[0].copy()
        return m[0] if self.dim == 1 else m

    # -- evaluation --------------------------------------------------------

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        w = TWO_PI / self.period
        k = np.arange(self.cos_coeffs.shape[0])
        ang = np.multiply.outer(s, k * w)
        vals = np.cos(ang) @ self.cos_coeffs + np.sin(ang) @ self.sin_coeffs
        if self.dim == 1:
            return vals[..., 0]
        return vals

    def sample(self, n):
        """Values at n uniform points j*L/n via inverse FFT (exact if n > 2K)."""
        K = self.n_modes
        if n < 2 * K + 2:
            return self(np.arange(n) * (self.period / n))
        spec = np.zeros((n // 2 + 1, self.dim), dtype=complex)
        spec[0] = self.cos_coeffs[0]
        spec[1:K + 1] = 0.5 * (self.cos_coeffs[1:] - 1j * self.sin_coeffs[1:])
        vals = np.fft.irfft(spec * n, n=n, axis=0)
        return vals[:, 0] if self.dim == 1 else vals

    # -- calculus ----------------------------------------------------------

    def derivative(self, order=1):
        a, b = self.cos_coeffs, self.sin_coeffs
        w = TWO_PI / self.period
        k = np.arange(a.shape[0])[:, None]
        for _ in range(order):
            a, b = (k * w) * b, -(k * w) * a
        return PeriodicFunction(self.period, a, b)

    def antiderivative(self):
        """Antiderivative as mean*s plus a periodic part (zero at the mean level)."""
        a, b = self.cos_coeffs, self.sin_coeffs
        w = TWO_PI / self.period
        k = np.arange(a.shape[0])[:, None].astype(float)
        k[0] = 1.0  # avoid divide-by-zero; row 0 is overwritten below
        A = -b / (k * w)
        B = a / (k * w)
        A[0] = 0.0
        B[0] = 0.0
        periodic = PeriodicFunction(self.period, A, B)
        return LinearPlusPeriodic(self.cos_coeffs[0].copy(), 0.0, periodic)

    def shift(self, delta):
        """The translate s -> f(s + delta), exact in coefficients."""
        w = TWO_PI / self.period
        k = np.arange(self.cos_coeffs.shape[0])[:, None]
        c, s = np.cos(k * w * delta), np.sin(k * w * delta)
        a_new = self.cos_coeffs * c + self.sin_coeffs * s
        b_new = self.sin_coeffs * c - self.cos_coeffs * s
        return PeriodicFunction(self.period, a_new, b_new)

    # -- arithmetic --------------------------------------------------------

    def _aligned(self, other):
        if abs(other.period - self.period) > 1e-12 * self.period:
            raise StructuralError("periods differ")
        if other.dim != self.dim:
            raise StructuralError("value dimensions differ")
        K = max(self.n_modes, other.n_modes)

        def pad(f):
            a = np.zeros((K + 1, self.dim))
            b = np.zeros((K + 1, self.dim))
            a[:f.n_modes + 1] = f.cos_coeffs
            b[:f.n_modes + 1] = f.sin_coeffs
            return a, b

        return pad(self), pad(other)

    def __add__(self, other):
        (a1, b1), (a2, b2) = self._aligned(other)
        return PeriodicFunction(self.period, a1 + a2, b1 + b2)

    def __sub__(self, other):
        (a1, b1), (a2, b2) = self._aligned(other)
        return PeriodicFunction(self.period, a1 - a2, b1 - b2)

    def __mul__(self, scalar):
        return PeriodicFunction(self.period, self.cos_coeffs * scalar,
                                self.sin_coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)


class LinearPlusPeriodic:
    """offset + slope*s + periodic(s): antiderivatives and angle lifts.

    `slope` and `offset` are scalars for scalar-valued functions, otherwise
    (dim,) arrays broadcast over the evaluation points.
    """

    __slots__ = ("slope", "offset", "periodic")

    def __init__(self, slope, offset, periodic):
        self.slope = np.asarray(slope, dtype=float)
        self.offset = np.asarray(offset, dtype=float)
        self.periodic = periodic

    @property
    def period(self):
        return self.periodic.period

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        base = self.periodic(s)
        if self.periodic.dim == 1:
            return self.offset + self.slope * s + base
        return self.offset + np.multiply.outer(s, self.slope) + base

    def derivative(self):
        d = self.periodic.derivative()
        a = d.cos_coeffs.copy()
        a[0] += np.atleast_1d(self.slope)
        return PeriodicFunction(d.period, a, d.sin_coeffs)

    def shifted_offset(self, delta):
        """Same function with `delta` added to the constant term."""
        return LinearPlusPeriodic(self.slope, self.offset + delta, self.periodic)

    def translate(self, delta):
        """The function s -> self(s + delta)."""
        return LinearPlusPeriodic(self.slope, self.offset + self.slope * delta,
                                  self.periodic.shift(delta))


def wrap_angle(x):
    """Reduce to the principal branch (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(x, dtype=float), TWO_PI)


def invert_cumulative(rho, targets, tol=1e-13, max_iter=60):
    """Solve F(sigma) = target for the antiderivative F of a positive periodic rho.

    Used for measure-based reparametrizations (arclength, gauge measure).
    Newton from the linear-mean initial guess; rho must be bounded away from 0.
    """
    targets = np.asarray(targets, dtype=float)
    F = rho.antiderivative()
    F0 = F(0.0)
    mean = float(rho.mean())
    sigma = targets / mean
    for _ in range(max_iter):
        res = (F(sigma) - F0) - targets
        if np.max(np.abs(res)) < tol * max(1.0, np.max(np.abs(targets))):
            break
        sigma = sigma - res / rho(sigma)
    return sigma


def lift_angle(xy, period, trim=1e-13):
    """Continuous angle lift of a closed unit-vector field from uniform samples.

    Returns (lift, winding) where lift is a LinearPlusPeriodic whose slope is
    2*pi*winding/period.  The samples must be dense enough that consecutive
    angles differ by less than pi.
    """
    xy = np.asarray(xy, dtype=float)
    n = xy.shape[0]
    theta = np.unwrap(np.arctan2(xy[:, 1], xy[:, 0]))
    closing = wrap_angle(np.arctan2(xy[0, 1], xy[0, 0]) - theta[-1])
    total = theta[-1] + closing - theta[0]
    winding = int(np.round(total / TWO_PI))
    if abs(total - TWO_PI * winding) > 1e-6:
        raise StructuralError("angle lift does not close to an integer winding")
    s = np.arange(n) * (period / n)
    periodic_part = theta - TWO_PI * winding * s / period
    pf = PeriodicFunction.from_samples(periodic_part, period, trim=trim)
    return LinearPlusPeriodic(TWO_PI * winding / period, 0.0, pf), winding
