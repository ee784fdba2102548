"""Conversion of arbitrarily parametrized timelike data into orthogonal gauge.

The reparametrization invariant

    Q = |gamma_t|^2 - <gamma_t, gamma_s>^2 / |gamma_s|^2

measures the normal velocity; the induced metric is Lorentzian iff Q < 1.
Orthogonal gauge is reached in two steps: normalize the initial slice so that
|gamma_s(0, .)|^2 = 1 - Q(0, .), then relabel points along the characteristics

    ds/dt = mu(t, s),    mu = -<gamma_t, gamma_s> / |gamma_s|^2,

which move each label orthogonally to the slice (the free constant in mu is
set to zero; other choices change the gauge, not the surface).  Along the
characteristics |gamma_s| / sqrt(1 - Q) is conserved, which upgrades the
initial normalization to |gamma_t|^2 + |gamma_s|^2 = 1 for all time.

Surface patches are sampled grids (arbitrary input surfaces arrive as data,
not formulas); curve data is spectral.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .curves import InitialData
from .errors import (CharacteristicCrossingError, NotTimelikeError,
                     StructuralError, UndefinedQError)
from .periodic import PeriodicFunction, invert_cumulative


@dataclass(frozen=True)
class ArbitraryCurveData:
    """A closed curve with a normal velocity field, any parametrization."""

    curve: PeriodicFunction
    normal_speed: PeriodicFunction
    tol: float = 1e-9

    def __post_init__(self):
        if abs(self.curve.period - self.normal_speed.period) > 1e-12 * self.curve.period:
            raise StructuralError("curve and normal speed must share the period")
        n = 4096
        cp = self.curve.derivative().sample(n)
        bs = self.normal_speed.sample(n)
        orth = float(np.max(np.abs(np.sum(cp * bs, axis=-1))))
        if orth > self.tol:
            raise StructuralError(f"velocity is not normal to the curve ({orth:.3e})")
        speed = float(np.max(np.linalg.norm(bs, axis=-1)))
        if speed >= 1.0:
            raise NotTimelikeError(f"normal speed reaches {speed:.6f} >= 1")


def orthogonal_gauge_initial_data(data, n=4096):
    """Reparametrize (curve, normal speed) into valid orthogonal-gauge data.

    The new parameter integrates |c'| / sqrt(1 - |beta*|^2) d sigma, so the new
    period equals the proper-time-weighted length (the timelikeness-index
    denominator).
    """
    c = data.curve
    beta_star = data.normal_speed
    m = 8192
    sigma = np.arange(m) * (c.period / m)
    cp = c.derivative().sample(m)
    bs = beta_star.sample(m)
    rho = np.linalg.norm(cp, axis=-1) / np.sqrt(1.0 - np.sum(bs * bs, axis=-1))
    rho_f = PeriodicFunction.from_samples(rho, c.period)
    L = float(rho_f.mean()) * c.period
    targets = np.arange(n) * (L / n)
    sig_of_s = invert_cumulative(rho_f, targets)
    alpha = PeriodicFunction.from_samples(c(sig_of_s), L)
    beta = PeriodicFunction.from_samples(beta_star(sig_of_s), L)
    return InitialData(alpha, beta)


@dataclass
class ArbitrarySurfacePatch:
    """Sampled surface map on a uniform (t, s) grid, s-periodic."""

    t: np.ndarray          # (nt,), uniform
    s: np.ndarray          # (ns,), uniform over [0, period)
    xy: np.ndarray         # (nt, ns, 2)
    period: float
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.s = np.asarray(self.s, dtype=float)
        self.xy = np.asarray(self.xy, dtype=float)
        if self.xy.shape != (self.t.size, self.s.size, 2):
            raise StructuralError("xy must have shape (nt, ns, 2)")
        if self.t.size < 5:
            raise StructuralError("need at least 5 time rows for differencing")
        for g in (self.t, self.s):
            d = np.diff(g)
            if np.max(np.abs(d - d[0])) > 1e-9 * max(abs(d[0]), 1e-30):
                raise StructuralError("grids must be uniform")

    @property
    def dt(self):
        return float(self.t[1] - self.t[0])

    @property
    def ds(self):
        return float(self.s[1] - self.s[0])


def _time_derivative(values, dt):
    """4th-order finite difference along axis 0 (one-sided at the edges)."""
    f = values
    out = np.empty_like(f)
    out[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * dt)
    out[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * dt)
    out[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * dt)
    out[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * dt)
    out[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * dt)
    return out


def _space_derivative(values, period):
    """Spectral derivative along axis 1 (rows are periodic samples)."""
    ns = values.shape[1]
    k = np.fft.rfftfreq(ns, d=1.0 / ns)
    spec = np.fft.rfft(values, axis=1)
    spec *= (2j * np.pi / period) * k[None, :, None]
    return np.fft.irfft(spec, n=ns, axis=1)


def _derivative_grids(patch):
    if "gt" not in patch._cache:
        patch._cache["gt"] = _time_derivative(patch.xy, patch.dt)
        patch._cache["gs"] = _space_derivative(patch.xy, patch.period)
    return patch._cache["gt"], patch._cache["gs"]


def compute_Q_grid(patch):
    """Q on the full grid; raises where the slice tangent degenerates."""
    gt, gs = _derivative_grids(patch)
    gs2 = np.sum(gs * gs, axis=-1)
    if float(gs2.min()) < 1e-20:
        raise UndefinedQError("gamma_s vanishes on the patch; Q is undefined")
    cross = np.sum(gt * gs, axis=-1)
    return np.sum(gt * gt, axis=-1) - cross * cross / gs2


def compute_Q(patch, t, s):
    """Q interpolated at (t, s); invariant under s-reparametrization."""
    if "Qspl" not in patch._cache:
        Q = compute_Q_grid(patch)
        from scipy.interpolate import RectBivariateSpline
        pad = 4
        s_ext = np.concatenate([patch.s[-pad:] - patch.period, patch.s,
                                patch.s[:pad] + patch.period])
        Q_ext = np.concatenate([Q[:, -pad:], Q, Q[:, :pad]], axis=1)
        patch._cache["Qspl"] = RectBivariateSpline(patch.t, s_ext, Q_ext, kx=3, ky=3)
    s_wrapped = np.mod(s, patch.period)
    out = patch._cache["Qspl"](t, s_wrapped, grid=False)
    return float(out) if np.isscalar(t) and np.isscalar(s) else out


@dataclass(frozen=True)
class GaugeResiduals:
    orthogonality: float       # max |<gamma_t, gamma_s>|
    normalization: float       # max ||gamma_t|^2 + |gamma_s|^2 - 1|
    conservation_drift: float  # max_t |rho(t, s) - rho(0, s)|


def gauge_residuals(patch):
    gt, gs = _derivative_grids(patch)
    Q = compute_Q_grid(patch)
    if float(Q.max()) >= 1.0:
        raise NotTimelikeError("patch is not Lorentzian (Q >= 1)")
    cross = np.sum(gt * gs, axis=-1)
    norm = np.sum(gt * gt, axis=-1) + np.sum(gs * gs, axis=-1) - 1.0
    rho = np.sqrt(np.sum(gs * gs, axis=-1)) / np.sqrt(1.0 - Q)
    drift = np.abs(rho - rho[0:1, :])
    return GaugeResiduals(float(np.max(np.abs(cross))),
                          float(np.max(np.abs(norm))),
                          float(drift.max()))


def _periodic_splines(grid, values, period):
    x = np.concatenate([grid, [grid[0] + period]])
    y = np.concatenate([values, values[:1]], axis=0)
    return CubicSpline(x, y, bc_type="periodic")


def reparametrize_surface(patch, rk_substeps=4):
    """Resample a Lorentzian patch into orthogonal gauge.

    Integrates the characteristics with a classical 4th-order scheme at step
    dt/rk_substeps, interpolating mu cubically in t and with periodic cubic
    splines in s.  Raises CharacteristicCrossingError if the label map stops
    being monotone (under-resolved grid).
    """
    gt, gs = _derivative_grids(patch)
    Q = compute_Q_grid(patch)
    if float(Q.max()) >= 1.0 - 1e-12:
        raise NotTimelikeError(f"patch is not Lorentzian (max Q = {Q.max():.6f})")
    gs2 = np.sum(gs * gs, axis=-1)
    mu = -np.sum(gt * gs, axis=-1) / gs2
    nt, ns = mu.shape
    dt = patch.dt

    # initial-slice normalization: d s_new = |gamma_s| / sqrt(1 - Q) d sigma
    rho0 = np.sqrt(gs2[0]) / np.sqrt(1.0 - Q[0])
    rho0_f = PeriodicFunction.from_samples(rho0, patch.period)
    L_new = float(rho0_f.mean()) * patch.period
    targets = np.arange(ns) * (L_new / ns)
    seeds = invert_cumulative(rho0_f, targets)

    mu_splines = [_periodic_splines(patch.s, mu[i], patch.period) for i in range(nt)]
    t0 = float(patch.t[0])

    def mu_eval(time, sig):
        j = int(np.clip(np.floor((time - t0) / dt) - 1, 0, nt - 4))
        tj = patch.t[j:j + 4]
        vals = np.stack([mu_splines[j + k](np.mod(sig, patch.period))
                         for k in range(4)])
        w = np.empty(4)
        for k in range(4):
            others = [m for m in range(4) if m != k]
            w[k] = np.prod([(time - tj[m]) / (tj[k] - tj[m]) for m in others])
        return w @ vals

    h = dt / rk_substeps
    chars = np.empty((nt, ns))
    chars[0] = seeds
    cur = seeds.copy()
    for i in range(nt - 1):
        for k in range(rk_substeps):
            time = t0 + (i * rk_substeps + k) * h
            k1 = mu_eval(time, cur)
            k2 = mu_eval(time + 0.5 * h, cur + 0.5 * h * k1)
            k3 = mu_eval(time + 0.5 * h, cur + 0.5 * h * k2)
            k4 = mu_eval(time + h, cur + h * k3)
            cur = cur + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if np.any(np.diff(cur) <= 0.0) or (cur[-1] - cur[0]) >= patch.period:
            raise CharacteristicCrossingError(
                f"characteristics crossed by t = {patch.t[i + 1]:.6f}")
        chars[i + 1] = cur

    out = np.empty_like(patch.xy)
    for i in range(nt):
        spl = _periodic_splines(patch.s, patch.xy[i], patch.period)
        out[i] = spl(np.mod(chars[i], patch.period))
    return ArbitrarySurfacePatch(patch.t.copy(), targets, out, L_new)


def patch_from_map(gamma, t_values, s_values, period):
    """Sample a callable (t, s) -> R^2 into a surface patch."""
    T, S = np.meshgrid(t_values, s_values, indexing="ij")
    return ArbitrarySurfacePatch(np.asarray(t_values, float),
                                 np.asarray(s_values, float),
                                 gamma(T, S), float(period))
