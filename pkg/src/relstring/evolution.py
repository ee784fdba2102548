"""Exact worldsheet evolution by the d'Alembert representation.

In orthogonal gauge the parametrization solves the flat wave equation, so

    gamma(t, s) = (alpha(s+t) + alpha(s-t)) / 2 + (B(s+t) - B(s-t)) / 2,

with B an antiderivative of beta.  Evaluation is spectral and meshless in t;
grids appear only for exports and root bracketing, so singularity times are
limited by root-finder tolerance alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AtSingularityError
from .periodic import PeriodicFunction

SINGULAR_SPEED = 1e-12


def evolve_point(data, t, s):
    """Position gamma(t, s); broadcasts over array-valued t, s."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    B = data.beta.antiderivative()
    return 0.5 * (data.alpha(s + t) + data.alpha(s - t)) \
        + 0.5 * (B(s + t) - B(s - t))


def gamma_s(data, t, s):
    """Slice tangent: 0.5*(alpha'(s+t) + alpha'(s-t)) + 0.5*(beta(s+t) - beta(s-t))."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    ap = data.alpha_prime()
    return 0.5 * (ap(s + t) + ap(s - t)) + 0.5 * (data.beta(s + t) - data.beta(s - t))


def gamma_t(data, t, s):
    """Coordinate velocity of the slice point."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    ap = data.alpha_prime()
    return 0.5 * (ap(s + t) - ap(s - t)) + 0.5 * (data.beta(s + t) + data.beta(s - t))


def tangent(data, t, s):
    """Unit tangent of the time slice; errors within SINGULAR_SPEED of a cusp."""
    g = gamma_s(data, t, s)
    speed = np.linalg.norm(g, axis=-1)
    if np.any(speed < SINGULAR_SPEED):
        raise AtSingularityError("slice tangent vanishes at the requested point")
    return g / speed[..., None]


@dataclass(frozen=True)
class Slice:
    """One time slice: parameters, positions, and tangent speeds."""

    t: float
    s: np.ndarray
    positions: np.ndarray
    speeds: np.ndarray


def time_slice(data, t, n=256):
    if n < 16:
        raise ValueError("need at least 16 samples per slice")
    s = np.arange(n) * (data.period / n)
    pos = evolve_point(data, t, s)
    speeds = np.linalg.norm(gamma_s(data, t, s), axis=-1)
    return Slice(float(t), s, pos, speeds)


def data_at_time(data, t, n=4096):
    """The slice at time t repackaged as initial data (gauge is preserved)."""
    from .curves import InitialData
    s = np.arange(n) * (data.period / n)
    alpha_t = PeriodicFunction.from_samples(evolve_point(data, t, s), data.period)
    beta_t = PeriodicFunction.from_samples(gamma_t(data, t, s), data.period)
    speeds = np.linalg.norm(gamma_s(data, t, s), axis=-1)
    singular = bool(speeds.min() <= 1e-6) or data.singular_preset
    return InitialData(alpha_t, beta_t, singular_preset=singular)


def worldsheet_grid(data, t_range, nt, ns):
    """Uniform (t, s) evaluation grid; rows ordered t-major for export."""
    t0, t1 = t_range
    ts = np.linspace(t0, t1, nt)
    ss = np.arange(ns) * (data.period / ns)
    T, S = np.meshgrid(ts, ss, indexing="ij")
    pos = evolve_point(data, T, S)
    return ts, ss, pos


def worldsheet_export(data, t_range, nt, ns):
    """Flat table of (t, s, position components), t-major then s."""
    ts, ss, pos = worldsheet_grid(data, t_range, nt, ns)
    T, S = np.meshgrid(ts, ss, indexing="ij")
    cols = [T.ravel(), S.ravel()] + [pos[..., k].ravel() for k in range(data.dim)]
    return np.column_stack(cols)
