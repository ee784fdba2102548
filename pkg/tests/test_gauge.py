import numpy as np
import pytest

from relstring import bounds
from relstring.curves import random_initial_data, validate_initial_data
from relstring.errors import NotTimelikeError, StructuralError
from relstring.evolution import evolve_point, gamma_t
from relstring.gauge import (ArbitraryCurveData, ArbitrarySurfacePatch,
                             compute_Q, compute_Q_grid, gauge_residuals,
                             orthogonal_gauge_initial_data, patch_from_map,
                             reparametrize_surface)
from relstring.periodic import PeriodicFunction, TWO_PI
from relstring.presets import circle_data


def _circle_curve_data(speed=0.6):
    s = np.arange(256) * (TWO_PI / 256)
    c = PeriodicFunction.from_samples(np.column_stack([np.cos(s), np.sin(s)]), TWO_PI)
    normal = speed * np.column_stack([-np.cos(s), -np.sin(s)])
    b = PeriodicFunction.from_samples(normal, TWO_PI)
    return ArbitraryCurveData(c, b)


def test_curve_data_invariants_enforced():
    s = np.arange(128) * (TWO_PI / 128)
    c = PeriodicFunction.from_samples(np.column_stack([np.cos(s), np.sin(s)]), TWO_PI)
    tangent_velocity = PeriodicFunction.from_samples(
        0.3 * np.column_stack([-np.sin(s), np.cos(s)]), TWO_PI)
    with pytest.raises(StructuralError):
        ArbitraryCurveData(c, tangent_velocity)
    with pytest.raises(NotTimelikeError):
        _circle_curve_data(speed=1.01)


def test_gauge_fix_circle_at_rest_is_identity():
    s = np.arange(256) * (TWO_PI / 256)
    c = PeriodicFunction.from_samples(np.column_stack([np.cos(s), np.sin(s)]), TWO_PI)
    zero = PeriodicFunction.constant([0.0, 0.0], TWO_PI)
    data = orthogonal_gauge_initial_data(ArbitraryCurveData(c, zero))
    assert abs(data.period - TWO_PI) < 1e-10
    assert np.abs(data.alpha(s) - c(s)).max() < 1e-10


def test_gauge_fix_moving_circle_period_and_speed():
    data = orthogonal_gauge_initial_data(_circle_curve_data(0.6))
    # measure d sigma / sqrt(1 - 0.36) stretches the period to 2*pi / 0.8
    assert abs(data.period - 2.5 * np.pi) < 1e-10
    rep = validate_initial_data(data)
    assert rep.passed
    assert abs(rep.min_tangent_speed - 0.8) < 1e-9


def test_gauge_fix_random_curve_data_validates():
    rng = np.random.default_rng(7)
    s = np.arange(512) * (TWO_PI / 512)
    wiggle = sum(rng.uniform(-0.2, 0.2) * np.cos((k + 1) * s + rng.uniform(0, TWO_PI))
                 for k in range(3))
    radius = 1.0 + 0.2 * wiggle
    pts = np.column_stack([radius * np.cos(s), radius * np.sin(s)])
    c = PeriodicFunction.from_samples(pts, TWO_PI)
    cp = c.derivative()(s)
    normal = np.column_stack([-cp[:, 1], cp[:, 0]])
    normal /= np.linalg.norm(normal, axis=1, keepdims=True)
    speed = 0.5 + 0.3 * np.sin(2 * s)
    b = PeriodicFunction.from_samples(speed[:, None] * normal, TWO_PI)
    data = orthogonal_gauge_initial_data(ArbitraryCurveData(c, b))
    rep = validate_initial_data(data, tol=1e-8)
    assert rep.passed
    # cross-module consistency: new period equals the proper-weighted length
    arc = bounds.OpenArc.from_functions(lambda x: c(x), lambda x: b(x),
                                        (0.0, TWO_PI), deg=128)
    assert abs(data.period - bounds.proper_weighted_length(arc)) < 1e-8


def test_static_patch_has_zero_Q():
    gam = lambda T, S: np.stack([np.cos(S), np.sin(S)], axis=-1) + 0.0 * T[..., None]
    patch = patch_from_map(gam, np.linspace(0, 1, 16), np.arange(64) * (TWO_PI / 64), TWO_PI)
    assert np.abs(compute_Q_grid(patch)).max() < 1e-20


def test_orthogonal_patch_Q_equals_speed_squared():
    d = circle_data()
    gam = lambda T, S: evolve_point(d, T, S)
    tv = np.linspace(0, 1.0, 128)
    sv = np.arange(128) * (TWO_PI / 128)
    patch = patch_from_map(gam, tv, sv, TWO_PI)
    Q = compute_Q_grid(patch)
    want = np.sin(tv)[:, None] ** 2 * np.ones(128)[None, :]
    assert np.abs(Q - want).max() < 1e-8


def test_Q_invariant_under_reparametrization():
    d = random_initial_data(2, amplitude=0.2)
    L = d.period
    warp = lambda S: S + 0.3 * np.sin(S)
    gam = lambda T, S: evolve_point(d, T, warp(S))
    tv = np.linspace(0, 0.25, 128)
    sv = np.arange(512) * (L / 512)
    patch = patch_from_map(gam, tv, sv, L)
    T, S = np.meshgrid(tv, sv, indexing="ij")
    q_exact = np.sum(gamma_t(d, T, warp(S)) ** 2, axis=-1)
    Q = compute_Q_grid(patch)
    assert np.abs(Q - q_exact).max() < 1e-8
    # point interpolation agrees too
    assert abs(compute_Q(patch, 0.125, 1.0) - np.sum(gamma_t(d, 0.125, warp(1.0)) ** 2)) < 1e-7


def test_circle_collapse_conservation_law():
    gam = lambda T, S: np.cos(T)[..., None] * np.stack([np.cos(S), np.sin(S)], axis=-1)
    tv = np.linspace(0.0, np.arccos(0.05), 256)
    sv = np.arange(256) * (TWO_PI / 256)
    patch = patch_from_map(gam, tv, sv, TWO_PI)
    res = gauge_residuals(patch)
    # |gamma_s| / sqrt(1 - Q) = |cos t| / sqrt(1 - sin^2 t) = 1 throughout
    assert res.conservation_drift < 1e-6
    assert res.orthogonality < 1e-10


def test_reparametrize_already_orthogonal_is_identity():
    from relstring.singularity import first_singularity
    d = random_initial_data(1, amplitude=0.2)
    t_end = 0.3 * first_singularity(d).t0
    tv = np.linspace(0.0, t_end, 64)
    sv = np.arange(256) * (d.period / 256)
    patch = patch_from_map(lambda T, S: evolve_point(d, T, S), tv, sv, d.period)
    fixed = reparametrize_surface(patch)
    assert abs(fixed.period - d.period) < 1e-8
    assert np.abs(fixed.xy - patch.xy).max() < 1e-8


def test_reparametrize_recovers_warped_surface():
    d = random_initial_data(7, amplitude=0.3)
    from relstring.singularity import first_singularity
    t_end = 0.4 * first_singularity(d).t0
    L = d.period

    def warped(T, S):
        m = S + 0.25 * np.sin(S) * (1 + 0.5 * np.sin(1.3 * T)) + 0.1 * np.sin(2 * S + 0.7 * T)
        return evolve_point(d, T, m)

    tv = np.linspace(0.0, t_end, 128)
    sv = np.arange(512) * (L / 512)
    patch = patch_from_map(warped, tv, sv, L)
    rec = reparametrize_surface(patch)
    res = gauge_residuals(rec)
    assert res.orthogonality < 1e-6
    assert res.normalization < 1e-6
    assert res.conservation_drift < 1e-6
    # the warp fixes sigma = 0, so recovered labels match the exact gauge ones
    exact = evolve_point(d, tv[:, None], rec.s[None, :])
    assert np.linalg.norm(rec.xy - exact, axis=-1).max() < 1e-6


def test_nontimelike_patch_rejected():
    gam = lambda T, S: np.stack([np.cos(S) + 1.2 * T, np.sin(S)], axis=-1)
    patch = patch_from_map(gam, np.linspace(0, 1, 16), np.arange(64) * (TWO_PI / 64), TWO_PI)
    with pytest.raises(NotTimelikeError):
        reparametrize_surface(patch)


def test_patch_shape_validation():
    with pytest.raises(StructuralError):
        ArbitrarySurfacePatch(np.linspace(0, 1, 4), np.arange(8.0),
                              np.zeros((4, 8, 2)), 8.0)
