import numpy as np
import pytest

from relstring.curves import random_initial_data, to_null_pair
from relstring.errors import AtSingularityError
from relstring.evolution import (data_at_time, evolve_point, gamma_s, gamma_t,
                                 tangent, time_slice, worldsheet_export)
from relstring.periodic import TWO_PI
from relstring.presets import (circle_data, rotation_closed_form, rotation_data,
                               swallowtail_data, zero_index_data)

VALID_PRESETS = [circle_data, rotation_data, swallowtail_data, zero_index_data]


def test_circle_evolution_closed_form():
    c = circle_data()
    s = np.linspace(0, TWO_PI, 33)
    got = evolve_point(c, np.pi / 3, s)
    want = 0.5 * np.column_stack([np.cos(s), np.sin(s)])
    assert np.abs(got - want).max() < 1e-12


def test_time_zero_returns_alpha():
    d = random_initial_data(4)
    s = np.linspace(0, TWO_PI, 57)
    assert np.abs(evolve_point(d, 0.0, s) - d.alpha(s)).max() < 1e-12


def test_rotation_preset_matches_closed_form():
    d = rotation_data(3, 1)
    gamma = rotation_closed_form(3, 1)
    rng = np.random.default_rng(0)
    t = rng.uniform(-3, 3, 200)
    s = rng.uniform(0, TWO_PI, 200)
    assert np.abs(evolve_point(d, t, s) - gamma(t, s)).max() < 1e-10


def test_circle_slice_shrinks_to_point():
    sl = time_slice(circle_data(), np.pi / 2, 64)
    assert np.abs(sl.positions).max() < 1e-12
    assert sl.speeds.max() < 1e-12


def test_slice_parameters_increase_and_close():
    sl = time_slice(swallowtail_data(), 0.3, 128)
    assert np.all(np.diff(sl.s) > 0)
    # positions are L-periodic in s: endpoint wraps to the start
    end = evolve_point(swallowtail_data(), 0.3, np.array([TWO_PI]))
    assert np.abs(end[0] - sl.positions[0]).max() < 1e-10


def test_swallowtail_slice_two_zero_speed_points():
    d = swallowtail_data()
    sl = time_slice(d, 0.2, 4096)
    # cusp parameters sit near +-sqrt(0.2) for the leading formation profile
    thresh = 2e-3
    idx = np.nonzero(sl.speeds < thresh)[0]
    s_near = np.sort(np.where(sl.s[idx] > np.pi, sl.s[idx] - TWO_PI, sl.s[idx]))
    clusters = np.split(s_near, np.nonzero(np.diff(s_near) > 0.1)[0] + 1)
    assert len(clusters) == 2
    centers = sorted(float(np.mean(c)) for c in clusters)
    root = np.sqrt(0.2)
    assert abs(centers[0] + root) < 0.15 * root
    assert abs(centers[1] - root) < 0.15 * root


def test_tangent_circle():
    c = circle_data()
    s = np.linspace(0, TWO_PI, 17)
    got = tangent(c, 0.0, s)
    assert np.abs(got - np.column_stack([-np.sin(s), np.cos(s)])).max() < 1e-12


def test_tangent_errors_at_singularity():
    with pytest.raises(AtSingularityError):
        tangent(circle_data(), np.pi / 2, 0.3)


def test_tangent_reverses_across_rotation_cusp():
    d = rotation_data(3, 1)
    eps = 1e-3
    u_minus = tangent(d, 0.0, -eps)
    u_plus = tangent(d, 0.0, +eps)
    assert float(u_minus @ u_plus) < -0.9


def test_tangent_continuous_through_formation_vertex():
    # at the 4/3 point zeta = eta, so there is no reversal at t = 0 ...
    d = swallowtail_data()
    eps = 1e-3
    u_minus = tangent(d, 0.0, -eps)
    u_plus = tangent(d, 0.0, +eps)
    assert float(u_minus @ u_plus) > 0.9
    assert np.abs(u_plus - np.array([1.0, 0.0])).max() < 0.05
    # ... while the split cusps at t > 0 do reverse
    from relstring.singularity import singular_set_at_time
    t = 0.04
    s_cusp = float(singular_set_at_time(d, t)[0])
    u_m = tangent(d, t, s_cusp - eps)
    u_p = tangent(d, t, s_cusp + eps)
    assert float(u_m @ u_p) < -0.9


def test_worldsheet_export_spot_checks():
    d = rotation_data(3, 1)
    table = worldsheet_export(d, (0.0, 1.0), 5, 16)
    assert table.shape == (80, 4)
    # t-major ordering
    assert np.all(np.diff(table[:, 0]) >= 0)
    for row in table[::7]:
        assert np.abs(evolve_point(d, row[0], row[1]) - row[2:4]).max() < 1e-12


@pytest.mark.parametrize("make", VALID_PRESETS)
def test_gauge_preserved_under_evolution(make):
    d = make()
    s = np.linspace(0, TWO_PI, 400)
    for t in (0.0, 0.37, 1.41, 2.83):
        gs = gamma_s(d, t, s)
        gt = gamma_t(d, t, s)
        orth = np.abs(np.sum(gs * gt, axis=1)).max()
        norm = np.abs(np.sum(gs * gs, axis=1) + np.sum(gt * gt, axis=1) - 1).max()
        assert orth < 1e-8 and norm < 1e-8


def test_dalembert_parallelogram_identity():
    d = random_initial_data(8)
    rng = np.random.default_rng(1)
    t, s, h = rng.uniform(-2, 2, 50), rng.uniform(0, TWO_PI, 50), rng.uniform(0, 1, 50)
    lhs = evolve_point(d, t + h, s) + evolve_point(d, t - h, s)
    rhs = evolve_point(d, t, s + h) + evolve_point(d, t, s - h)
    assert np.abs(lhs - rhs).max() < 1e-10


def test_gamma_s_matches_null_pair():
    d = random_initial_data(9)
    pair = to_null_pair(d)
    rng = np.random.default_rng(2)
    t, s = rng.uniform(-2, 2, 60), rng.uniform(0, TWO_PI, 60)
    assert np.abs(2 * gamma_s(d, t, s) - (pair.a(s + t) + pair.b(s - t))).max() < 1e-10


def test_time_periodicity_up_to_mean_displacement():
    d = random_initial_data(10)
    L = d.period
    disp = d.beta.mean() * L
    rng = np.random.default_rng(3)
    t, s = rng.uniform(-2, 2, 40), rng.uniform(0, TWO_PI, 40)
    delta = evolve_point(d, t + L, s) - evolve_point(d, t, s)
    assert np.abs(delta - disp).max() < 1e-9


def test_data_at_time_reproduces_worldsheet():
    d = random_initial_data(11)
    t0 = 0.4
    shifted = data_at_time(d, t0)
    s = np.linspace(0, TWO_PI, 100)
    assert np.abs(evolve_point(shifted, 0.3, s) - evolve_point(d, t0 + 0.3, s)).max() < 1e-9
