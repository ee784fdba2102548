import numpy as np
import pytest

from relstring import singularity as sg
from relstring.curves import random_initial_data, to_null_pair
from relstring.errors import (InvalidEventError, PreconditionError,
                              RegularityError, UnclassifiedDegenerateError)
from relstring.evolution import evolve_point, time_slice
from relstring.periodic import TWO_PI
from relstring.presets import (circle_data, rotation_data, swallowtail_data,
                               translation_pair, zero_index_data)


# -- detection ----------------------------------------------------------------

def test_circle_first_singularity_is_collapse():
    ev = sg.first_singularity(circle_data())
    assert abs(ev.t0 - np.pi / 2) < 1e-9
    assert ev.kind == "shrink_to_point"
    assert ev.residual < 1e-10


def test_first_singularity_requires_regular_data():
    with pytest.raises(RegularityError):
        sg.first_singularity(rotation_data(3, 1))


def test_theorem_window_on_random_seeds():
    for seed in range(12):
        data = random_initial_data(seed)
        ev = sg.first_singularity(data)
        assert 0.0 < ev.t0 <= data.period / 2 + 1e-6
        assert ev.residual <= 1e-9


def test_first_time_constraint():
    # at the minimal time either the slice collapses, or zeta = eta there
    # (a lone ordinary cusp cannot be first); simultaneous cusps must be many
    for seed in range(15):
        events = sg.first_singularity_events(random_initial_data(seed))
        kinds = {ev.kind for ev in events}
        if kinds <= {"degenerate_43", "higher_order", "shrink_to_point"}:
            continue
        assert sum(ev.kind == "ordinary_cusp" for ev in events) >= 2


def test_singular_set_circle_and_rotation():
    c = circle_data()
    assert sg.singular_set_at_time(c, 0.7).size == 0
    assert sg.singular_set_at_time(c, np.pi / 2 - 1e-3).size == 0
    # cusp lattice 4 s - 2 t = 0 mod 2 pi: four parameter zeros per period
    r = rotation_data(3, 1)
    zs = sg.singular_set_at_time(r, 0.0)
    assert np.abs(zs - np.array([0.0, np.pi / 2, np.pi, 3 * np.pi / 2])).max() < 1e-9
    t = 0.4
    zs_t = sg.singular_set_at_time(r, t)
    want = np.sort((t / 2 + np.arange(4) * np.pi / 2) % TWO_PI)
    assert np.abs(zs_t - want).max() < 1e-9


def test_singular_set_swallowtail_two_per_slice():
    d = swallowtail_data()
    for t in (-1.2, -0.5, 0.01, 0.05, 0.5, 3.0):
        assert sg.singular_set_at_time(d, t).size == 2
    # the two vertices at t = 0
    zs0 = sg.singular_set_at_time(d, 0.0)
    assert np.abs(zs0 - np.array([0.0, np.pi])).max() < 1e-8


# -- classification -----------------------------------------------------------

def test_event_at_validates_defining_equation():
    with pytest.raises(InvalidEventError):
        sg.event_at(circle_data(), 0.3, 0.3)


def test_classification_table_on_presets():
    r = rotation_data(3, 1)
    ev = sg.event_at(r, 0.0, 0.0)
    assert ev.kind == "ordinary_cusp"
    assert abs(ev.zeta + 1.0) < 1e-9 and abs(ev.eta - 3.0) < 1e-9

    sw = swallowtail_data()
    ev0 = sg.event_at(sw, 0.0, 0.0)
    assert ev0.kind == "degenerate_43"
    assert abs(ev0.zeta - ev0.eta) < 1e-9
    assert abs((ev0.zeta_prime - ev0.eta_prime) + 4.0) < 1e-6

    ev_c = sg.event_at(circle_data(), np.pi / 2, 1.234)
    assert ev_c.kind == "shrink_to_point"


def test_tangent_reversal_classification():
    # synthetic lifts with zeta = -eta != 0 at the event: reversal without
    # the ordinary-cusp certificate
    from relstring.curves import NullPair
    from relstring.periodic import LinearPlusPeriodic, PeriodicFunction
    L = TWO_PI
    zero = PeriodicFunction.constant(0.0, L)
    psi = LinearPlusPeriodic(1.0, 0.0, zero)           # zeta = +1
    psit = LinearPlusPeriodic(-1.0, np.pi, zero)       # eta = -1
    pair = NullPair(psi, psit, L, 1, -1, singular_preset=True)
    # a = (cos s, sin s), b = (cos s, -sin s): cancellation at s = pi/2
    ev = sg.event_at(pair, 0.0, np.pi / 2)
    assert ev.kind == "tangent_reversal"


# -- propagation / formation ---------------------------------------------------

def test_rotation_propagation_track():
    r = rotation_data(3, 1)
    ev = sg.event_at(r, 0.0, 0.0)
    curve = sg.propagation_curve(r, ev, (-0.5, 1.0), step=2e-3)
    assert np.abs(curve.values - (ev.s0 + curve.param / 2)).max() < 1e-8
    assert curve.residual_max < 1e-8
    assert curve.null_deviation_max < 1e-6
    assert not curve.halted
    model = sg.local_model(r, ev)
    assert abs(model.rotation_rate - (-0.5)) < 1e-9  # S'(0) = -q/p = 1/2 in s


def test_propagation_needs_ordinary_cusp():
    c = circle_data()
    ev = sg.event_at(c, np.pi / 2, 0.0)
    with pytest.raises(PreconditionError):
        sg.propagation_curve(c, ev, (np.pi / 2, np.pi / 2 + 0.5))


def test_swallowtail_formation_track():
    sw = swallowtail_data()
    ev = sg.event_at(sw, 0.0, 0.0)
    curve = sg.formation_curve(sw, ev, (-0.12, 0.12), step=1e-3)
    assert abs(curve.tpp0 - 2.0) < 1e-3
    assert curve.future_directed
    mask = np.abs(curve.param) <= 0.1
    coeff = np.polyfit(curve.param[mask], curve.values[mask], 2)[0]
    assert abs(coeff - 1.0) < 0.05
    # formation curve agrees with brute-force zeros of the slice tangent
    t_probe = 0.01
    brute = sg.singular_set_at_time(sw, t_probe)
    brute = np.where(brute > np.pi, brute - TWO_PI, brute)
    from_curve = np.sort(curve.param[np.argsort(np.abs(curve.values - t_probe))[:6]])
    assert min(abs(b - f) for b in brute for f in from_curve) < 5e-3


def test_formation_needs_degenerate_event():
    r = rotation_data(3, 1)
    ev = sg.event_at(r, 0.0, 0.0)
    with pytest.raises(PreconditionError):
        sg.formation_curve(r, ev, (-0.1, 0.1))


# -- local models ---------------------------------------------------------------

def test_local_model_rotation():
    r = rotation_data(3, 1)
    m = sg.local_model(r, sg.event_at(r, 0.0, 0.0))
    assert m.motion == "rotation"
    assert abs(m.p + 2.0) < 1e-9
    assert abs(m.q - 1.0) < 1e-9
    assert abs(m.k0 + 1.5) < 1e-9
    assert abs(m.center_offset - (-2.0 / 3.0)) < 1e-9  # p/(p^2 - q^2) = -2/3


def test_local_model_self_similar():
    sw = swallowtail_data()
    m = sg.local_model(sw, sg.event_at(sw, 0.0, 0.0))
    assert m.motion == "self_similar"
    assert abs(m.p) < 1e-9
    assert abs(m.q - 1.0) < 1e-6
    assert abs(m.u3 + 2.0) < 1e-6


def test_local_model_translation():
    pair = translation_pair(1.0)
    ev = sg.event_at(pair, 0.0, 0.0)
    m = sg.local_model(pair, ev)
    assert m.motion == "translation"
    assert abs(m.p - m.q) < 1e-12
    assert m.k0 == 0.0


def test_local_model_unclassified_degenerate():
    from relstring.curves import NullPair
    from relstring.periodic import LinearPlusPeriodic, PeriodicFunction
    zero = PeriodicFunction.constant(0.0, TWO_PI)
    psi = LinearPlusPeriodic(0.0, 0.0, zero)
    psit = LinearPlusPeriodic(0.0, 0.0, zero)
    pair = NullPair(psi, psit, TWO_PI, 0, 0, singular_preset=True)
    ev = sg.event_at(pair, 0.0, 0.0, classify_now=False)
    with pytest.raises(UnclassifiedDegenerateError):
        sg.local_model(pair, ev)


# -- rigid-motion and self-similar checks ---------------------------------------

def test_rotation_preset_is_global_rigid_motion():
    # slice(t) = R(-3t/2) slice(0) under the reparametrization s -> s - t/2
    r = rotation_data(3, 1)
    t = 0.31
    n = 256
    s = np.arange(n) * (TWO_PI / n)
    A = evolve_point(r, 0.0, s - t / 2)
    B = evolve_point(r, t, s)
    theta, R, trans, rms = sg.procrustes_fit(A, B)
    assert rms < 1e-10
    want = np.angle(np.exp(1j * (-1.5 * t)))
    assert abs(np.angle(np.exp(1j * (theta - want)))) < 1e-8


def test_rigid_motion_third_order_near_random_cusp():
    # after the first event splits, track an ordinary cusp and Procrustes-fit
    # a cusp-scale window: deviation drops ~8x when the lag (and window) halve
    data = random_initial_data(3)
    ev0 = sg.first_singularity(data)
    t1 = ev0.t0 + 0.05
    cusps = sg.singular_set_at_time(data, t1)
    ev = None
    for s0 in cusps:
        cand = sg.event_at(data, t1, float(s0))
        if cand.kind == "ordinary_cusp":
            ev = cand
            break
    assert ev is not None
    model = sg.local_model(data, ev)

    def deviation(h):
        window = np.linspace(-2 * h, 2 * h, 101)
        ref = evolve_point(data, t1, ev.s0 + window + model.rotation_rate * h)
        moved = evolve_point(data, t1 + h, ev.s0 + window)
        _, _, _, rms = sg.procrustes_fit(ref, moved)
        return rms

    for h in (0.04, 0.02):
        assert 6.0 < deviation(h) / deviation(h / 2) < 10.0


def test_self_similar_residual_quarters_on_symmetric_preset():
    # the preset is symmetric under s -> -s, x -> -x, which kills the odd
    # remainder coefficients: the residual decays like 1/scale^2 here (a
    # generic formation event decays like 1/scale, see the next test)
    sw = swallowtail_data()
    ev = sg.event_at(sw, 0.0, 0.0)
    res = sg.self_similar_residual(sw, ev, scales=(2, 4, 8, 16))
    vals = [res[n] for n in (2, 4, 8, 16)]
    for a, b in zip(vals[:-1], vals[1:]):
        assert 0.2 < b / a < 0.32


def test_self_similar_residual_halves_on_generic_event():
    data = random_initial_data(0)
    ev = sg.first_singularity(data)
    assert ev.kind == "degenerate_43"
    res = sg.self_similar_residual(data, ev, scales=(2, 4, 8, 16, 32),
                                   window=(0.5, 0.5))
    vals = list(res.values())
    for a, b in zip(vals[:-1], vals[1:]):
        assert 0.35 < b / a < 0.65


def test_self_similar_residual_model_input_is_exact():
    sw = swallowtail_data()
    ev = sg.event_at(sw, 0.0, 0.0)
    q, u3 = 1.0, -2.0
    e = ev.direction
    e_perp = np.array([-e[1], e[0]])

    def model(t, s):
        t = np.asarray(t, float)
        s = np.asarray(s, float)
        X = q * t * s + u3 * s ** 3 / 6.0
        Y = t - 0.5 * q * q * t * s ** 2 - q * u3 * s ** 4 / 8.0
        return Y[..., None] * e + X[..., None] * e_perp

    res = sg.self_similar_residual(model, ev, scales=(2, 4))
    assert max(res.values()) < 1e-9


def test_self_similar_residual_needs_formation_event():
    r = rotation_data(3, 1)
    ev = sg.event_at(r, 0.0, 0.0)
    with pytest.raises(PreconditionError):
        sg.self_similar_residual(r, ev)


# -- diagnostics ----------------------------------------------------------------

def test_monotonicity_circle():
    rep = sg.monotonicity_diagnostics(to_null_pair(circle_data()))
    assert rep.psi_monotone == "non-decreasing"
    assert rep.psitilde_monotone == "non-decreasing"
    assert rep.both_monotone
    assert rep.extremal_collision is None


def test_monotonicity_zero_index_collision():
    rep = sg.monotonicity_diagnostics(to_null_pair(zero_index_data()))
    assert rep.winding_a == rep.winding_b == 0
    assert rep.extremal_collision is True


def test_nonmonotone_lift_flagged_and_singularity_still_found():
    # seeds with sizable wiggles produce non-monotone psi at index 1
    found = False
    for seed in range(10):
        data = random_initial_data(seed, amplitude=0.8)
        rep = sg.monotonicity_diagnostics(to_null_pair(data))
        if rep.psi_monotone is None:
            found = True
            ev = sg.first_singularity(data)
            assert 0.0 < ev.t0 <= data.period / 2 + 1e-6
            break
    assert found


def test_procrustes_recovers_planted_motion():
    rng = np.random.default_rng(0)
    P = rng.standard_normal((40, 2))
    theta = 0.83
    R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    Q = P @ R.T + np.array([0.3, -1.1])
    got_theta, _, got_trans, rms = sg.procrustes_fit(P, Q)
    assert abs(got_theta - theta) < 1e-12
    assert np.abs(got_trans - np.array([0.3, -1.1])).max() < 1e-12
    assert rms < 1e-12
