import numpy as np
import pytest

from relstring.errors import StructuralError
from relstring.periodic import (LinearPlusPeriodic, PeriodicFunction, TWO_PI,
                                invert_cumulative, lift_angle, wrap_angle)


def _random_pf(seed, dim=1, K=6, period=TWO_PI):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((K + 1, dim)) / (1 + np.arange(K + 1))[:, None] ** 2
    b = rng.standard_normal((K + 1, dim)) / (1 + np.arange(K + 1))[:, None] ** 2
    return PeriodicFunction(period, a, b)


def test_periodicity_to_roundoff():
    f = _random_pf(0, dim=2)
    s = np.linspace(0.0, 3 * TWO_PI, 100)
    rel = np.abs(f(s + f.period) - f(s)) / (1.0 + np.abs(f(s)))
    assert rel.max() < 1e-12


def test_from_samples_reproduces_band_limited():
    f = _random_pf(1, dim=2, K=5)
    g = PeriodicFunction.from_samples(f.sample(64), f.period)
    s = np.linspace(0, TWO_PI, 321)
    assert np.abs(f(s) - g(s)).max() < 1e-13


def test_derivative_of_antiderivative_is_identity():
    f = _random_pf(2, dim=2)
    F = f.antiderivative()
    g = F.derivative()
    s = np.linspace(0, TWO_PI, 400)
    assert np.abs(g(s) - f(s)).max() < 1e-10


def test_antiderivative_differences_equal_integrals():
    f = _random_pf(3)
    F = f.antiderivative()
    s = np.linspace(0.3, 5.1, 20)
    from scipy.integrate import quad
    for lo, hi in zip(s[:-1], s[1:]):
        val, _ = quad(f, lo, hi, epsabs=1e-12)
        assert abs((F(hi) - F(lo)) - val) < 1e-10


def test_shift_is_exact_translate():
    f = _random_pf(4, dim=3)
    g = f.shift(0.7)
    s = np.linspace(0, TWO_PI, 200)
    assert np.abs(g(s) - f(s + 0.7)).max() < 1e-13


def test_derivative_matches_finite_differences_at_second_order():
    f = _random_pf(5, dim=2)
    fp = f.derivative()
    s = np.linspace(0, TWO_PI, 50)
    errs = []
    for h in (1e-2, 5e-3, 2.5e-3):
        fd = (f(s + h) - f(s - h)) / (2 * h)
        errs.append(np.abs(fd - fp(s)).max())
    # O(h^2): halving h divides the error by ~4
    assert errs[1] < 0.3 * errs[0]
    assert errs[2] < 0.3 * errs[1]


def test_sample_agrees_with_eval():
    f = _random_pf(6, dim=2, K=9)
    n = 64
    s = np.arange(n) * (f.period / n)
    assert np.abs(f.sample(n) - f(s)).max() < 1e-13


def test_mean_and_arithmetic():
    f = _random_pf(7)
    g = _random_pf(8)
    s = np.linspace(0, TWO_PI, 97)
    assert np.abs((f + g)(s) - (f(s) + g(s))).max() < 1e-13
    assert np.abs((f - g)(s) - (f(s) - g(s))).max() < 1e-13
    assert np.abs((2.5 * f)(s) - 2.5 * f(s)).max() < 1e-13
    assert abs(f.mean() - f.cos_coeffs[0, 0]) == 0.0


def test_period_mismatch_rejected():
    f = _random_pf(9)
    g = _random_pf(10, period=1.0)
    with pytest.raises(StructuralError):
        _ = f + g


def test_lift_angle_windings():
    n = 4096
    s = np.arange(n) * (TWO_PI / n)
    for d in (-2, -1, 0, 1, 3):
        theta = d * s + 0.4 * np.sin(s) + 0.2
        xy = np.column_stack([np.cos(theta), np.sin(theta)])
        lift, winding = lift_angle(xy, TWO_PI)
        assert winding == d
        assert np.abs(wrap_angle(lift(s) - theta)).max() < 1e-10


def test_linear_plus_periodic_translate_and_derivative():
    pf = _random_pf(11)
    f = LinearPlusPeriodic(0.7, 1.2, pf)
    s = np.linspace(0, 10, 60)
    g = f.translate(0.3)
    assert np.abs(g(s) - f(s + 0.3)).max() < 1e-12
    d = f.derivative()
    h = 1e-6
    fd = (f(s + h) - f(s - h)) / (2 * h)
    assert np.abs(d(s) - fd).max() < 1e-6


def test_invert_cumulative():
    rho = PeriodicFunction.from_callable(lambda s: 1.5 + 0.4 * np.sin(s), TWO_PI, n=256)
    targets = np.linspace(0.0, 1.5 * TWO_PI, 40)
    sigma = invert_cumulative(rho, targets)
    F = rho.antiderivative()
    assert np.abs((F(sigma) - F(0.0)) - targets).max() < 1e-11
