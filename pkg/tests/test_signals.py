import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from periodic_lan import signals
from periodic_lan.errors import InvalidParameter

from conftest import all_families

H = 1e-6


def fd(f, x, h=H):
    return (f(x + h) - f(x - h)) / (2 * h)


def test_eval_examples(sine):
    assert signals.evaluate(sine, [1.0], 1.0, 0.25) == pytest.approx(1.0, abs=1e-15)
    assert signals.evaluate(sine, [1.0], 1.0, 1.25) == pytest.approx(1.0, abs=1e-12)
    assert signals.evaluate(sine, [0.0], 3.0, 7.77) == 0.0


@pytest.mark.parametrize("theta,T", [([1.0, 2.0], 1.0), ([1.0], 0.0), ([1.0], -2.0)])
def test_eval_rejects_bad_parameters(sine, theta, T):
    with pytest.raises(InvalidParameter):
        signals.evaluate(sine, theta, T, 0.5)


def test_derivative_examples(sine):
    assert signals.derivatives(sine, [1.0], 1.0, 0.0).dT == 0.0

    # central difference in T as the oracle
    oracle = fd(lambda T: signals.evaluate(sine, [1.0], T, 1.0), 1.0)
    assert oracle == pytest.approx(-2 * np.pi, abs=1e-6)
    der = signals.derivatives(sine, [1.0], 1.0, 1.0)
    assert der.dT == pytest.approx(oracle, abs=1e-6)
    assert der.grad_theta[0] == pytest.approx(0.0, abs=1e-12)


def test_stacked_matches_components(sine):
    der = signals.derivatives(sine, [2.0], 1.5, np.array([0.1, 0.7]))
    st_ = der.stacked()
    assert st_.shape == (2, 2)
    np.testing.assert_array_equal(st_[:, 0], der.grad_theta[:, 0])
    np.testing.assert_array_equal(st_[:, 1], der.dT)


def test_periodicity_examples(family):
    spec, theta = family
    assert signals.check_periodicity(spec, theta, 64)


def test_periodicity_linear_basis_sqrt2_sin():
    spec = signals.SignalSpec.linear_basis([{k: (np.sqrt(2), 0.0)} for k in (1, 2, 3)])
    assert signals.check_periodicity(spec, [1.0, 1.0, 1.0], 100)


class DriftingSignal(signals.SignalSpec):
    """Test fixture: a built-in signal plus a non-periodic linear term."""

    def shape(self, theta, u):
        return super().shape(theta, u) + 1e-3 * np.asarray(u)


def test_periodicity_detects_injected_term():
    base = signals.sine_signal()
    broken = DriftingSignal(
        base.family, base.d, base.harmonics, base.g_offset, base.g_coef, base.h_offset, base.h_coef
    )
    assert not signals.check_periodicity(broken, [1.0], 32)


def test_periodicity_grid_size():
    with pytest.raises(InvalidParameter):
        signals.check_periodicity(signals.sine_signal(), [1.0], 1)


@pytest.mark.parametrize("name", list(all_families()))
@pytest.mark.parametrize("s", [0.0, 0.37, 2.9, 11.3])
@pytest.mark.parametrize("T", [0.6, 1.0, 2.3])
def test_finite_difference_suite(name, s, T):
    spec, theta = all_families()[name]
    der = signals.derivatives(spec, theta, T, s)
    tol = 1e-6 * (1 + abs(der.value))
    for i in range(spec.d):
        e = np.eye(spec.d)[i]
        g = fd(lambda x: signals.evaluate(spec, theta + x * e, T, s), 0.0)
        assert abs(der.grad_theta[i] - g) <= tol
    # far from s = 0 the T-derivatives grow like s / T^2; compare relatively
    dT = fd(lambda x: signals.evaluate(spec, theta, x, s), T)
    assert abs(der.dT - dT) <= tol + 1e-6 * abs(der.dT)
    d2T = fd(lambda x: signals.derivatives(spec, theta, x, s).dT, T)
    assert abs(der.d2T - d2T) <= 1e-6 * (1 + abs(der.d2T))


@pytest.mark.parametrize("name", list(all_families()))
def test_second_derivative_in_u(name):
    spec, theta = all_families()[name]
    u = np.linspace(0, 1, 17)
    np.testing.assert_allclose(
        spec.shape_du2(theta, u), fd(lambda x: spec.shape_du(theta, x), u), atol=1e-5 * (1 + 4 * np.pi**2 * 9)
    )
    np.testing.assert_allclose(
        spec.shape_du(theta, u), fd(lambda x: spec.shape(theta, x), u), atol=1e-6 * 10
    )


@settings(max_examples=60, deadline=None)
@given(
    s=st.floats(0, 50),
    T=st.floats(0.2, 5),
    theta=st.lists(st.floats(-3, 3), min_size=2, max_size=2),
)
def test_rescaled_signal_is_T_periodic(s, T, theta):
    from conftest import two_harmonic_fourier

    spec = two_harmonic_fourier()
    assert abs(signals.evaluate(spec, theta, T, s + T) - signals.evaluate(spec, theta, T, s)) <= 1e-12 * (1 + s / T) * 10


@settings(max_examples=60, deadline=None)
@given(
    a=st.floats(-5, 5),
    b=st.floats(-5, 5),
    t1=st.lists(st.floats(-3, 3), min_size=3, max_size=3),
    t2=st.lists(st.floats(-3, 3), min_size=3, max_size=3),
    s=st.floats(0, 20),
)
def test_linear_basis_is_linear_in_theta(a, b, t1, t2, s):
    spec = signals.orthonormal_sine_basis(3)
    t1, t2 = np.array(t1), np.array(t2)
    lhs = signals.evaluate(spec, a * t1 + b * t2, 1.3, s)
    rhs = a * signals.evaluate(spec, t1, 1.3, s) + b * signals.evaluate(spec, t2, 1.3, s)
    assert lhs == pytest.approx(rhs, abs=1e-12 * (1 + abs(a) + abs(b)) * 20)


def test_spec_validation():
    with pytest.raises(InvalidParameter):
        signals.SignalSpec.fourier([1, 1], [[1.0], [1.0]])
    with pytest.raises(InvalidParameter):
        signals.SignalSpec.fourier([1.5], [[1.0]])
    with pytest.raises(InvalidParameter):
        signals.SignalSpec("linear_basis", 1, [1], [0.5], [[1.0]], [0.0], [[0.0]])


def test_spec_round_trip(family):
    spec, theta = family
    again = signals.SignalSpec.from_dict(spec.to_dict())
    u = np.linspace(0, 1, 11)
    np.testing.assert_array_equal(again.shape(theta, u), spec.shape(theta, u))
    assert again.family == spec.family


def test_spec_is_immutable(sine):
    with pytest.raises(ValueError):
        sine.g_coef[0, 0] = 2.0
