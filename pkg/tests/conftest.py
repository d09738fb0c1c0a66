import numpy as np
import pytest

from periodic_lan import sde, signals


@pytest.fixture
def sine():
    """S_theta(u) = theta sin(2 pi u)."""
    return signals.sine_signal()


@pytest.fixture
def white_noise():
    return sde.white_noise_model()


@pytest.fixture
def ou():
    return sde.ou_model(beta=1.0, sigma=1.0, x0=0.0)


@pytest.fixture
def wobbly_sigma_ou():
    return sde.DiffusionSpec(sde.MeanReverting(1.0), sde.BoundedPerturbation(1.0, 0.5), 0.0)


def two_harmonic_fourier():
    """Affine coefficients with offsets and mixed sin/cos terms, d = 2."""
    return signals.SignalSpec.fourier(
        harmonics=[1, 3],
        g_coef=[[1.0, 0.2], [0.0, 0.5]],
        h_coef=[[0.3, 0.0], [-0.4, 1.0]],
        g_offset=[0.1, 0.0],
        h_offset=[0.0, 0.25],
    )


def all_families():
    return {
        "sine": (signals.sine_signal(), np.array([1.3])),
        "fourier2": (two_harmonic_fourier(), np.array([0.7, -1.1])),
        "basis3": (signals.orthonormal_sine_basis(3), np.array([1.0, -0.5, 0.25])),
        "sincos": (
            signals.SignalSpec.linear_basis([{1: (np.sqrt(2), 0.0)}, {2: (0.0, np.sqrt(2))}]),
            np.array([0.8, 0.6]),
        ),
    }


@pytest.fixture(params=list(all_families()))
def family(request):
    return all_families()[request.param]
