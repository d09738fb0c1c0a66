"""
Weighted ergodic time averages and nu-functionals.

Along a path, (k+1) t^-(k+1) int_0^t s^k f(s/T) / sigma^2(eta_s) ds converges to
nu[f] for any bounded 1-periodic f. When sigma is a constant c the limit is
c^-2 int_0^1 f(u) du, which is computed exactly for trigonometric polynomials.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import signals
from .errors import InvalidParameter, NeedsPathEstimate
from .sde import DiffusionSpec, PathRecord

PRIME = "prime"

SIMPSON_PANELS = 256


@dataclass(frozen=True)
class NuFunctional:
    value: float
    method: str  # "closed_form" or "path_average"
    k: int | None = None
    t: float | None = None


def weighted_time_average(
    path: PathRecord, f: Callable, k: int = 0, t: float | None = None, T: float | None = None
) -> float:
    """Left-point sum of (k+1) t^-(k+1) sum_i t_i^k f(t_i/T) / sigma^2(xi_i) dt."""
    if k not in (0, 1, 2):
        raise InvalidParameter(f"k must be 0, 1 or 2, got {k}")
    t = path.horizon if t is None else float(t)
    T = path.T if T is None else float(T)
    m = path.steps_until(t)
    ti = np.arange(m) * path.dt
    inv_var = path.model.sigma(path.xi[:m]) ** -2.0
    weights = ti**k * inv_var
    return float((k + 1) * t ** -(k + 1) * np.dot(weights, f(ti / T)) * path.dt)


def simpson_period_integral(f: Callable, panels: int = SIMPSON_PANELS) -> float:
    """Composite Simpson rule for int_0^1 f(u) du."""
    if panels % 2:
        panels += 1
    u = np.linspace(0.0, 1.0, panels + 1)
    w = np.ones(panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float(np.dot(w, f(u)) / (3.0 * panels))


def _fourier_pair(spec: signals.SignalSpec, theta, which):
    """Sin / cos coefficient vectors (length l) of d_theta_i S or S'."""
    if which == PRIME:
        return spec.derivative_fourier(theta)
    i = int(which)
    if not 0 <= i < spec.d:
        raise InvalidParameter(f"theta index {i} out of range for d = {spec.d}")
    spec.check_theta(theta)
    g, h = spec.grad_fourier()
    return g[:, i], h[:, i]


def _function(spec: signals.SignalSpec, theta, which) -> Callable:
    if which == PRIME:
        return lambda u: spec.shape_du(theta, u)
    i = int(which)
    return lambda u: spec.shape_grad(theta, u)[..., i]


def nu_inner_product(
    spec: signals.SignalSpec,
    theta,
    T: float,
    which: tuple,
    model: DiffusionSpec | None = None,
    path: PathRecord | None = None,
) -> NuFunctional:
    """<f, g>_nu for f, g among {d_theta_i S_theta (index i), S'_theta ("prime")}.

    With a path the value is its k = 0 ergodic average; otherwise sigma must be
    constant and the period integral is evaluated term by term.
    """
    if not T > 0:
        raise InvalidParameter("period T must be positive")
    a, b = which
    if path is not None:
        fa, fb = _function(spec, theta, a), _function(spec, theta, b)
        value = weighted_time_average(path, lambda u: fa(u) * fb(u), k=0, T=T)
        return NuFunctional(value, "path_average", k=0, t=path.horizon)
    if model is not None and not model.sigma_is_constant:
        raise NeedsPathEstimate("nu has no closed form for non-constant sigma; pass a path")
    c = 1.0 if model is None else model.sigma.c
    sa, ca = _fourier_pair(spec, theta, a)
    sb, cb = _fourier_pair(spec, theta, b)
    value = 0.5 * (np.dot(sa, sb) + np.dot(ca, cb)) / c**2
    return NuFunctional(float(value), "closed_form")


def nu_gram(
    spec: signals.SignalSpec,
    theta,
    T: float,
    model: DiffusionSpec | None = None,
    path: PathRecord | None = None,
    t: float | None = None,
) -> tuple[np.ndarray, str]:
    """(d+1) x (d+1) matrix of nu inner products of (grad_theta S, S')."""
    theta = spec.check_theta(theta)
    if path is not None:
        m = path.steps_until(path.horizon if t is None else t)
        ti = np.arange(m) * path.dt
        u = ti / T
        basis = np.column_stack([spec.shape_grad(theta, u), spec.shape_du(theta, u)])
        w = path.model.sigma(path.xi[:m]) ** -2.0 * path.dt
        return (basis.T * w) @ basis / (m * path.dt), "path_average"
    if model is not None and not model.sigma_is_constant:
        raise NeedsPathEstimate("nu has no closed form for non-constant sigma; pass a path")
    c = 1.0 if model is None else model.sigma.c
    g, h = spec.grad_fourier()
    sp, cp = spec.derivative_fourier(theta)
    sin = np.column_stack([g, sp])
    cos = np.column_stack([h, cp])
    return 0.5 * (sin.T @ sin + cos.T @ cos) / c**2, "closed_form"
