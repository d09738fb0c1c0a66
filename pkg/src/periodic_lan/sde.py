"""
Euler-Maruyama simulation of

    d xi_t = [S_(theta,T)(t) + b(xi_t)] dt + sigma(xi_t) dW_t

on a uniform grid, keeping the Brownian increments that drove the path.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Mapping

import numba
import numpy as np

from . import signals
from .errors import InvalidModel, InvalidParameter, ResourceLimit
from .montecarlo import make_rng

MAX_STEPS = 10**9

_ZERO, _MEAN_REVERTING, _PIECEWISE = 0, 1, 2
_CONSTANT, _BOUNDED = 0, 1


# -- drift b ---------------------------------------------------------------


@dataclass(frozen=True)
class ZeroDrift:
    kind = "zero"

    def __call__(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def kernel_args(self):
        return _ZERO, np.zeros(1), np.zeros(0), np.zeros(1), np.zeros(1)

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class MeanReverting:
    """b(x) = -beta x."""

    beta: float
    kind = "mean_reverting"

    def __post_init__(self):
        if not self.beta > 0:
            raise InvalidModel("mean-reversion speed beta must be positive")

    def __call__(self, x):
        return -self.beta * np.asarray(x, dtype=float)

    def kernel_args(self):
        return _MEAN_REVERTING, np.array([self.beta]), np.zeros(0), np.zeros(1), np.zeros(1)

    def to_dict(self):
        return {"kind": self.kind, "beta": float(self.beta)}


@dataclass(frozen=True, eq=False)
class PiecewiseAffine:
    """b(x) = slopes[j] * x + intercepts[j] on [breakpoints[j-1], breakpoints[j]).

    ``breakpoints`` is strictly increasing of length m; there are m + 1 pieces.
    """

    breakpoints: tuple
    slopes: tuple
    intercepts: tuple
    kind = "piecewise_affine"

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float).ravel()
        sl = np.asarray(self.slopes, dtype=float).ravel()
        ic = np.asarray(self.intercepts, dtype=float).ravel()
        if np.any(np.diff(bp) <= 0):
            raise InvalidModel("breakpoints must be strictly increasing")
        if sl.size != bp.size + 1 or ic.size != bp.size + 1:
            raise InvalidModel("need len(breakpoints) + 1 slopes and intercepts")
        object.__setattr__(self, "breakpoints", tuple(bp))
        object.__setattr__(self, "slopes", tuple(sl))
        object.__setattr__(self, "intercepts", tuple(ic))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        j = np.searchsorted(np.asarray(self.breakpoints), x, side="right")
        return np.asarray(self.slopes)[j] * x + np.asarray(self.intercepts)[j]

    def kernel_args(self):
        return (
            _PIECEWISE,
            np.zeros(1),
            np.asarray(self.breakpoints),
            np.asarray(self.slopes),
            np.asarray(self.intercepts),
        )

    def to_dict(self):
        return {
            "kind": self.kind,
            "breakpoints": list(self.breakpoints),
            "slopes": list(self.slopes),
            "intercepts": list(self.intercepts),
        }


# -- volatility sigma ------------------------------------------------------


@dataclass(frozen=True)
class ConstantSigma:
    c: float = 1.0
    kind = "constant"

    def __post_init__(self):
        if not self.c > 0:
            raise InvalidModel("constant volatility must be positive")

    def __call__(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.c)

    @property
    def lower_bound(self):
        return self.c

    def kernel_args(self):
        return _CONSTANT, np.array([self.c, 0.0])

    def to_dict(self):
        return {"kind": self.kind, "c": float(self.c)}


@dataclass(frozen=True)
class BoundedPerturbation:
    """sigma(x) = c0 + amplitude / (1 + x^2), with |amplitude| < c0."""

    c0: float
    amplitude: float
    kind = "bounded_perturbation"

    def __post_init__(self):
        if not self.c0 - abs(self.amplitude) > 0:
            raise InvalidModel("sigma must be bounded away from zero: need c0 > |amplitude|")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.c0 + self.amplitude / (1.0 + x * x)

    @property
    def lower_bound(self):
        return self.c0 - abs(self.amplitude)

    def kernel_args(self):
        return _BOUNDED, np.array([self.c0, self.amplitude])

    def to_dict(self):
        return {"kind": self.kind, "c0": float(self.c0), "amplitude": float(self.amplitude)}


def drift_from_dict(cfg: Mapping):
    kind = cfg.get("kind", "zero")
    if kind == "zero":
        return ZeroDrift()
    if kind == "mean_reverting":
        return MeanReverting(float(cfg["beta"]))
    if kind == "piecewise_affine":
        return PiecewiseAffine(cfg["breakpoints"], cfg["slopes"], cfg["intercepts"])
    raise InvalidModel(f"unknown drift kind {kind!r}")


def sigma_from_dict(cfg: Mapping):
    kind = cfg.get("kind", "constant")
    if kind == "constant":
        return ConstantSigma(float(cfg.get("c", 1.0)))
    if kind == "bounded_perturbation":
        return BoundedPerturbation(float(cfg["c0"]), float(cfg["amplitude"]))
    raise InvalidModel(f"unknown sigma kind {kind!r}")


@dataclass(frozen=True)
class DiffusionSpec:
    drift: object = field(default_factory=ZeroDrift)
    sigma: object = field(default_factory=ConstantSigma)
    x0: float = 0.0

    @property
    def sigma_is_constant(self) -> bool:
        return isinstance(self.sigma, ConstantSigma)

    def to_dict(self) -> dict:
        return {"drift": self.drift.to_dict(), "sigma": self.sigma.to_dict(), "x0": float(self.x0)}

    @classmethod
    def from_dict(cls, cfg: Mapping) -> "DiffusionSpec":
        return cls(
            drift=drift_from_dict(cfg.get("drift", {})),
            sigma=sigma_from_dict(cfg.get("sigma", {})),
            x0=float(cfg.get("x0", 0.0)),
        )


def white_noise_model() -> DiffusionSpec:
    """b = 0, sigma = 1: the classical signal-in-white-noise setting."""
    return DiffusionSpec(ZeroDrift(), ConstantSigma(1.0), 0.0)


def ou_model(beta: float = 1.0, sigma: float = 1.0, x0: float = 0.0) -> DiffusionSpec:
    return DiffusionSpec(MeanReverting(beta), ConstantSigma(sigma), x0)


# -- paths -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PathRecord:
    """A simulated trajectory on t_i = i dt, i = 0..N, with its driving increments."""

    dt: float
    xi: np.ndarray
    dW: np.ndarray
    theta: np.ndarray
    T: float
    seed: int | None
    model: DiffusionSpec
    signal: signals.SignalSpec
    replication: int | None = None

    @property
    def n_steps(self) -> int:
        return self.dW.size

    @property
    def horizon(self) -> float:
        return self.n_steps * self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    def steps_until(self, t: float) -> int:
        """Number of grid steps covering [0, t]; raises if the path is too short."""
        m = int(round(t / self.dt))
        if m > self.n_steps or t <= 0:
            raise InvalidParameter(f"path horizon {self.horizon} does not cover t = {t}")
        return m

    def to_csv(self, fh) -> None:
        writer = csv.writer(fh)
        writer.writerow(["t", "xi", "dW"])
        t = self.times
        for i in range(self.n_steps):
            writer.writerow([repr(float(t[i])), repr(float(self.xi[i])), repr(float(self.dW[i]))])
        writer.writerow([repr(float(t[-1])), repr(float(self.xi[-1])), ""])


@numba.njit(cache=True, nogil=True)
def _euler(x0, S, dW, dt, drift_code, drift_par, bp, slopes, intercepts, sigma_code, sigma_par):
    n = dW.size
    xi = np.empty(n + 1)
    xi[0] = x0
    x = x0
    for i in range(n):
        if drift_code == 0:
            b = 0.0
        elif drift_code == 1:
            b = -drift_par[0] * x
        else:
            j = np.searchsorted(bp, x, side="right")
            b = slopes[j] * x + intercepts[j]
        if sigma_code == 0:
            s = sigma_par[0]
        else:
            s = sigma_par[0] + sigma_par[1] / (1.0 + x * x)
        x = x + (S[i] + b) * dt + s * dW[i]
        xi[i + 1] = x
    return xi


def n_steps_for(horizon: float, dt: float) -> int:
    if not dt > 0:
        raise InvalidParameter("dt must be positive")
    if not horizon > 0:
        raise InvalidParameter("horizon must be positive")
    ratio = horizon / dt
    if ratio > MAX_STEPS:
        raise ResourceLimit(f"{ratio:.3g} steps exceeds the budget of {MAX_STEPS}")
    return max(1, int(round(ratio)))


def simulate_path(
    model: DiffusionSpec,
    signal: signals.SignalSpec,
    theta,
    T: float,
    horizon: float,
    dt: float = 1e-3,
    seed: int | None = 0,
    replication: int | None = None,
    dW: np.ndarray | None = None,
    signal_values: np.ndarray | None = None,
) -> PathRecord:
    """Simulate one Euler-Maruyama path.

    The increments come from the stream derived from ``(seed, replication)``
    unless ``dW`` is given explicitly (e.g. zeros for a noiseless path, or
    coupled increments for refinement studies). ``signal_values`` may carry
    S(t_i) on the grid, precomputed once when many replications share it.
    """
    theta = signal.check_theta(theta)
    if not T > 0:
        raise InvalidParameter("period T must be positive")
    if not model.sigma.lower_bound > 0:
        raise InvalidModel("sigma must be bounded away from zero")
    n = n_steps_for(horizon, dt)
    if dW is None:
        dW = make_rng(seed, replication).standard_normal(n) * math.sqrt(dt)
    else:
        dW = np.asarray(dW, dtype=float).copy()
        if dW.shape != (n,):
            raise InvalidParameter(f"dW must have length {n}")
    if signal_values is None:
        S = signals.evaluate(signal, theta, T, np.arange(n) * dt)
    else:
        S = np.asarray(signal_values, dtype=float)
        if S.shape != (n,):
            raise InvalidParameter(f"signal_values must have length {n}")
    drift_args = model.drift.kernel_args()
    sigma_code, sigma_par = model.sigma.kernel_args()
    xi = _euler(float(model.x0), S, dW, float(dt), *drift_args, sigma_code, sigma_par)
    xi.setflags(write=False)
    dW.setflags(write=False)
    return PathRecord(
        dt=float(dt),
        xi=xi,
        dW=dW,
        theta=theta,
        T=float(T),
        seed=seed,
        model=model,
        signal=signal,
        replication=replication,
    )


def euler_residual(path: PathRecord) -> np.ndarray:
    """xi[i+1] - (xi[i] + (S(t_i) + b(xi[i])) dt + sigma(xi[i]) dW[i]); zero on Euler paths."""
    x = path.xi[:-1]
    S = signals.evaluate(path.signal, path.theta, path.T, np.arange(path.n_steps) * path.dt)
    step = x + (S + path.model.drift(x)) * path.dt + path.model.sigma(x) * path.dW
    return path.xi[1:] - step


def grid_chain(path: PathRecord, T: float | None = None) -> np.ndarray:
    """xi sampled at the grid index nearest to k T, k = 0..floor(horizon / T)."""
    T = path.T if T is None else float(T)
    if not T > 0:
        raise InvalidParameter("period T must be positive")
    if T > path.horizon * (1 + 1e-12):
        raise InvalidParameter(f"period {T} exceeds path horizon {path.horizon}")
    count = int(math.floor(path.horizon / T * (1 + 1e-12)))
    k = np.arange(count + 1)
    idx = np.floor(k * T / path.dt + 0.5).astype(np.int64)
    return path.xi[np.minimum(idx, path.n_steps)]
