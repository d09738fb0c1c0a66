"""
Log-likelihood ratios, scores and the LAN expansion along simulated paths.

All stochastic integrals are left-point sums against the path's own
increments, so on an Euler path the five-term split

    Lambda_n = h'Delta_n - 1/2 h'F_n(1)h + R_n(1) - 1/2 U_n(1) - V_n(1)

is an exact algebraic identity of the discretised integrals.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy import stats

from . import fisher, signals
from .errors import InvalidParameter, S7Violation
from .montecarlo import run_replications
from .sde import DiffusionSpec, PathRecord, n_steps_for, simulate_path

KS_LEVEL = 0.01


@dataclass(frozen=True)
class LocalScale:
    """delta_n = diag(n^-1/2, ..., n^-1/2, n^-3/2)."""

    n: float
    d: int

    def __post_init__(self):
        if not self.n > 0:
            raise InvalidParameter("n must be positive")

    @property
    def diag(self) -> np.ndarray:
        return fisher.local_scale_diag(self.n, self.d)

    def localize(self, theta, T, h) -> tuple[np.ndarray, float]:
        """(theta_n, T_n) = (theta, T) + delta_n h."""
        step = self.diag * _check_h(h, self.d)
        return np.asarray(theta, dtype=float) + step[:-1], float(T) + step[-1]


def _check_h(h, d: int) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if h.ndim == 0:
        h = np.full(d + 1, float(h))
    if h.shape != (d + 1,):
        raise InvalidParameter(f"h must have length {d + 1}")
    return h


def _check_candidate(candidate):
    theta2, T2 = candidate
    if not T2 > 0:
        raise InvalidParameter("candidate period must be positive")
    return np.atleast_1d(np.asarray(theta2, dtype=float)), float(T2)


def _window(path: PathRecord, n: float | None) -> int:
    return path.n_steps if n is None else path.steps_until(n)


def log_likelihood_ratio_sim(path: PathRecord, spec: signals.SignalSpec, candidate, n: float | None = None) -> float:
    """Lambda for ``candidate`` against the path's true parameters, from the stored dW."""
    theta2, T2 = _check_candidate(candidate)
    m = _window(path, n)
    s = np.arange(m) * path.dt
    diff = signals.evaluate(spec, theta2, T2, s) - signals.evaluate(spec, path.theta, path.T, s)
    z = diff / path.model.sigma(path.xi[:m])
    return float(np.dot(z, path.dW[:m]) - 0.5 * np.dot(z, z) * path.dt)


def observed_noise(path: PathRecord, model: DiffusionSpec, spec: signals.SignalSpec, theta, T, m: int) -> np.ndarray:
    """Increments dW recovered from the observed path under parameters (theta, T)."""
    x = path.xi[:m]
    s = np.arange(m) * path.dt
    drift = signals.evaluate(spec, theta, T, s) + model.drift(x)
    return (np.diff(path.xi[: m + 1]) - drift * path.dt) / model.sigma(x)


def log_likelihood_ratio_obs(
    path: PathRecord, model: DiffusionSpec, spec: signals.SignalSpec, base, candidate, n: float | None = None
) -> float:
    """Lambda of ``candidate`` against ``base`` using only the observed xi increments."""
    theta1, T1 = _check_candidate(base)
    theta2, T2 = _check_candidate(candidate)
    m = _window(path, n)
    s = np.arange(m) * path.dt
    dw = observed_noise(path, model, spec, theta1, T1, m)
    diff = signals.evaluate(spec, theta2, T2, s) - signals.evaluate(spec, theta1, T1, s)
    z = diff / model.sigma(path.xi[:m])
    return float(np.dot(z, dw) - 0.5 * np.dot(z, z) * path.dt)


def score(path: PathRecord, spec: signals.SignalSpec, n: float) -> np.ndarray:
    """Delta_n = delta_n sum_{t_i < n} Sdot(t_i) / sigma(xi_i) dW_i."""
    m = path.steps_until(n)
    s = np.arange(m) * path.dt
    sdot = signals.derivatives(spec, path.theta, path.T, s).stacked()
    return LocalScale(n, spec.d).diag * (sdot.T @ (path.dW[:m] / path.model.sigma(path.xi[:m])))


@dataclass(frozen=True)
class LanTerms:
    """One path's expansion at t = 1."""

    lam: float
    delta: np.ndarray
    F_n: np.ndarray
    R: float
    R_integral: float
    U: float
    V: float

    def expansion(self, h) -> float:
        """h'Delta - 1/2 h'F_n h + R - 1/2 U - V using the stochastic-integral R."""
        h = np.asarray(h, dtype=float)
        return float(h @ self.delta - 0.5 * h @ self.F_n @ h + self.R_integral - 0.5 * self.U - self.V)


@numba.njit(cache=True, nogil=True)
def _lan_sums(xi, dW, dt, diff, sdot, linear, rest, sigma_code, sigma_par):
    """One pass over the grid: Lambda, raw score and Gram sums, R integral, U, V."""
    k, m = sdot.shape
    lam = 0.0
    r_int = 0.0
    u = 0.0
    v = 0.0
    score = np.zeros(k)
    gram = np.zeros((k, k))
    for i in range(m):
        if sigma_code == 0:
            sig = sigma_par[0]
        else:
            sig = sigma_par[0] + sigma_par[1] / (1.0 + xi[i] * xi[i])
        inv = 1.0 / sig
        dw = dW[i] * inv
        w = inv * inv * dt
        lam += diff[i] * dw - 0.5 * diff[i] * diff[i] * w
        r_int += rest[i] * dw
        u += rest[i] * rest[i] * w
        v += rest[i] * linear[i] * w
        for a in range(k):
            score[a] += sdot[a, i] * dw
            wa = sdot[a, i] * w
            for b in range(a, k):
                gram[a, b] += wa * sdot[b, i]
    for a in range(k):
        for b in range(a):
            gram[a, b] = gram[b, a]
    return lam, score, gram, r_int, u, v


class _Grid:
    """Deterministic signal quantities on the grid of [0, n), shared by all replications."""

    def __init__(self, spec, theta, T, h, n, dt):
        self.scale = LocalScale(n, spec.d)
        self.h = _check_h(h, spec.d)
        self.m = n_steps_for(n, dt)
        s = np.arange(self.m) * dt
        der = signals.derivatives(spec, theta, T, s)
        self.signal = der.value
        self.sdot = np.ascontiguousarray(der.stacked().T)
        theta_n, T_n = self.scale.localize(theta, T, self.h)
        self.diff = signals.evaluate(spec, theta_n, T_n, s) - der.value
        self.linear = (self.scale.diag * self.h) @ self.sdot
        self.rest = self.diff - self.linear
        self.dt = dt

    def terms(self, path: PathRecord) -> LanTerms:
        sigma_code, sigma_par = path.model.sigma.kernel_args()
        lam, raw, gram, R_int, U, V = _lan_sums(
            path.xi, path.dW, self.dt, self.diff, self.sdot, self.linear, self.rest, sigma_code, sigma_par
        )
        delta = self.scale.diag * raw
        F_n = self.scale.diag[:, None] * gram * self.scale.diag[None, :]
        h = self.h
        R = lam - float(h @ delta) + 0.5 * float(h @ F_n @ h) + 0.5 * U + V
        return LanTerms(lam, delta, F_n, R, R_int, U, V)


def lan_terms(path: PathRecord, spec: signals.SignalSpec, h, n: float) -> LanTerms:
    """Decompose Lambda_n for the localized alternative (theta, T) + delta_n h."""
    path.steps_until(n)
    return _Grid(spec, path.theta, path.T, h, n, path.dt).terms(path)


@dataclass(eq=False)
class LanReport:
    n: float
    replications: int
    h: np.ndarray
    scores: np.ndarray
    F_ref: fisher.FisherMatrix
    lam: np.ndarray
    quad: np.ndarray
    remainders: np.ndarray  # columns R (residual form), R (integral), U, V
    identity_error: np.ndarray
    tests: dict = field(default_factory=dict)

    @property
    def residual(self) -> np.ndarray:
        return self.lam - self.quad

    def write_csv(self, fh) -> None:
        d1 = self.scores.shape[1]
        names = fisher.labels(d1 - 1)
        writer = csv.writer(fh)
        writer.writerow(
            ["replication"] + [f"score_{x}" for x in names]
            + ["lambda", "quad", "residual", "R", "R_integral", "U", "V"]
        )
        for r in range(self.replications):
            row = list(self.scores[r]) + [self.lam[r], self.quad[r], self.residual[r]] + list(self.remainders[r])
            writer.writerow([r] + [repr(float(v) + 0.0) for v in row])

    def summary(self) -> dict:
        return {
            "n": self.n,
            "replications": self.replications,
            "h": self.h.tolist(),
            "F_ref": self.F_ref.F.tolist(),
            "F_ref_provenance": self.F_ref.provenance,
            "tests": self.tests,
        }

    def write_json(self, fh, metadata: dict | None = None) -> None:
        out = self.summary()
        if metadata is not None:
            out["metadata"] = metadata
        json.dump(out, fh, indent=2, sort_keys=True)
        fh.write("\n")


def covariance_error(scores: np.ndarray, F: np.ndarray) -> float:
    """Operator-norm relative error of the empirical score covariance against F."""
    cov = np.cov(scores, rowvar=False, ddof=1).reshape(F.shape)
    return float(np.linalg.norm(cov - F, 2) / np.linalg.norm(F, 2))


def ks_against_fisher(scores: np.ndarray, F: np.ndarray, level: float = KS_LEVEL) -> list[dict]:
    """One-sample KS of each score component against N(0, F_ii)."""
    reps = scores.shape[0]
    critical = float(stats.kstwo.ppf(1.0 - level, reps))
    out = []
    for i in range(scores.shape[1]):
        res = stats.kstest(scores[:, i] / np.sqrt(F[i, i]), "norm")
        out.append(
            {
                "statistic": float(res.statistic),
                "pvalue": float(res.pvalue),
                "critical_value": critical,
                "passed": bool(res.statistic < critical),
            }
        )
    return out


def lan_report(
    model: DiffusionSpec,
    spec: signals.SignalSpec,
    theta,
    T: float,
    h,
    n: float,
    replications: int,
    dt: float = 1e-3,
    seed: int = 0,
    workers: int | None = None,
    reference_n: float | None = None,
) -> LanReport:
    """Monte Carlo check of the LAN expansion at the localized alternative delta_n h.

    For non-constant sigma the reference Fisher matrix is the path estimate
    F_m(1) on one extra path of length ``reference_n`` (default max(10 n, 2000)).
    """
    theta = spec.check_theta(theta)
    h = _check_h(h, spec.d)
    if replications < 1:
        raise InvalidParameter("replications must be positive")
    if model.sigma_is_constant:
        F_ref = fisher.fisher_matrix(spec, theta, T, 1.0, model.sigma.c)
    else:
        ref_n = max(10 * n, 2000.0) if reference_n is None else float(reference_n)
        ref = simulate_path(model, spec, theta, T, ref_n, dt, seed=seed, replication=2**31)
        F_ref = fisher.fisher_path_estimate(ref, spec, theta, T, 1.0, ref_n)
    if not fisher.check_S7(F_ref):
        raise S7Violation(f"F' is singular at theta={theta.tolist()}, T={T}")

    grid = _Grid(spec, theta, T, h, n, dt)

    def one(r: int) -> LanTerms:
        path = simulate_path(model, spec, theta, T, n, dt, seed=seed, replication=r, signal_values=grid.signal)
        return grid.terms(path)

    results = run_replications(one, replications, workers)
    scores = np.array([t.delta for t in results])
    lam = np.array([t.lam for t in results])
    F = F_ref.F
    quad = scores @ h - 0.5 * float(h @ F @ h)
    remainders = np.array([[t.R, t.R_integral, t.U, t.V] for t in results])
    identity_error = np.array([abs(t.lam - t.expansion(h)) for t in results])

    residual = np.abs(lam - quad)
    tests = {
        "ks": ks_against_fisher(scores, F) if replications > 1 else [],
        "covariance_rel_error": covariance_error(scores, F) if replications > 1 else None,
        "score_mean_z": (
            (scores.mean(axis=0) / (scores.std(axis=0, ddof=1) / np.sqrt(replications))).tolist()
            if replications > 1 else None
        ),
        "residual_quantiles": {
            str(q): float(np.quantile(residual, q)) for q in (0.5, 0.9, 0.99)
        },
        "max_identity_error": float(identity_error.max()),
        "mean_U": float(remainders[:, 2].mean()),
    }
    return LanReport(
        n=float(n),
        replications=int(replications),
        h=h,
        scores=scores,
        F_ref=F_ref,
        lam=lam,
        quad=quad,
        remainders=remainders,
        identity_error=identity_error,
        tests=tests,
    )
