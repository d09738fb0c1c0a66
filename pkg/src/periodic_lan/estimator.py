"""
Joint maximum-likelihood estimation of shape and period.

For an affine-in-theta signal S_theta(u) = c(u) + Phi(u) theta the
quasi-log-likelihood

    l(theta, T) = sum S/sigma^2 (d eta - b dt) - 1/2 sum S^2/sigma^2 dt

is quadratic in theta, so theta_hat(T) solves G(T) theta = v(T) and the
joint problem reduces to a one-dimensional search over T: a coarse grid
fine enough to resolve the O(T^2/n) ripples of the profile, followed by
golden-section refinement around the best grid point.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from . import fisher, signals
from .errors import BoundaryMaximum, InvalidParameter, SingularNormalEquations
from .montecarlo import run_replications
from .sde import DiffusionSpec, PathRecord, simulate_path

COND_LIMIT = 1e10
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
RESYNC = 256


def quasi_log_likelihood(
    path: PathRecord, model: DiffusionSpec, spec: signals.SignalSpec, theta, T: float, n: float | None = None
) -> float:
    """Parameter-dependent part of the log-density of the observed path."""
    if not T > 0:
        raise InvalidParameter("period T must be positive")
    m = path.n_steps if n is None else path.steps_until(n)
    x = path.xi[:m]
    S = signals.evaluate(spec, theta, T, np.arange(m) * path.dt)
    inv_var = model.sigma(x) ** -2.0
    innov = np.diff(path.xi[: m + 1]) - model.drift(x) * path.dt
    return float(np.dot(S * inv_var, innov) - 0.5 * np.dot(S * S, inv_var) * path.dt)


@numba.njit(cache=True, nogil=True, fastmath=True)
def _trig_moments(y, w, dt, omega):
    """B'y and B'WB for the basis B = [sin(omega t), cos(omega t)] on t_i = i dt.

    Phases are exact at the start of each chunk and advanced by rotation inside it.
    """
    l = omega.size
    L = 2 * l
    by = np.zeros(L)
    bwb = np.zeros((L, L))
    basis = np.empty((L, RESYNC))
    rs = np.sin(omega * dt)
    rc = np.cos(omega * dt)
    n = y.size
    for start in range(0, n, RESYNC):
        stop = min(start + RESYNC, n)
        width = stop - start
        for k in range(l):
            ph = omega[k] * (start * dt)
            sk = math.sin(ph)
            ck = math.cos(ph)
            for j in range(width):
                basis[k, j] = sk
                basis[l + k, j] = ck
                s_new = sk * rc[k] + ck * rs[k]
                ck = ck * rc[k] - sk * rs[k]
                sk = s_new
        for a in range(L):
            acc = 0.0
            for j in range(width):
                acc += basis[a, j] * y[start + j]
            by[a] += acc
            for b in range(a, L):
                acc = 0.0
                for j in range(width):
                    acc += basis[a, j] * basis[b, j] * w[start + j]
                bwb[a, b] += acc
    for a in range(L):
        for b in range(a):
            bwb[a, b] = bwb[b, a]
    return by, bwb


class ProfileObjective:
    """theta_hat(T) and the profiled quasi-log-likelihood for one observed path."""

    def __init__(self, path: PathRecord, model: DiffusionSpec, spec: signals.SignalSpec, n: float | None = None):
        m = path.n_steps if n is None else path.steps_until(n)
        x = path.xi[:m]
        inv_var = model.sigma(x) ** -2.0
        self.y = (np.diff(path.xi[: m + 1]) - model.drift(x) * path.dt) * inv_var
        self.w = inv_var * path.dt
        self.dt = path.dt
        self.n = m * path.dt
        self.spec = spec
        self.M = np.vstack([spec.g_coef, spec.h_coef])
        self.m0 = np.concatenate([spec.g_offset, spec.h_offset])

    def normal_equations(self, T: float):
        by, bwb = _trig_moments(self.y, self.w, self.dt, 2.0 * np.pi * self.spec.harmonics / T)
        G = self.M.T @ bwb @ self.M
        v = self.M.T @ (by - bwb @ self.m0)
        return G, v, by, bwb

    def theta_hat(self, T: float) -> np.ndarray:
        G, v, _, _ = self.normal_equations(T)
        return self._solve(G, v, T)

    def _solve(self, G, v, T):
        if G.shape == (1, 1):
            ok = np.isfinite(G[0, 0]) and G[0, 0] > 0
            if ok:
                return v / G[0, 0]
        else:
            ok = np.all(np.isfinite(G)) and np.linalg.cond(G) < COND_LIMIT
            if ok:
                return np.linalg.solve(G, v)
        raise SingularNormalEquations(f"G(T) is ill-conditioned at T = {T}")

    def __call__(self, T: float) -> float:
        G, v, by, bwb = self.normal_equations(T)
        theta = self._solve(G, v, T)
        coef = self.m0 + self.M @ theta
        return float(coef @ by - 0.5 * coef @ bwb @ coef)


def golden_section_max(f, a: float, b: float, tol: float) -> float:
    """Maximize a unimodal f on [a, b]; ties keep the left sub-interval."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return c if fc >= fd else d


def coarse_grid_size(n: float, T_lo: float, grid_points: int) -> int:
    return max(int(grid_points), int(math.ceil(4.0 * n / T_lo)))


@dataclass(eq=False)
class EstimationResult:
    theta_hat: np.ndarray
    T_hat: float
    n: float
    profile_curve: np.ndarray  # columns T, profiled log-likelihood
    stderr: np.ndarray
    loglik: float

    def write_profile_csv(self, fh) -> None:
        writer = csv.writer(fh)
        writer.writerow(["T", "profile_loglik"])
        for T, val in self.profile_curve:
            writer.writerow([repr(float(T)), repr(float(val))])


def fisher_stderr(spec, model, theta, T, n, path=None) -> np.ndarray:
    """delta_n diag(F^-1)^1/2 at (theta, T); NaN where F is singular."""
    try:
        if model.sigma_is_constant:
            F = fisher.fisher_matrix(spec, theta, T, 1.0, model.sigma.c).F
        else:
            F = fisher.fisher_path_estimate(path, spec, theta, T, 1.0, n).F
        cov = np.linalg.inv(F)
    except (np.linalg.LinAlgError, InvalidParameter):
        return np.full(spec.d + 1, np.nan)
    return fisher.local_scale_diag(n, spec.d) * np.sqrt(np.clip(np.diag(cov), 0.0, None))


def profile_mle(
    path: PathRecord,
    model: DiffusionSpec,
    spec: signals.SignalSpec,
    T_bracket: tuple[float, float],
    grid_points: int = 200,
    n: float | None = None,
) -> EstimationResult:
    """Joint MLE of (theta, T) by profiling theta out over the period bracket.

    A collapsed bracket (T_lo == T_hi) gives the known-period estimator.
    """
    T_lo, T_hi = map(float, T_bracket)
    if not 0 < T_lo <= T_hi:
        raise InvalidParameter("bracket must satisfy 0 < T_lo <= T_hi")
    obj = ProfileObjective(path, model, spec, n)
    n_eff = obj.n
    if T_lo == T_hi:
        T_hat = T_lo
        curve = np.array([[T_hat, obj(T_hat)]])
    else:
        count = coarse_grid_size(n_eff, T_lo, grid_points)
        grid = np.linspace(T_lo, T_hi, count + 1)
        values = np.array([obj(T) for T in grid])
        curve = np.column_stack([grid, values])
        j = int(np.argmax(values))
        if j == 0 or j == grid.size - 1:
            raise BoundaryMaximum(f"profile maximum at bracket end T = {grid[j]}")
        tol = max(1e-6 * n_eff**-1.5 * (T_hi - T_lo), 1e-10)
        T_hat = golden_section_max(obj, grid[j - 1], grid[j + 1], tol)
        if obj(T_hat) < values[j]:
            T_hat = float(grid[j])
    theta_hat = obj.theta_hat(T_hat)
    return EstimationResult(
        theta_hat=theta_hat,
        T_hat=float(T_hat),
        n=n_eff,
        profile_curve=curve,
        stderr=fisher_stderr(spec, model, theta_hat, T_hat, n_eff, path),
        loglik=obj(T_hat),
    )


@dataclass(eq=False)
class RateTable:
    """Per-n spread of the estimation errors and log-log slopes per component."""

    n_list: list
    components: list
    sd: np.ndarray  # (len(n_list), d + 1)
    slopes: dict
    intercepts: dict
    replications: int
    dropped: list
    degenerate: bool
    errors: list = field(default_factory=list, repr=False)  # per n: (kept, d + 1) arrays

    def write_csv(self, fh) -> None:
        writer = csv.writer(fh)
        writer.writerow(["n", "component", "sd", "slope", "intercept", "kept", "dropped"])
        for i, n in enumerate(self.n_list):
            kept = self.replications - self.dropped[i]
            for j, name in enumerate(self.components):
                slope = self.slopes[name]
                writer.writerow([
                    n, name, repr(float(self.sd[i, j])),
                    "" if slope is None else repr(slope),
                    "" if self.intercepts[name] is None else repr(self.intercepts[name]),
                    kept, self.dropped[i],
                ])


def fit_loglog_slope(n_list, sd) -> tuple[float, float]:
    """Least-squares slope and intercept of log(sd) against log(n)."""
    x = np.log(np.asarray(n_list, dtype=float))
    y = np.log(np.asarray(sd, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def rate_experiment(
    model: DiffusionSpec,
    spec: signals.SignalSpec,
    theta,
    T: float,
    n_list,
    replications: int,
    seed: int = 0,
    dt: float = 1e-2,
    T_bracket: tuple[float, float] | None = None,
    bracket_width: float = 0.05,
    grid_points: int = 200,
    workers: int | None = None,
    zero_noise: bool = False,
) -> RateTable:
    """Spread of (theta_hat - theta, T_hat - T) across n and its log-log slope.

    Replication r at every n uses the stream (seed, r), so paths are nested
    across n. Failed estimations are dropped and counted.
    """
    theta = spec.check_theta(theta)
    n_list = [float(n) for n in n_list]
    if len(n_list) < 3 or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise InvalidParameter("n_list must be strictly increasing with at least 3 entries")
    if T_bracket is None:
        T_bracket = (T * (1.0 - bracket_width), T * (1.0 + bracket_width))
    truth = np.concatenate([theta, [T]])

    errors, dropped = [], []
    for n in n_list:
        steps = int(round(n / dt))

        def one(r: int, n=n, steps=steps):
            dW = np.zeros(steps) if zero_noise else None
            path = simulate_path(model, spec, theta, T, n, dt, seed=seed, replication=r, dW=dW)
            try:
                est = profile_mle(path, model, spec, T_bracket, grid_points)
            except (BoundaryMaximum, SingularNormalEquations):
                return None
            return np.concatenate([est.theta_hat, [est.T_hat]]) - truth

        results = run_replications(one, replications, workers)
        kept = [e for e in results if e is not None]
        dropped.append(replications - len(kept))
        errors.append(np.array(kept).reshape(len(kept), spec.d + 1))

    sd = np.array([e.std(axis=0, ddof=1) if len(e) > 1 else np.full(spec.d + 1, np.nan) for e in errors])
    components = fisher.labels(spec.d)
    degenerate = bool(np.all(np.nan_to_num(sd) < 1e-12))
    slopes, intercepts = {}, {}
    for j, name in enumerate(components):
        col = sd[:, j]
        if degenerate or np.any(~np.isfinite(col)) or np.any(col <= 0):
            slopes[name] = intercepts[name] = None
        else:
            slopes[name], intercepts[name] = fit_loglog_slope(n_list, col)
    return RateTable(
        n_list=n_list,
        components=components,
        sd=sd,
        slopes=slopes,
        intercepts=intercepts,
        replications=int(replications),
        dropped=dropped,
        degenerate=degenerate,
        errors=errors,
    )
