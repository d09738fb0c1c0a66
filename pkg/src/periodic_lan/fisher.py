"""
Block Fisher matrix F_(theta,T)(t) and its time derivative.

With G the nu-Gram matrix of (grad_theta S_theta, S'_theta)::

    F(t)  = [[ t G_aa,              -t^2/(2T^2) G_ab ],
             [ -t^2/(2T^2) G_ba,     t^3/(3T^4) G_bb ]]
    F'(t) = [[ G_aa,                -t/T^2 G_ab      ],
             [ -t/T^2 G_ba,          t^2/T^4 G_bb    ]]
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import ergodic, signals
from .errors import InvalidParameter
from .sde import ConstantSigma, DiffusionSpec, PathRecord

S7_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class FisherMatrix:
    t: float
    F: np.ndarray
    Fprime: np.ndarray
    provenance: str  # "closed_form", "quadrature" or "path_estimate"

    @property
    def dim(self) -> int:
        return self.F.shape[0]


def block_scaling(gram: np.ndarray, T: float, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Apply the t, t^2, t^3 block prefactors to a nu-Gram matrix."""
    F = np.array(gram, dtype=float)
    Fp = np.array(gram, dtype=float)
    F[:-1, :-1] *= t
    F[:-1, -1] *= -(t**2) / (2 * T**2)
    F[-1, :-1] *= -(t**2) / (2 * T**2)
    F[-1, -1] *= t**3 / (3 * T**4)
    Fp[:-1, -1] *= -t / T**2
    Fp[-1, :-1] *= -t / T**2
    Fp[-1, -1] *= t**2 / T**4
    # a zero Gram entry times a negative prefactor would otherwise print as -0.0
    return F + 0.0, Fp + 0.0


def fisher_matrix(spec: signals.SignalSpec, theta, T: float, t: float = 1.0, sigma_const: float = 1.0):
    """Closed-form F(t) and F'(t) for constant volatility ``sigma_const``."""
    if not t > 0:
        raise InvalidParameter("t must be positive")
    if not T > 0:
        raise InvalidParameter("period T must be positive")
    if not sigma_const > 0:
        raise InvalidParameter("sigma_const must be positive")
    model = DiffusionSpec(sigma=ConstantSigma(sigma_const))
    gram, _ = ergodic.nu_gram(spec, theta, T, model=model)
    F, Fp = block_scaling(gram, T, t)
    return FisherMatrix(float(t), F, Fp, "closed_form")


def fisher_for_model(spec, theta, T, model: DiffusionSpec, t: float = 1.0, path: PathRecord | None = None):
    """Closed form when sigma is constant, otherwise the ergodic estimate from ``path``."""
    if model.sigma_is_constant:
        return fisher_matrix(spec, theta, T, t, model.sigma.c)
    gram, _ = ergodic.nu_gram(spec, theta, T, model=model, path=path)
    F, Fp = block_scaling(gram, T, t)
    return FisherMatrix(float(t), F, Fp, "path_estimate")


def check_S7(fm: FisherMatrix, tol: float = S7_TOL) -> bool:
    """True iff lambda_min(F') > tol * lambda_max(F')."""
    ev = np.linalg.eigvalsh(0.5 * (fm.Fprime + fm.Fprime.T))
    return bool(ev[-1] > 0 and ev[0] > tol * ev[-1])


def fisher_path_estimate(
    path: PathRecord, spec: signals.SignalSpec, theta, T: float, t: float = 1.0, n: float | None = None
) -> FisherMatrix:
    """Empirical F_n(t) = delta_n (sum over [0, tn) of Sdot Sdot^T / sigma^2 dt) delta_n.

    ``n`` defaults to the path horizon divided by t. F' is estimated from the
    k = 0 ergodic Gram on the same window.
    """
    if not t > 0:
        raise InvalidParameter("t must be positive")
    n = path.horizon / t if n is None else float(n)
    m = path.steps_until(t * n)
    s = np.arange(m) * path.dt
    sdot = signals.derivatives(spec, theta, T, s).stacked()
    w = path.model.sigma(path.xi[:m]) ** -2.0 * path.dt
    scale = local_scale_diag(n, spec.d)
    F = scale[:, None] * ((sdot.T * w) @ sdot) * scale[None, :]
    gram, _ = ergodic.nu_gram(spec, theta, T, path=path, t=t * n)
    _, Fp = block_scaling(gram, T, t)
    return FisherMatrix(float(t), F, Fp, "path_estimate")


def local_scale_diag(n: float, d: int) -> np.ndarray:
    return np.array([n**-0.5] * d + [n**-1.5])


def sqrt_psd(A: np.ndarray) -> np.ndarray:
    """Symmetric square root of a positive semidefinite matrix."""
    vals, vecs = np.linalg.eigh(0.5 * (A + A.T))
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


def labels(d: int) -> list[str]:
    return [f"theta{i + 1}" for i in range(d)] + ["T"]


def write_csv(fm: FisherMatrix, fh) -> None:
    """Rows ``matrix,row,theta1..thetad,T`` for F then F'."""
    names = labels(fm.dim - 1)
    writer = csv.writer(fh)
    writer.writerow(["matrix", "row"] + names)
    for tag, mat in (("F", fm.F), ("Fprime", fm.Fprime)):
        for name, row in zip(names, mat):
            writer.writerow([tag, name] + [repr(float(v) + 0.0) for v in row])
