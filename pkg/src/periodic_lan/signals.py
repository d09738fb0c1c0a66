"""
Parametric 1-periodic signal families.

Every family is a trigonometric polynomial whose coefficients are affine in
the shape parameter theta::

    S_theta(u) = sum_k g_k(theta) sin(2 pi k u) + h_k(theta) cos(2 pi k u)
    g = g_offset + g_coef @ theta,   h = h_offset + h_coef @ theta

The rescaled signal is S_(theta,T)(s) = S_theta(s / T). All derivatives in
s, theta and T are evaluated in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidParameter

TWO_PI = 2.0 * np.pi

FAMILIES = ("fourier", "linear_basis")


def _frozen(a, shape=None) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if shape is not None:
        arr = arr.reshape(shape)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SignalSpec:
    """Affine-in-theta trigonometric signal family.

    Attributes
    ----------
    family : "fourier" or "linear_basis"
    d : dimension of theta
    harmonics : (l,) distinct positive integers k
    g_offset, h_offset : (l,) constant parts of the sin / cos coefficients
    g_coef, h_coef : (l, d) linear parts of the sin / cos coefficients

    For ``linear_basis`` the offsets are zero and column ``i`` of
    ``(g_coef, h_coef)`` holds the Fourier coefficients of the basis
    function phi_i, so that S_theta = sum_i theta_i phi_i.
    """

    family: str
    d: int
    harmonics: np.ndarray
    g_offset: np.ndarray
    g_coef: np.ndarray
    h_offset: np.ndarray
    h_coef: np.ndarray

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidParameter(f"unknown signal family {self.family!r}")
        d = int(self.d)
        if d < 1:
            raise InvalidParameter("d must be a positive integer")
        k = np.asarray(self.harmonics, dtype=float).ravel()
        if k.size == 0:
            raise InvalidParameter("at least one harmonic is required")
        if np.any(k < 1) or np.any(k != np.round(k)):
            raise InvalidParameter("harmonics must be positive integers")
        if np.unique(k).size != k.size:
            raise InvalidParameter("harmonics must be distinct")
        l = k.size
        try:
            fields = {
                "harmonics": _frozen(k),
                "g_offset": _frozen(self.g_offset, (l,)),
                "h_offset": _frozen(self.h_offset, (l,)),
                "g_coef": _frozen(self.g_coef, (l, d)),
                "h_coef": _frozen(self.h_coef, (l, d)),
            }
        except ValueError as exc:
            raise InvalidParameter(f"coefficient shape mismatch: {exc}") from None
        if self.family == "linear_basis" and (
            np.any(fields["g_offset"]) or np.any(fields["h_offset"])
        ):
            raise InvalidParameter("linear_basis signals carry no offsets")
        object.__setattr__(self, "d", d)
        for name, value in fields.items():
            object.__setattr__(self, name, value)

    # -- constructors -----------------------------------------------------

    @classmethod
    def fourier(cls, harmonics, g_coef, h_coef=None, g_offset=None, h_offset=None):
        harmonics = np.atleast_1d(np.asarray(harmonics, dtype=float))
        g_coef = np.atleast_2d(np.asarray(g_coef, dtype=float))
        if g_coef.shape[0] != harmonics.size:
            g_coef = g_coef.reshape(harmonics.size, -1)
        l, d = g_coef.shape
        return cls(
            family="fourier",
            d=d,
            harmonics=harmonics,
            g_offset=np.zeros(l) if g_offset is None else g_offset,
            g_coef=g_coef,
            h_offset=np.zeros(l) if h_offset is None else h_offset,
            h_coef=np.zeros((l, d)) if h_coef is None else h_coef,
        )

    @classmethod
    def linear_basis(cls, basis: Sequence[Mapping[int, tuple[float, float]]]):
        """Build S_theta = sum_i theta_i phi_i from Fourier-polynomial basis functions.

        ``basis[i]`` maps harmonic k to the pair (sin coefficient, cos coefficient)
        of phi_i.
        """
        if len(basis) == 0:
            raise InvalidParameter("empty basis")
        harmonics = sorted({int(k) for phi in basis for k in phi})
        index = {k: j for j, k in enumerate(harmonics)}
        l, d = len(harmonics), len(basis)
        g = np.zeros((l, d))
        h = np.zeros((l, d))
        for i, phi in enumerate(basis):
            for k, (a, b) in phi.items():
                g[index[int(k)], i] = a
                h[index[int(k)], i] = b
        return cls(
            family="linear_basis",
            d=d,
            harmonics=np.array(harmonics, dtype=float),
            g_offset=np.zeros(l),
            g_coef=g,
            h_offset=np.zeros(l),
            h_coef=h,
        )

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "harmonics": [int(k) for k in self.harmonics],
            "g_offset": self.g_offset.tolist(),
            "g_coef": self.g_coef.tolist(),
            "h_offset": self.h_offset.tolist(),
            "h_coef": self.h_coef.tolist(),
        }

    @classmethod
    def from_dict(cls, cfg: Mapping) -> "SignalSpec":
        try:
            g_coef = np.atleast_2d(np.asarray(cfg["g_coef"], dtype=float))
            harmonics = cfg["harmonics"]
            l = len(harmonics)
            d = g_coef.size // max(l, 1)
            return cls(
                family=cfg.get("family", "fourier"),
                d=d,
                harmonics=harmonics,
                g_offset=cfg.get("g_offset", [0.0] * l),
                g_coef=g_coef,
                h_offset=cfg.get("h_offset", [0.0] * l),
                h_coef=cfg.get("h_coef", np.zeros((l, d))),
            )
        except KeyError as exc:
            raise InvalidParameter(f"signal config is missing {exc}") from None

    # -- shape function S_theta and its derivatives ---------------------------

    def check_theta(self, theta) -> np.ndarray:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.shape != (self.d,):
            raise InvalidParameter(f"theta must have length {self.d}, got shape {theta.shape}")
        return theta

    def coefficients(self, theta) -> tuple[np.ndarray, np.ndarray]:
        theta = self.check_theta(theta)
        return self.g_offset + self.g_coef @ theta, self.h_offset + self.h_coef @ theta

    def _trig(self, u):
        phase = TWO_PI * np.multiply.outer(np.asarray(u, dtype=float), self.harmonics)
        return np.sin(phase), np.cos(phase)

    def shape(self, theta, u):
        g, h = self.coefficients(theta)
        sin, cos = self._trig(u)
        return sin @ g + cos @ h

    def shape_du(self, theta, u):
        g, h = self.coefficients(theta)
        sin, cos = self._trig(u)
        w = TWO_PI * self.harmonics
        return cos @ (w * g) - sin @ (w * h)

    def shape_du2(self, theta, u):
        g, h = self.coefficients(theta)
        sin, cos = self._trig(u)
        w2 = (TWO_PI * self.harmonics) ** 2
        return -(sin @ (w2 * g) + cos @ (w2 * h))

    def shape_grad(self, theta, u):
        """Gradient in theta; trailing axis has length d."""
        self.check_theta(theta)
        sin, cos = self._trig(u)
        return sin @ self.g_coef + cos @ self.h_coef

    # -- Fourier coefficients used for exact period integrals ----------------

    def grad_fourier(self) -> tuple[np.ndarray, np.ndarray]:
        """Sin / cos coefficients of each d_theta_i S_theta, shape (l, d)."""
        return self.g_coef, self.h_coef

    def derivative_fourier(self, theta) -> tuple[np.ndarray, np.ndarray]:
        """Sin / cos coefficients of S'_theta, shape (l,)."""
        g, h = self.coefficients(theta)
        w = TWO_PI * self.harmonics
        return -w * h, w * g


def sine_signal(amplitude_harmonic: int = 1) -> SignalSpec:
    """S_theta(u) = theta sin(2 pi k u) with scalar theta."""
    return SignalSpec.fourier([amplitude_harmonic], [[1.0]])


def orthonormal_sine_basis(d: int) -> SignalSpec:
    """phi_i(u) = sqrt(2) sin(2 pi i u), i = 1..d (orthonormal in L2(0,1))."""
    return SignalSpec.linear_basis([{i: (np.sqrt(2.0), 0.0)} for i in range(1, d + 1)])


@dataclass(frozen=True)
class SignalDerivatives:
    """Rescaled signal S_(theta,T)(s) with its theta- and T-derivatives.

    ``grad_theta`` has a trailing axis of length d; the other fields broadcast
    like ``s``.
    """

    value: np.ndarray
    grad_theta: np.ndarray
    dT: np.ndarray
    d2T: np.ndarray

    def stacked(self) -> np.ndarray:
        """(grad_theta, dT) stacked along the trailing axis, length d + 1."""
        return np.concatenate([self.grad_theta, np.asarray(self.dT)[..., None]], axis=-1)


def _check_period(T) -> float:
    T = float(T)
    if not T > 0:
        raise InvalidParameter(f"period T must be positive, got {T}")
    return T


def evaluate(spec: SignalSpec, theta, T, s):
    """S_(theta,T)(s) = S_theta(s/T)."""
    T = _check_period(T)
    return spec.shape(theta, np.asarray(s, dtype=float) / T)


def derivatives(spec: SignalSpec, theta, T, s) -> SignalDerivatives:
    T = _check_period(T)
    s = np.asarray(s, dtype=float)
    u = s / T
    g, h = spec.coefficients(theta)
    sin, cos = spec._trig(u)
    w = TWO_PI * spec.harmonics
    d1 = cos @ (w * g) - sin @ (w * h)
    d2 = -(sin @ (w * w * g) + cos @ (w * w * h))
    return SignalDerivatives(
        value=sin @ g + cos @ h,
        grad_theta=sin @ spec.g_coef + cos @ spec.h_coef,
        dT=-(s / T**2) * d1,
        d2T=(s**2 / T**4) * d2 + (2.0 * s / T**3) * d1,
    )


def check_periodicity(spec: SignalSpec, theta, grid_size: int = 257, tol: float = 1e-12) -> bool:
    """True iff max |S_theta(u + 1) - S_theta(u)| <= tol over a grid on [0, 1]."""
    if grid_size < 2:
        raise InvalidParameter("grid_size must be at least 2")
    u = np.linspace(0.0, 1.0, grid_size)
    gap = np.abs(spec.shape(theta, u + 1.0) - spec.shape(theta, u))
    return bool(np.max(gap) <= tol)
