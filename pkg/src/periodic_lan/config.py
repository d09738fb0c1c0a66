"""Experiment configuration: YAML in, validated dataclass out, and back."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np
import yaml

from .errors import InvalidModel, InvalidParameter
from .sde import DiffusionSpec
from .signals import SignalSpec

DEFAULTS: dict[str, Any] = {
    "model": {"drift": {"kind": "zero"}, "sigma": {"kind": "constant", "c": 1.0}, "x0": 0.0},
    "signal": {
        "family": "fourier",
        "harmonics": [1],
        "g_offset": [0.0],
        "g_coef": [[1.0]],
        "h_offset": [0.0],
        "h_coef": [[0.0]],
    },
    "theta": [1.0],
    "T": 1.0,
    "h": None,
    "n": 100.0,
    "n_list": [50.0, 100.0, 200.0, 400.0],
    "replications": 100,
    "dt": 1e-3,
    "seed": 0,
    "output_dir": "output",
    "horizon": None,
    "T_bracket": None,
    "grid_points": 200,
    "k": [0, 1, 2],
}


@dataclass(eq=False)
class ExperimentConfig:
    model: DiffusionSpec
    signal: SignalSpec
    theta: np.ndarray
    T: float
    h: np.ndarray
    n: float
    n_list: list
    replications: int
    dt: float
    seed: int
    output_dir: str
    horizon: float
    T_bracket: tuple
    grid_points: int
    k: list = field(default_factory=lambda: [0, 1, 2])

    @classmethod
    def from_dict(cls, raw: Mapping | None) -> "ExperimentConfig":
        raw = dict(raw or {})
        unknown = set(raw) - set(DEFAULTS)
        if unknown:
            raise InvalidParameter(f"unknown config keys: {sorted(unknown)}")
        cfg = {**DEFAULTS, **raw}
        try:
            model = DiffusionSpec.from_dict(cfg["model"])
            signal = SignalSpec.from_dict(cfg["signal"])
        except (TypeError, ValueError, KeyError) as exc:
            if isinstance(exc, (InvalidParameter, InvalidModel)):
                raise
            raise InvalidParameter(f"malformed model or signal block: {exc}") from None
        theta = signal.check_theta(cfg["theta"])
        T = _positive(cfg["T"], "T")
        h = np.zeros(signal.d + 1) if cfg["h"] is None else np.asarray(cfg["h"], dtype=float)
        if h.ndim == 0:
            h = np.full(signal.d + 1, float(h))
        if h.shape != (signal.d + 1,):
            raise InvalidParameter(f"h must have length {signal.d + 1}")
        n = _positive(cfg["n"], "n")
        n_list = [_positive(v, "n_list entry") for v in cfg["n_list"]]
        replications = int(cfg["replications"])
        if replications < 1:
            raise InvalidParameter("replications must be positive")
        dt = _positive(cfg["dt"], "dt")
        horizon = n if cfg["horizon"] is None else _positive(cfg["horizon"], "horizon")
        if cfg["T_bracket"] is None:
            bracket = (0.95 * T, 1.05 * T)
        else:
            bracket = tuple(float(v) for v in cfg["T_bracket"])
            if len(bracket) != 2 or not 0 < bracket[0] <= bracket[1]:
                raise InvalidParameter("T_bracket must be [T_lo, T_hi] with 0 < T_lo <= T_hi")
        ks = cfg["k"] if isinstance(cfg["k"], list) else [cfg["k"]]
        if any(int(k) not in (0, 1, 2) for k in ks):
            raise InvalidParameter("k must be drawn from {0, 1, 2}")
        grid_points = int(cfg["grid_points"])
        if grid_points < 3:
            raise InvalidParameter("grid_points must be at least 3")
        return cls(
            model=model,
            signal=signal,
            theta=theta,
            T=T,
            h=h,
            n=n,
            n_list=n_list,
            replications=replications,
            dt=dt,
            seed=int(cfg["seed"]),
            output_dir=str(cfg["output_dir"]),
            horizon=horizon,
            T_bracket=bracket,
            grid_points=grid_points,
            k=[int(k) for k in ks],
        )

    def to_dict(self) -> dict:
        """Plain-data echo with every default made explicit."""
        return {
            "model": self.model.to_dict(),
            "signal": self.signal.to_dict(),
            "theta": self.theta.tolist(),
            "T": float(self.T),
            "h": self.h.tolist(),
            "n": float(self.n),
            "n_list": [float(v) for v in self.n_list],
            "replications": int(self.replications),
            "dt": float(self.dt),
            "seed": int(self.seed),
            "output_dir": self.output_dir,
            "horizon": float(self.horizon),
            "T_bracket": [float(v) for v in self.T_bracket],
            "grid_points": int(self.grid_points),
            "k": list(self.k),
        }


def _positive(value, name: str) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise InvalidParameter(f"{name} must be a number") from None
    if not value > 0:
        raise InvalidParameter(f"{name} must be positive")
    return value


def loads(text: str) -> ExperimentConfig:
    raw = yaml.safe_load(text)
    if raw is not None and not isinstance(raw, Mapping):
        raise InvalidParameter("config must be a mapping")
    return ExperimentConfig.from_dict(raw)


def dumps(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)


def load(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
