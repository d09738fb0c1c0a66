"""
Command-line experiment runner.

    periodic-lan SUBCOMMAND [--config FILE] [options]

Subcommands: simulate, ergodic-check, fisher, lan-check, estimate, rates.
Artifacts go to the configured output directory (overridden by the
PERIODIC_LAN_OUTPUT_DIR environment variable, then by --output-dir).

Exit codes: 0 success, 2 validation error, 3 statistical check failed under
--assert, 64 unknown subcommand, 66 unreadable config.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import config as config_mod
from . import ergodic, estimator, fisher, lan, sde
from .errors import (
    BoundaryMaximum,
    InvalidModel,
    InvalidParameter,
    NeedsPathEstimate,
    ResourceLimit,
    S7Violation,
    SingularNormalEquations,
)
from .montecarlo import default_workers

SUBCOMMANDS = ("simulate", "ergodic-check", "fisher", "lan-check", "estimate", "rates")
OUTPUT_ENV = "PERIODIC_LAN_OUTPUT_DIR"

EX_OK, EX_VALIDATION, EX_CHECK_FAILED, EX_USAGE, EX_NOINPUT = 0, 2, 3, 64, 66

ERGODIC_REL_TOL = 0.05
COV_REL_TOL = 0.15
T_SLOPE, T_SLOPE_TOL = -1.5, 0.15
THETA_SLOPE, THETA_SLOPE_TOL = -0.5, 0.1

USAGE = f"usage: periodic-lan {{{','.join(SUBCOMMANDS)}}} [--config FILE] [options]"


def build_parser(command: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog=f"periodic-lan {command}")
    p.add_argument("--config", help="YAML experiment config")
    p.add_argument("--output-dir")
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--replications", type=int)
    p.add_argument("--h", help="comma-separated local direction, or one value for all components")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    p.add_argument("--assert", dest="check", action="store_true", help="exit 3 if a statistical check fails")
    return p


def _load_config(args) -> config_mod.ExperimentConfig:
    raw = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh) or {}
        if not isinstance(raw, dict):
            raise InvalidParameter("config must be a mapping")
    if args.n is not None:
        raw["n"] = args.n
        if "horizon" not in raw:
            raw["horizon"] = None
    if args.dt is not None:
        raw["dt"] = args.dt
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.replications is not None:
        raw["replications"] = args.replications
    if args.h is not None:
        parts = [float(v) for v in args.h.split(",")]
        raw["h"] = parts[0] if len(parts) == 1 else parts
    cfg = config_mod.ExperimentConfig.from_dict(raw)
    if os.environ.get(OUTPUT_ENV):
        cfg.output_dir = os.environ[OUTPUT_ENV]
    if args.output_dir:
        cfg.output_dir = args.output_dir
    return cfg


def _metadata() -> dict:
    return {"generated_at": datetime.datetime.now(datetime.timezone.utc).isoformat()}


def _write_json(path: Path, payload: dict) -> None:
    payload = dict(payload, metadata=_metadata())
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_simulate(cfg, args, out: Path) -> int:
    path = sde.simulate_path(cfg.model, cfg.signal, cfg.theta, cfg.T, cfg.horizon, cfg.dt, seed=cfg.seed)
    with open(out / "path.csv", "w", newline="", encoding="utf-8") as fh:
        path.to_csv(fh)
    chain = sde.grid_chain(path)
    print(f"simulate: {path.n_steps} steps, xi[N]={path.xi[-1]:.6g}, grid chain length {chain.size}")
    return EX_OK


def _cmd_ergodic(cfg, args, out: Path) -> int:
    path = sde.simulate_path(cfg.model, cfg.signal, cfg.theta, cfg.T, cfg.horizon, cfg.dt, seed=cfg.seed)
    theta, spec = cfg.theta, cfg.signal
    funcs = [lambda u, i=i: spec.shape_grad(theta, u)[..., i] for i in range(spec.d)]
    funcs.append(lambda u: spec.shape_du(theta, u))
    grams = {}
    for k in cfg.k:
        grams[k] = np.array(
            [[ergodic.weighted_time_average(path, lambda u, a=a, b=b: a(u) * b(u), k=k) for b in funcs] for a in funcs]
        )
    scale = max(np.max(np.abs(g)) for g in grams.values())
    if cfg.model.sigma_is_constant:
        reference, _ = ergodic.nu_gram(spec, theta, cfg.T, model=cfg.model)
        ref_name = "closed_form"
    else:
        reference = grams[cfg.k[0]]
        ref_name = f"k={cfg.k[0]}"
    deviation = {str(k): float(np.max(np.abs(g - reference)) / scale) for k, g in grams.items()}
    passed = all(v <= ERGODIC_REL_TOL for v in deviation.values())
    _write_json(
        out / "ergodic.json",
        {
            "horizon": path.horizon,
            "averages": {str(k): g.tolist() for k, g in grams.items()},
            "reference": ref_name,
            "reference_value": np.asarray(reference).tolist(),
            "relative_deviation": deviation,
            "passed": passed,
        },
    )
    print(f"ergodic-check: max relative deviation {max(deviation.values()):.3g} vs {ref_name}")
    return EX_CHECK_FAILED if args.check and not passed else EX_OK


def _cmd_fisher(cfg, args, out: Path) -> int:
    if cfg.model.sigma_is_constant:
        fm = fisher.fisher_matrix(cfg.signal, cfg.theta, cfg.T, 1.0, cfg.model.sigma.c)
    else:
        path = sde.simulate_path(cfg.model, cfg.signal, cfg.theta, cfg.T, cfg.horizon, cfg.dt, seed=cfg.seed)
        fm = fisher.fisher_path_estimate(path, cfg.signal, cfg.theta, cfg.T, 1.0)
    with open(out / "fisher.csv", "w", newline="", encoding="utf-8") as fh:
        fisher.write_csv(fm, fh)
    s7 = fisher.check_S7(fm)
    diag = ", ".join(f"{v:.6g}" for v in np.diag(fm.F))
    print(f"fisher: {fm.provenance}, diag(F)=[{diag}], S7 {'holds' if s7 else 'FAILS'}")
    return EX_OK


def _cmd_lan(cfg, args, out: Path) -> int:
    report = lan.lan_report(
        cfg.model, cfg.signal, cfg.theta, cfg.T, cfg.h, cfg.n, cfg.replications, cfg.dt, cfg.seed, args.threads
    )
    with open(out / "lan.csv", "w", newline="", encoding="utf-8") as fh:
        report.write_csv(fh)
    with open(out / "lan_summary.json", "w", encoding="utf-8") as fh:
        report.write_json(fh, metadata=_metadata())
    tests = report.tests
    ks_ok = all(c["passed"] for c in tests["ks"])
    cov = tests["covariance_rel_error"]
    passed = ks_ok and (cov is None or cov < COV_REL_TOL)
    cov_txt = "n/a" if cov is None else f"{cov:.3g}"
    print(
        f"lan-check: n={cfg.n:g}, {report.replications} replications, cov error {cov_txt}, "
        f"KS {'pass' if ks_ok else 'FAIL'}, median |Lambda - quad| {tests['residual_quantiles']['0.5']:.3g}"
    )
    return EX_CHECK_FAILED if args.check and not passed else EX_OK


def _cmd_estimate(cfg, args, out: Path) -> int:
    path = sde.simulate_path(cfg.model, cfg.signal, cfg.theta, cfg.T, cfg.n, cfg.dt, seed=cfg.seed)
    est = estimator.profile_mle(path, cfg.model, cfg.signal, cfg.T_bracket, cfg.grid_points)
    with open(out / "profile.csv", "w", newline="", encoding="utf-8") as fh:
        est.write_profile_csv(fh)
    _write_json(
        out / "estimate.json",
        {
            "theta_hat": est.theta_hat.tolist(),
            "T_hat": est.T_hat,
            "stderr": est.stderr.tolist(),
            "n": est.n,
            "loglik": est.loglik,
        },
    )
    print(f"estimate: theta_hat={np.array2string(est.theta_hat, precision=6)}, T_hat={est.T_hat:.8g}")
    return EX_OK


def _cmd_rates(cfg, args, out: Path) -> int:
    table = estimator.rate_experiment(
        cfg.model, cfg.signal, cfg.theta, cfg.T, cfg.n_list, cfg.replications, cfg.seed, cfg.dt,
        T_bracket=cfg.T_bracket, grid_points=cfg.grid_points, workers=args.threads,
    )
    with open(out / "rates.csv", "w", newline="", encoding="utf-8") as fh:
        table.write_csv(fh)
    passed = not table.degenerate
    for name, slope in table.slopes.items():
        target, tol = (T_SLOPE, T_SLOPE_TOL) if name == "T" else (THETA_SLOPE, THETA_SLOPE_TOL)
        passed = passed and slope is not None and abs(slope - target) <= tol
    _write_json(
        out / "rates.json",
        {"slopes": table.slopes, "degenerate_variance": table.degenerate, "dropped": table.dropped, "passed": passed},
    )
    slopes = ", ".join(f"{k}: {'n/a' if v is None else f'{v:.3f}'}" for k, v in table.slopes.items())
    flag = " (DegenerateVariance)" if table.degenerate else ""
    print(f"rates: slopes {slopes}{flag}")
    return EX_CHECK_FAILED if args.check and not passed else EX_OK


HANDLERS = {
    "simulate": _cmd_simulate,
    "ergodic-check": _cmd_ergodic,
    "fisher": _cmd_fisher,
    "lan-check": _cmd_lan,
    "estimate": _cmd_estimate,
    "rates": _cmd_rates,
}


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in SUBCOMMANDS:
        print(USAGE, file=sys.stderr)
        return EX_USAGE
    command = argv[0]
    try:
        args = build_parser(command).parse_args(argv[1:])
    except SystemExit as exc:
        return EX_VALIDATION if exc.code else EX_OK
    if args.threads is None:
        args.threads = default_workers()
    try:
        cfg = _load_config(args)
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EX_NOINPUT
    except (InvalidParameter, InvalidModel, ValueError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EX_VALIDATION
    if command == "rates" and len(cfg.n_list) < 3:
        print("invalid config: rates needs an n_list of at least 3 values", file=sys.stderr)
        return EX_VALIDATION
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "config.yaml", "w", encoding="utf-8") as fh:
        fh.write(config_mod.dumps(cfg))
    try:
        return HANDLERS[command](cfg, args, out)
    except (
        InvalidParameter, InvalidModel, NeedsPathEstimate, ResourceLimit,
        S7Violation, SingularNormalEquations, BoundaryMaximum,
    ) as exc:
        print(f"{command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EX_VALIDATION


def main() -> None:
    sys.exit(run())
