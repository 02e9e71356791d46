"""Command-line experiment runner.

    sparsehw <command> [--config FILE] [--seed N] [--reps N] [--out DIR] [--workers N]

Commands: ``tail``, ``calibrate``, ``fwer``, ``norms``, ``check-mgf``.  Every
run writes ``resolved_config.yaml``, ``summary.json`` and the command's CSV
files to the output directory.  The exit status is 0 when every check the
command performs passes, 1 when a check fails, 2 for configuration errors
and 3 for any other error (partial outputs are then removed).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .bounds import BoundEvaluation
from .config import ExperimentConfig, load_constants, parse_config, validate
from .errors import ConfigError, SparseHWError
from .norms import CoefficientMatrix, centering_coefficient_matrix, ipw_coefficient_matrix, \
    moment_coefficient_matrix, operator_norm
from .simulation import (
    GaussianPairSampler,
    HoeffdingScenario,
    admissible_lambda,
    calibrate_constant,
    calibrate_tail_constant,
    empirical_tail,
    estimate_fwer,
    mgf_bound_check,
)
from .simulation.scenarios import build_matrix

log = logging.getLogger("sparsehw")

COMMANDS = ("tail", "calibrate", "fwer", "norms", "check-mgf")
SEED_ENV = "SPARSEHW_SEED"
MGF_STREAM_BASE = 1000


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


class Outputs:
    """Files written by one run; removed again if the run fails."""

    def __init__(self, directory: Path):
        self.directory = directory
        self.created_dir = not directory.exists()
        self.files: list[Path] = []

    def path(self, name: str) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        p = self.directory / name
        self.files.append(p)
        return p

    def csv(self, name: str, header: list[str], rows) -> None:
        with self.path(name).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])

    def text(self, name: str, text: str) -> None:
        self.path(name).write_text(text)

    def json(self, name: str, data: dict) -> None:
        self.text(name, json.dumps(data, indent=2, sort_keys=True) + "\n")

    def rollback(self) -> None:
        for p in self.files:
            p.unlink(missing_ok=True)
        if self.created_dir and self.directory.exists() and not any(self.directory.iterdir()):
            self.directory.rmdir()


# ---------------------------------------------------------------------------
# shared helpers


def resolve_constants(cfg: ExperimentConfig) -> dict:
    c = dict(cfg["constants"])
    if cfg.constants_path() is not None:
        c.update(load_constants(cfg.constants_path()))
    return c


def _tail_setup(cfg: ExperimentConfig, c: float, d: float | None):
    """Replicate kernel and bound for the configured tail setting."""
    t = cfg["tail"]
    if t["setting"] == "estimator":
        sc = cfg.estimator_scenario()
        k, l = t["entry"]
        return sc.deviation_kernel(k, l), sc.entry_evaluation(k, l, c=c, d=d)
    sc = cfg.bilinear_scenario()
    return sc, sc.evaluation(c=c, d=d)


def _t_grid(cfg: ExperimentConfig, ev: BoundEvaluation) -> np.ndarray:
    g = cfg["tail"]["t_grid"]
    if isinstance(g, list):
        return np.array(g, dtype=float)
    grid = np.linspace(g["start"], g["stop"], g["num"])
    return grid * np.sqrt(ev.E1) if g["units"] == "sqrtE1" else grid


def _calibrated_tail(cfg, workers):
    consts = resolve_constants(cfg)
    stat, ev = _tail_setup(cfg, consts["c"], consts["d"])
    grid = _t_grid(cfg, ev)
    pilot = empirical_tail(stat, grid, cfg.reps, cfg.seed, workers, "calibration")
    return stat, ev.with_constants(c=calibrate_tail_constant(pilot, ev)), grid


# ---------------------------------------------------------------------------
# commands


def cmd_tail(cfg: ExperimentConfig, out: Outputs, workers: int) -> tuple[bool, dict]:
    consts = resolve_constants(cfg)
    if consts["calibrate"]:
        stat, ev, grid = _calibrated_tail(cfg, workers)
    else:
        stat, ev = _tail_setup(cfg, consts["c"], consts["d"])
        grid = _t_grid(cfg, ev)
    report = empirical_tail(stat, grid, cfg.reps, cfg.seed, workers, "main").attach_bound(ev)
    out.csv(
        "tail.csv",
        ["t", "frequency", "se", "bound", "bound_raw"],
        zip(report.t_grid, report.frequency, report.se, report.bound, report.bound_raw),
    )
    ok = report.dominated()
    summary = {
        "setting": cfg["tail"]["setting"],
        "c": ev.c,
        "d": ev.d,
        "E1": ev.E1,
        "E2": ev.E2,
        "kink": ev.kink,
        "calibrated": bool(consts["calibrate"]),
        "checks": {"bound_dominates_frequency": ok},
    }
    return ok, summary


def cmd_calibrate(cfg: ExperimentConfig, out: Outputs, workers: int) -> tuple[bool, dict]:
    scenario = cfg.estimator_scenario()
    C = calibrate_constant(scenario, cfg["alpha"], cfg.reps, cfg.seed, workers, "calibration")
    _, ev, _ = _calibrated_tail(cfg, workers)
    constants = {"c": ev.c, "d": ev.d, "C": C}
    out.text("constants.yaml", yaml.safe_dump(constants, sort_keys=True))
    plan = scenario.threshold_plan(cfg["alpha"], C if C > 0 else 1.0, cfg["constants"]["d_cond"])
    summary = {
        "constants": constants,
        "tail_setting": cfg["tail"]["setting"],
        "unit_cutoff": plan.unit_cutoff,
        "cutoff": C * plan.unit_cutoff,
        "checks": {},
    }
    return True, summary


def cmd_fwer(cfg: ExperimentConfig, out: Outputs, workers: int) -> tuple[bool, dict]:
    scenario = cfg.estimator_scenario()
    consts = resolve_constants(cfg)
    alpha = cfg["alpha"]
    if consts["calibrate"]:
        C = calibrate_constant(scenario, alpha, cfg.reps, cfg.seed, workers, "calibration")
    else:
        C = consts["C"]
    if not C > 0:
        raise SparseHWError("the threshold constant is zero; every replicate estimate is exact")
    plan = scenario.threshold_plan(alpha, C, consts["d_cond"])
    res = estimate_fwer(scenario, plan.cutoff, cfg.reps, cfg.seed, workers, "main")
    truth = scenario.truth
    out.csv(
        "power.csv",
        ["k", "l", "sigma", "power"],
        ((k, l, truth[k, l], pw) for (k, l), pw in zip(res.signals, res.power)),
    )
    ok = res.fwer <= alpha + 2.0 * res.se
    summary = {
        "constant": C,
        "cutoff": plan.cutoff,
        "condition_ok": plan.condition_ok,
        "fwer": res.fwer,
        "fwer_se": res.se,
        "alpha": alpha,
        "min_power": float(res.power.min()) if res.power.size else None,
        "checks": {"fwer_within_alpha_plus_2se": ok},
    }
    return ok, summary


def _norm_rows(cfg: ExperimentConfig):
    n = cfg["n"]
    mats: list[tuple[str, CoefficientMatrix]] = [("centering", centering_coefficient_matrix(n))]
    if cfg["scenario"] == "missing":
        s = cfg.missing_spec()
        k, l = np.unravel_index(int(np.argmin(s.piXY)), s.piXY.shape)
        mats.append((f"ipw[{k},{l}]", ipw_coefficient_matrix(n, s.piXY[k, l], s.piX[k], s.piY[l])))
    elif cfg["scenario"] == "bounded-error":
        e = cfg.error_spec()
        k, l = np.unravel_index(int(np.argmin(e.uXY)), e.uXY.shape)
        mats.append((f"moment[{k},{l}]", moment_coefficient_matrix(n, e.uXY[k, l], e.uX[k], e.uY[l])))
    t = cfg["tail"]
    mats.append((f"tail-{t['matrix']}", build_matrix(t["matrix"], n, t["matrix_seed"])))
    for name, A in mats:
        fro, op = A.frobenius(), A.operator_norm()
        dense = operator_norm(np.asarray(A))
        rel = abs(op - dense) / max(op, 1e-300)
        yield name, n, fro, op, dense, rel


def cmd_norms(cfg: ExperimentConfig, out: Outputs, workers: int) -> tuple[bool, dict]:
    rows = list(_norm_rows(cfg))
    out.csv("norms.csv", ["matrix", "n", "frobenius", "operator_norm", "dense_operator_norm",
                          "relative_difference"], rows)
    ok = all(r[-1] <= 1e-8 for r in rows)
    return ok, {"matrices": [r[0] for r in rows], "checks": {"closed_form_matches_dense": ok}}


def cmd_check_mgf(cfg: ExperimentConfig, out: Outputs, workers: int) -> tuple[bool, dict]:
    mg = cfg["mgf"]
    rows = []
    idx = 0
    for rho in mg["rho"]:
        sampler = GaussianPairSampler(rho)
        for a in mg["a"]:
            for frac in mg["lambda_fractions"]:
                lam = frac * admissible_lambda(a, sampler.K1, sampler.K2) if a != 0 else frac
                r = mgf_bound_check(lam, a, sampler, reps=mg["reps"], seed=cfg.seed,
                                    workers=workers, stream=MGF_STREAM_BASE + idx)
                idx += 1
                rows.append((rho, a, lam, r.lhs, r.se, r.rhs, r.exact, r.passed))
    out.csv("mgf.csv", ["rho", "a", "lambda", "lhs", "se", "rhs", "exact", "passed"], rows)
    mgf_ok = all(r[-1] for r in rows)

    m = mg["hoeffding_terms"]
    alpha_vec = tuple(float((-1) ** i * (1.0 + i / m)) for i in range(m))
    hs = HoeffdingScenario(alpha_vec, mg["hoeffding_pi"])
    ev = hs.evaluation(c=cfg["constants"]["c"])
    grid = _t_grid(cfg, ev)
    reps = mg["hoeffding_reps"]
    pilot = empirical_tail(hs, grid, reps, cfg.seed, workers, "calibration")
    ev = ev.with_constants(c=calibrate_tail_constant(pilot, ev))
    rep = empirical_tail(hs, grid, reps, cfg.seed, workers, "hoeffding").attach_bound(ev)
    out.csv("hoeffding.csv", ["t", "frequency", "se", "bound", "bound_raw"],
            zip(rep.t_grid, rep.frequency, rep.se, rep.bound, rep.bound_raw))
    hoeff_ok = rep.dominated()
    summary = {
        "mgf_checks": len(rows),
        "mgf_failures": sum(not r[-1] for r in rows),
        "hoeffding_c": ev.c,
        "checks": {"mgf_bound": mgf_ok, "hoeffding_domination": hoeff_ok},
    }
    return mgf_ok and hoeff_ok, summary


HANDLERS = {
    "tail": cmd_tail,
    "calibrate": cmd_calibrate,
    "fwer": cmd_fwer,
    "norms": cmd_norms,
    "check-mgf": cmd_check_mgf,
}


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsehw",
        description="Sparse bilinear concentration bounds: Monte Carlo checks and calibration.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path, help="YAML experiment config (defaults if omitted)")
    parser.add_argument("--seed", type=int, help=f"overrides ${SEED_ENV} and the config seed")
    parser.add_argument("--reps", type=int, help="overrides the config replicate count")
    parser.add_argument("--out", type=Path, help="output directory (overrides config 'output')")
    parser.add_argument("--workers", type=int, default=1, help="worker processes (speed only)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _resolve_seed(args, cfg: ExperimentConfig) -> int | None:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError:
            raise ConfigError(SEED_ENV, env, "must be an integer") from None
    return None


def load(args) -> ExperimentConfig:
    cfg = parse_config(args.config) if args.config is not None else validate({})
    overrides = {
        "seed": _resolve_seed(args, cfg),
        "reps": args.reps,
        "output": str(args.out) if args.out is not None else None,
    }
    return cfg.with_overrides(**overrides)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.workers < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return 2
    try:
        cfg = load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out = Outputs(cfg.output)
    try:
        ok, summary = HANDLERS[args.command](cfg, out, args.workers)
        out.text("resolved_config.yaml", cfg.dump())
        summary.update(
            command=args.command,
            seed=cfg.seed,
            reps=cfg.reps,
            config_sha256=cfg.content_hash(),
            passed=bool(ok),
        )
        out.json("summary.json", summary)
    except ConfigError as exc:
        out.rollback()
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SparseHWError, ValueError, ArithmeticError) as exc:
        out.rollback()
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except BaseException:
        out.rollback()
        raise
    log.info("%s: %s (outputs in %s)", args.command, "pass" if ok else "FAIL", cfg.output)
    print(f"{args.command}: {'pass' if ok else 'FAIL'} -> {cfg.output}")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
