"""Command line runner: ``jointruin {simulate,solve,asymptotics,validate-config}``.

Data files depend only on the configuration (including the seed); the run
timestamp and worker count go to ``manifest.json`` alone.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import HypothesisWarning, ratio_sweep, write_sweep_csv
from .config import ConfigError, ExperimentConfig, load_config
from .estimate import BudgetError, estimate_finite_ruin_all, estimate_laplace
from .ide_solver import (
    SolverError, WedgeGrid, default_step, estimate_boundary_data, iteration_bound, load_checkpoint,
    query, residual_stationary, save_checkpoint, solve_fixed_point,
)
from .model import InitialReserves, Regime, classify_regime
from .simulate import simulate_path

EXIT_OK = 0
EXIT_CONFIG = 3
EXIT_NONCONVERGENCE = 4
EXIT_BUDGET = 5
EXIT_HYPOTHESIS = 6
EXIT_IO = 7

OUT_ENV = "JOINTRUIN_OUT"
PATH_STREAM = 1 << 20  # spawn key offset for path dumps, clear of estimator blocks


class HypothesisError(RuntimeError):
    pass


def _r(x) -> str:
    return repr(float(x))


def _csv_writer(fh, cfg_hash):
    fh.write(f"# config_hash={cfg_hash}\n")
    return csv.writer(fh, lineterminator="\n")


def _dump_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _require(cfg: ExperimentConfig, section: str):
    if cfg.errors:
        raise ConfigError(cfg.errors)
    if section not in cfg.raw:
        raise ConfigError([f"config has no '{section}' section"])


# -- simulate --------------------------------------------------------------------

def run_simulate(cfg: ExperimentConfig, out: Path) -> list[str]:
    _require(cfg, "simulate")
    sim = cfg.section("simulate")
    params, claim, seed, h = cfg.params, cfg.claim, cfg.seed, cfg.hash()
    Ts = sim["T"] if isinstance(sim["T"], list) else [sim["T"]]
    rows, records, checks = [], [], []
    for ri, (u1, u2) in enumerate(sim["reserves"]):
        reserves = InitialReserves(float(u1), float(u2))
        degenerate = classify_regime(params, reserves) is Regime.DEGENERATE
        for T in Ts:
            est = estimate_finite_ruin_all(params, reserves, float(T), int(sim["n"]), seed, claim, cfg.workers)
            for kind in sim["kinds"]:
                rep = est[kind]
                rows.append([ri, _r(u1), _r(u2), _r(T), kind, _r(rep.estimate), _r(rep.std_error),
                             _r(rep.ci95[0]), _r(rep.ci95[1]), rep.successes, rep.n_samples, seed, int(degenerate)])
                records.append(dict(rep.to_record(), reserve_index=ri, u1=float(u1), u2=float(u2),
                                    degenerate=degenerate))
            if degenerate:
                checks.append({"reserve_index": ri, "T": float(T),
                               "min_equals_psi2": est["min"].successes == est["psi2"].successes})
    files = []
    with open(out / "simulate.csv", "w") as fh:
        w = _csv_writer(fh, h)
        w.writerow(["reserve_index", "u1", "u2", "T", "kind", "estimate", "std_error", "ci_low", "ci_high",
                    "successes", "n", "seed", "degenerate"])
        w.writerows(rows)
    files.append("simulate.csv")
    _dump_json({"config_hash": h, "params": params.as_dict(), "claim": claim.spec(), "reports": records,
                "checks": checks}, out / "simulate.json")
    files.append("simulate.json")
    if sim["dump_paths"]:
        (out / "paths").mkdir(exist_ok=True)
        for ri, (u1, u2) in enumerate(sim["reserves"]):
            for k in range(sim["dump_paths"]):
                rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(PATH_STREAM, ri, k))))
                path = simulate_path(params, InitialReserves(float(u1), float(u2)), float(max(Ts)), rng, claim)
                name = f"paths/path_r{ri}_{k}.csv"
                with open(out / name, "w") as fh:
                    fh.write(f"# config_hash={h}\n")
                    t = path.times
                    fh.write(f"# tau1={t.tau1!r} tau2={t.tau2!r} t_min={t.t_min!r} t_max={t.t_max!r}\n")
                    path.write_csv(fh)
                files.append(name)
    if any(not c["min_equals_psi2"] for c in checks):
        raise RuntimeError("degenerate-regime check failed: min and psi2 counts differ")
    return files


# -- solve --------------------------------------------------------------------------

def run_solve(cfg: ExperimentConfig, out: Path) -> list[str]:
    _require(cfg, "solve")
    sv = cfg.section("solve")
    params, claim, seed, h = cfg.params, cfg.claim, cfg.seed, cfg.hash()
    s, kind, tol = float(sv["s"]), sv["kind"], float(sv["tol"])
    step = float(sv["h"]) if sv.get("h") is not None else default_step(params.lam, s)
    initial = None
    if sv.get("resume"):
        initial = load_checkpoint(sv["resume"])
        if initial.params != params or initial.s != s or initial.kind != kind:
            raise ConfigError(["resume checkpoint was solved for different params, s or kind"])
        grid, boundary = initial.grid, initial.boundary
    else:
        grid = WedgeGrid.for_model(int(sv["n_core"]), float(sv["vmax"]), params, step)
        boundary = estimate_boundary_data(params, claim, s, grid, kind, n=int(sv["boundary_n"]), seed=seed,
                                          workers=cfg.workers, closure_shape=tuple(sv["closure_shape"]))
    field = solve_fixed_point(params, claim, s, grid, boundary, kind, tol, int(sv["max_iter"]), step, initial)
    res = residual_stationary(field, params, claim, s)
    save_checkpoint(field, out / "field.txt", meta={"config_hash": h})
    mc_kind = "min" if kind == "min" else "max_simultaneous"
    allowance = 2 * grid.delta
    probe_rows = []
    for u1, u2 in sv.get("probes") or []:
        value = query(field, float(u1), float(u2))
        rep = estimate_laplace(params, InitialReserves(float(u1), float(u2)), s, mc_kind, int(sv["probe_n"]),
                               seed + 1, claim, bias_budget=float(sv["bias_budget"]), workers=cfg.workers)
        bound = 2 * rep.std_error + tol + allowance
        diff = abs(value - rep.estimate)
        probe_rows.append([_r(u1), _r(u2), _r(value), _r(rep.estimate), _r(rep.std_error), _r(diff),
                           _r(bound), int(diff <= bound)])
    with open(out / "probes.csv", "w") as fh:
        w = _csv_writer(fh, h)
        w.writerow(["u1", "u2", "solver", "mc_estimate", "mc_se", "abs_diff", "tolerance", "pass"])
        w.writerows(probe_rows)
    summary = {
        "config_hash": h, "kind": kind, "s": s, "grid": grid.spec(), "h": field.h, "rho": field.rho,
        "iterations": field.iterations, "iteration_bound": iteration_bound(tol, field.rho),
        "diffs": field.diffs, "ratios": field.ratios, "residual_sup": res.sup,
        "boundary_max_se": boundary.max_se(field.kind), "resumed": initial is not None,
    }
    _dump_json(summary, out / "solve.json")
    return ["field.txt", "probes.csv", "solve.json"]


# -- asymptotics -----------------------------------------------------------------------

def run_asymptotics(cfg: ExperimentConfig, out: Path, force: bool = False) -> list[str]:
    _require(cfg, "asymptotics")
    asy = cfg.section("asymptotics")
    params, claim, seed, h = cfg.params, cfg.claim, cfg.seed, cfg.hash()
    if not claim.regularly_varying and not force:
        raise HypothesisError(
            f"heavy-tail hypothesis not met: claim family {claim.family!r} is not regularly varying "
            "(use --force to run anyway)"
        )
    xs = [tuple(x) if isinstance(x, list) else x for x in asy["x"]]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HypothesisWarning)
        reps = ratio_sweep(params, claim, xs, float(asy["T"]), asy["kind"], n=int(asy["n"]), seed=seed,
                           budget=asy.get("budget"), workers=cfg.workers, threshold=float(asy["threshold"]))
    with open(out / "sweep.csv", "w") as fh:
        fh.write(f"# config_hash={h}\n")
        write_sweep_csv(reps, fh)
    _dump_json({"config_hash": h, "params": params.as_dict(), "claim": claim.spec(),
                "rows": [r.to_record() for r in reps]}, out / "sweep.json")
    return ["sweep.csv", "sweep.json"]


# -- entry point ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jointruin", description="Joint ruin experiments for two coupled lines.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("simulate", "solve", "asymptotics", "validate-config"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--out", type=Path, default=None, help=f"output directory (else ${OUT_ENV}, else config)")
        p.add_argument("--force", action="store_true", help="run asymptotics outside the heavy-tail hypothesis")
    return ap


def output_dir(args, cfg: ExperimentConfig) -> Path:
    if args.out is not None:
        return args.out
    if os.environ.get(OUT_ENV):
        return Path(os.environ[OUT_ENV])
    return Path(cfg.raw["output"]["dir"])


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed=args.seed, workers=args.workers)
        if args.command == "validate-config":
            if cfg.errors:
                raise ConfigError(cfg.errors)
            print(f"valid config {cfg.hash()}")
            return EXIT_OK
        out = output_dir(args, cfg)
        out.mkdir(parents=True, exist_ok=True)
        started = _dt.datetime.now(_dt.timezone.utc).isoformat()
        if args.command == "simulate":
            files = run_simulate(cfg, out)
        elif args.command == "solve":
            files = run_solve(cfg, out)
        else:
            files = run_asymptotics(cfg, out, force=args.force)
        _dump_json({"command": args.command, "config_hash": cfg.hash(), "config": cfg.raw, "files": files,
                    "timestamp": started, "workers": cfg.workers, "version": __version__}, out / "manifest.json")
        print(f"{args.command}: wrote {len(files)} files to {out}")
        return EXIT_OK
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        print("difference history: " + " ".join(f"{d:.3e}" for d in exc.history), file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except HypothesisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
