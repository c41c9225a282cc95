"""Command line entry point.

Subcommands: simulate | couple | verify | gate | noise-test.  Configuration
is a flat "key = value" file with bracketed sections (documented in the
README); every key has a default, unknown keys are rejected, and the run
manifest records each key's value together with where it came from.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import acceptance, runio
from .coefficients import ParameterSet, make_pair, uniqueness_gate
from .integrator import FieldState, SolverConfig, coupled_run, point_mass_initial, run
from .kernel import DomainError, Grid1D
from .noise import NoiseModel, rng_for

# key -> (section, default, parser)
_SCHEMA: dict[str, tuple[str, object, type]] = {
    "model.alpha": ("model", 1.5, float),
    "model.beta": ("model", 2.0 / 3.0, float),
    "model.epsilon": ("model", 1e-3, float),
    "model.mode": ("model", "exact_stable", str),
    "model.seed": ("model", acceptance.DEFAULT_SEED, int),
    "model.L": ("model", 10.0, float),
    "model.n_cells": ("model", 512, int),
    "model.small_jump_completion": ("model", True, bool),
    "solver.dt": ("solver", 2.5e-4, float),
    "solver.n_steps": ("solver", 2000, int),
    "solver.record_every": ("solver", 50, int),
    "solver.q": ("solver", None, float),
    "coefficients.drift": ("coefficients", "zero", str),
    "coefficients.noise": ("coefficients", "power", str),
    "ensemble.replicas": ("ensemble", 200, int),
    "ensemble.workers": ("ensemble", 1, int),
    "experiments.delta0": ("experiments", 0.1, float),
    "experiments.initial_mass": ("experiments", 1.0, float),
    "output.directory": ("output", "out", str),
    "output.dump_jumps": ("output", False, bool),
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Validated configuration plus per-key provenance."""

    values: dict
    provenance: dict
    hash: str

    def __getitem__(self, key: str):
        return self.values[key]

    def manifest_items(self) -> dict:
        return {
            k: {"value": self.values[k], "source": self.provenance[k]}
            for k in sorted(self.values)
        }


def _parse_value(key: str, raw: str):
    _, default, typ = _SCHEMA[key]
    raw = raw.strip()
    if raw == "":
        return None
    if typ is bool:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"key '{key}': cannot parse boolean from '{raw}'")
    try:
        return typ(raw)
    except ValueError as exc:
        raise ConfigError(f"key '{key}': {exc}") from None


def parse_config(path: Optional[str], overrides: Optional[dict] = None) -> RunConfig:
    """Load, override and validate; rejected configs name the offending key."""
    values = {k: v for k, (_s, v, _t) in _SCHEMA.items()}
    provenance = {k: "default" for k in _SCHEMA}
    if path is not None:
        cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
        try:
            with open(path, encoding="utf-8") as fh:
                cp.read_file(fh, source=path)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except configparser.Error as exc:
            raise ConfigError(f"config parse error: {exc}") from None
        for section in cp.sections():
            for key, raw in cp.items(section):
                full = f"{section}.{key}"
                if full not in _SCHEMA:
                    raise ConfigError(f"unknown config key '{full}'")
                values[full] = _parse_value(full, raw)
                provenance[full] = "file"
    for key, raw in (overrides or {}).items():
        if key not in _SCHEMA:
            raise ConfigError(f"unknown override key '{key}'")
        values[key] = _parse_value(key, raw) if isinstance(raw, str) else raw
        provenance[key] = "override"
    _validate(values)
    return RunConfig(values, provenance, runio.config_hash(values))


def _validate(v: dict) -> None:
    if not 1.0 < v["model.alpha"] < 2.0:
        raise ConfigError("validation error at 'model.alpha': must lie in (1, 2)")
    if not 0.0 < v["model.beta"] < 1.0:
        raise ConfigError("validation error at 'model.beta': must lie in (0, 1)")
    if v["model.epsilon"] <= 0:
        raise ConfigError("validation error at 'model.epsilon': must be positive")
    if v["model.n_cells"] < 8 or v["model.n_cells"] % 2:
        raise ConfigError("validation error at 'model.n_cells': even integer >= 8")
    if v["solver.dt"] <= 0:
        raise ConfigError("validation error at 'solver.dt': must be positive")
    if v["solver.n_steps"] < 0:
        raise ConfigError("validation error at 'solver.n_steps': must be >= 0")
    if v["ensemble.replicas"] < 1:
        raise ConfigError("validation error at 'ensemble.replicas': must be >= 1")
    if v["model.mode"] not in ("exact_stable", "jump_decomposition", "thinned"):
        raise ConfigError("validation error at 'model.mode'")


def build_solver(cfg: RunConfig) -> tuple[Grid1D, SolverConfig]:
    grid = Grid1D(cfg["model.L"], cfg["model.n_cells"])
    model = NoiseModel(
        alpha=cfg["model.alpha"], epsilon=cfg["model.epsilon"], dt=cfg["solver.dt"],
        dx=grid.dx, L=grid.L, seed=cfg["model.seed"], mode=cfg["model.mode"],
        small_jump_completion=cfg["model.small_jump_completion"],
    )
    noise_name = cfg["coefficients.noise"]
    if noise_name == "power":
        noise_name = f"power:{cfg['model.beta']}"
    coeffs = make_pair(cfg["coefficients.drift"], noise_name, beta=cfg["model.beta"])
    solver = SolverConfig(
        dt=cfg["solver.dt"], n_steps=cfg["solver.n_steps"], noise=model,
        coefficients=coeffs, record_every=cfg["solver.record_every"], q=cfg["solver.q"],
    )
    return grid, solver


def _out_dir(cfg: RunConfig) -> Path:
    d = Path(cfg["output.directory"]) / cfg.hash
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_simulate(cfg: RunConfig) -> int:
    grid, solver = build_solver(cfg)
    X0 = point_mass_initial(grid, cfg["experiments.initial_mass"], 0.0)
    traj = run(solver, X0, rng=rng_for(cfg["model.seed"], 0x53494D))
    out = _out_dir(cfg)
    snap = out / "field_snapshots.csv"
    runio.write_csv(snap, runio.snapshot_rows(traj), ["t", "x", "value"])
    diag = out / "diagnostics.csv"
    rows = [
        dict(t=float(t), mass=float(m), sup=float(s), clamped_mass=float(c), weak_residual=float(r))
        for t, m, s, c, r in zip(traj.times, traj.mass, traj.sup, traj.clamped_mass, traj.weak_residual)
    ]
    runio.write_csv(diag, rows, ["t", "mass", "sup", "clamped_mass", "weak_residual"])
    outputs = [snap, diag]
    if cfg["output.dump_jumps"]:
        from .noise import sample_large_jumps

        stream = sample_large_jumps(solver.noise, (0.0, solver.dt * max(solver.n_steps, 1)))
        jpath = out / "jumps.bin"
        jpath.write_bytes(stream.to_bytes())
        outputs.append(jpath)
    runio.write_manifest(out, cfg.manifest_items(), cfg["model.seed"], cfg.hash, outputs)
    print(f"wrote {snap}")
    return 0


def cmd_couple(cfg: RunConfig, allow_inadmissible: bool) -> int:
    params = ParameterSet(alpha=cfg["model.alpha"], beta=cfg["model.beta"], q=cfg["solver.q"])
    gate = uniqueness_gate(params)
    watermark = None
    if not gate.admissible:
        if not allow_inadmissible:
            print(f"error: parameters rejected by the uniqueness gate ({gate.reason}); "
                  "rerun with --allow-inadmissible", file=sys.stderr)
            return 2
        watermark = "outside the admissible uniqueness regime"
        print(f"warning: {watermark} ({gate.reason})", file=sys.stderr)
    grid, solver = build_solver(cfg)
    X0 = point_mass_initial(grid, cfg["experiments.initial_mass"], 0.0)
    bump = np.exp(-grid.centers**2 / 2.0)
    Y0 = FieldState(X0.values + cfg["experiments.delta0"] * bump, 0.0, grid)
    tx, ty, dist = coupled_run(solver, X0, Y0, rng=rng_for(cfg["model.seed"], 0x434F55))
    out = _out_dir(cfg)
    path = out / "distance.csv"
    rows = [dict(t=float(t), delta0=cfg["experiments.delta0"], l1_distance=float(d))
            for t, d in zip(tx.times, dist)]
    runio.write_csv(path, rows, ["t", "delta0", "l1_distance"])
    extra = {"watermark": watermark} if watermark else None
    runio.write_manifest(out, cfg.manifest_items(), cfg["model.seed"], cfg.hash, [path],
                         extra=extra)
    print(f"wrote {path}")
    return 0


def cmd_gate(cfg: RunConfig, allow_inadmissible: bool) -> int:
    params = ParameterSet(alpha=cfg["model.alpha"], beta=cfg["model.beta"], q=cfg["solver.q"])
    res = uniqueness_gate(params)
    print(f"p = {params.p:.6f}: {res}")
    if res.disagreement:
        print("WARNING: delta-search and algebraic criterion disagree")
    return 0


def cmd_noise_test(cfg: RunConfig) -> int:
    report = acceptance.run_all("quick", cfg["model.seed"], progress=print,
                                only=("A1", "A2", "A3"),
                                workers=cfg["ensemble.workers"])
    return 0 if report.all_passed else 1


def cmd_verify(cfg: RunConfig, quick: bool) -> int:
    budget = "quick" if quick else "desk"
    report = acceptance.run_all(budget, cfg["model.seed"], progress=print,
                                workers=cfg["ensemble.workers"])
    out = _out_dir(cfg)
    outputs = []
    for name, columns in (
        ("holder_lags", ["lag", "sup_increment", "replica"]),
        ("moment_decay", ["t", "mean_moment", "stderr", "n_replicas"]),
        ("field_snapshots", ["t", "x", "value"]),
        ("diagnostic_ladder", ["n", "m", "functional"]),
    ):
        path = out / f"{name}.csv"
        runio.write_csv(path, report.artifacts[name], columns)
        outputs.append(path)
    for res in report.results:
        if res.rows:
            path = out / "checks" / f"{res.name}.csv"
            cols = sorted({k for row in res.rows for k in row})
            runio.write_csv(path, [{c: row.get(c, "") for c in cols} for row in res.rows], cols)
            outputs.append(path)
    verdicts = {
        r.name: dict(description=r.description, verdict=r.verdict, statistic=r.statistic,
                     tolerance=r.tolerance, seed=r.seed, config_hash=r.config_hash)
        for r in report.results
    }
    vpath = out / "verdicts.json"
    with open(vpath, "w", encoding="utf-8") as fh:
        json.dump({"budget": budget, "checks": verdicts}, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    outputs.append(vpath)
    runio.write_manifest(out, cfg.manifest_items(), cfg["model.seed"], cfg.hash, outputs,
                         extra={"budget": budget, "all_passed": report.all_passed})
    print(f"verdicts in {vpath}")
    return 0 if report.all_passed else 1


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="stableheat", description=__doc__)
    parser.add_argument("command", choices=["simulate", "couple", "verify", "gate", "noise-test"])
    parser.add_argument("--config", metavar="PATH", default=None)
    parser.add_argument("--seed", type=int, metavar="U64", default=None)
    parser.add_argument("--replicas", type=int, metavar="N", default=None)
    parser.add_argument("--alpha", type=float, default=None)
    parser.add_argument("--out", metavar="DIR", default=None)
    parser.add_argument("--quick", action="store_true")
    parser.add_argument("--allow-inadmissible", action="store_true")
    parser.add_argument("--override", metavar="KEY=VAL", action="append", default=[])
    args = parser.parse_args(argv)

    overrides: dict = {}
    for item in args.override:
        if "=" not in item:
            print(f"error: override '{item}' is not KEY=VAL", file=sys.stderr)
            return 2
        key, val = item.split("=", 1)
        overrides[key.strip()] = val.strip()
    if args.seed is not None:
        overrides["model.seed"] = str(args.seed)
    if args.replicas is not None:
        overrides["ensemble.replicas"] = str(args.replicas)
    if args.alpha is not None:
        overrides["model.alpha"] = str(args.alpha)
    if args.out is not None:
        overrides["output.directory"] = args.out

    try:
        cfg = parse_config(args.config, overrides)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    workers = os.environ.get("SPDE_THREADS")
    if workers is not None and "ensemble.workers" not in overrides:
        cfg.values["ensemble.workers"] = int(workers)

    try:
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "couple":
            return cmd_couple(cfg, args.allow_inadmissible)
        if args.command == "gate":
            return cmd_gate(cfg, args.allow_inadmissible)
        if args.command == "noise-test":
            return cmd_noise_test(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, args.quick)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
