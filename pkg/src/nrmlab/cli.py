"""Experiment runner CLI: single runs, JSON-configured sweeps, and
canned presets, all emitting a fixed CSV schema.

Exit codes: 0 success, 2 configuration error, 3 numerical or policy
failure during a run. Config parsing is fail-closed: unknown JSON keys
are errors, so a typo in a tunable cannot silently run defaults.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import ConfigError, NrmlabError
from .lp import solve_dlp
from .model import (
    Instance, gen_multi_resource, gen_single_resource, instance_from_json,
    sample_path,
)
from .sim import PolicySpec, estimate_regret, simulate

_POLICY_KINDS = ("ff", "fd", "lpt", "restart", "hybrid")
_SCHEMA_VERSION = 1
_DEFAULT_SEED = 1729
_OUT_ENV = "NRMLAB_OUT"

_CSV_COLUMNS = ("experiment_id", "k", "policy", "params", "replications",
                "mean_regret", "stderr", "mean_revenue", "mean_hindsight",
                "v_dlp", "base_seed", "wall_ms")

# per-policy tunables accepted in config JSON, beyond "name"
_POLICY_KEYS = {
    "ff": frozenset(),
    "fd": frozenset({"alpha", "beta", "gamma"}),
    "lpt": frozenset({"lpt_beta", "lpt_d"}),
    "restart": frozenset({"alpha", "beta", "gamma", "warm_start", "fd_floor"}),
    "hybrid": frozenset({"alpha", "beta", "gamma", "lpt_beta", "lpt_d", "U",
                         "warm_start", "fd_floor"}),
}

_GEN_DEFAULTS = {
    "single_resource": {"c_ratio": 0.8, "r1": 2.0, "r2": 1.0},
    "multi_resource": {"seed": 7, "n_types": 100, "n_resources": 100},
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated sweep description: one instance family, a scale grid,
    and a list of policies sharing one base seed (common random numbers
    across policies)."""

    experiment_id: str
    generator: str | None
    generator_args: dict
    inline: str | None
    policies: tuple[PolicySpec, ...]
    k_grid: tuple[int, ...]
    replications: int
    base_seed: int
    output: str


def _check_keys(obj: dict, allowed, where: str) -> None:
    extra = sorted(set(obj) - set(allowed))
    if extra:
        raise ConfigError("unknown-key", f"{where}: unknown key {extra[0]!r}")


def _need(obj: dict, key: str, where: str):
    if key not in obj:
        raise ConfigError("missing-key", f"{where}: missing {key!r}")
    return obj[key]


def _parse_policy(obj, where: str) -> PolicySpec:
    if not isinstance(obj, dict):
        raise ConfigError("invalid-value", f"{where}: policy entry must be an object")
    name = _need(obj, "name", where)
    if name not in _POLICY_KINDS:
        raise ConfigError("unknown-policy",
                          f"{where}: {name!r} not one of {list(_POLICY_KINDS)}")
    _check_keys(obj, {"name"} | _POLICY_KEYS[name], where)
    try:
        expo = None
        given = [k for k in ("alpha", "beta", "gamma") if k in obj]
        if given:
            if len(given) != 3:
                raise ConfigError(
                    "invalid-value",
                    f"{where}: alpha, beta, gamma must be given together")
            expo = (float(obj["alpha"]), float(obj["beta"]), float(obj["gamma"]))
        return PolicySpec(
            name, fd_exponents=expo,
            lpt_beta=float(obj.get("lpt_beta", 0.125)),
            lpt_d=float(obj.get("lpt_d", -0.125)),
            U=int(obj.get("U", 0)),
            warm_start=bool(obj.get("warm_start", False)),
            fd_floor=int(obj.get("fd_floor", 100)))
    except (TypeError, ValueError) as exc:
        raise ConfigError("invalid-value", f"{where}: {exc}") from exc


def _parse_instance_spec(obj, where: str):
    if not isinstance(obj, dict):
        raise ConfigError("invalid-value", f"{where}: must be an object")
    if "inline" in obj:
        _check_keys(obj, {"inline"}, where)
        try:
            inline_text = json.dumps(obj["inline"])
            inst = instance_from_json(inline_text)
        except (NrmlabError, TypeError, ValueError, KeyError) as exc:
            raise ConfigError("invalid-value", f"{where}.inline: {exc}") from exc
        return None, {}, inline_text, inst.T
    _check_keys(obj, {"generator", "args"}, where)
    gen = _need(obj, "generator", where)
    if gen not in _GEN_DEFAULTS:
        raise ConfigError("invalid-value",
                          f"{where}.generator: {gen!r} not one of "
                          f"{sorted(_GEN_DEFAULTS)}")
    args = dict(_GEN_DEFAULTS[gen])
    given = obj.get("args", {})
    if not isinstance(given, dict):
        raise ConfigError("invalid-value", f"{where}.args: must be an object")
    _check_keys(given, args, f"{where}.args")
    args.update(given)
    return gen, args, None, None


def parse_config(obj) -> ExperimentConfig:
    """Validate a decoded JSON object into an ExperimentConfig.

    Fail-closed: unknown keys anywhere, a bad policy name, a non-
    increasing k grid, or a schema mismatch all raise ConfigError naming
    the offending key.
    """
    if not isinstance(obj, dict):
        raise ConfigError("invalid-value", "config root must be an object")
    _check_keys(obj, {"schema", "experiment_id", "instance", "policies",
                      "k_grid", "replications", "base_seed", "output"},
                "config")
    if _need(obj, "schema", "config") != _SCHEMA_VERSION:
        raise ConfigError("unsupported-schema",
                          f"config: schema must be {_SCHEMA_VERSION}")
    experiment_id = str(_need(obj, "experiment_id", "config"))
    gen, gen_args, inline, inline_T = _parse_instance_spec(
        _need(obj, "instance", "config"), "instance")
    raw_policies = _need(obj, "policies", "config")
    if not isinstance(raw_policies, list) or not raw_policies:
        raise ConfigError("invalid-value", "policies: must be a nonempty list")
    policies = tuple(_parse_policy(p, f"policies[{i}]")
                     for i, p in enumerate(raw_policies))
    raw_grid = _need(obj, "k_grid", "config")
    try:
        k_grid = tuple(int(k) for k in raw_grid)
    except (TypeError, ValueError) as exc:
        raise ConfigError("invalid-value", f"k_grid: {exc}") from exc
    if not k_grid or any(k < 1 for k in k_grid) or \
            any(a >= b for a, b in zip(k_grid, k_grid[1:])):
        raise ConfigError("invalid-value",
                          "k_grid: must be strictly increasing positive integers")
    if inline is not None and k_grid != (inline_T,):
        raise ConfigError("invalid-value",
                          f"k_grid: must equal [{inline_T}] for an inline instance")
    R = _need(obj, "replications", "config")
    if not isinstance(R, int) or R < 2:
        raise ConfigError("invalid-value", "replications: must be an integer >= 2")
    base_seed = _need(obj, "base_seed", "config")
    if not isinstance(base_seed, int) or base_seed < 0:
        raise ConfigError("invalid-value", "base_seed: must be a nonnegative integer")
    output = str(obj.get("output", f"{experiment_id}.csv"))
    return ExperimentConfig(experiment_id, gen, gen_args, inline, policies,
                            k_grid, R, base_seed, output)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("invalid-json", f"{path}: {exc}") from exc
    return parse_config(obj)


def _build_instance(cfg: ExperimentConfig, k: int) -> Instance:
    try:
        if cfg.inline is not None:
            return instance_from_json(cfg.inline)
        if cfg.generator == "single_resource":
            a = cfg.generator_args
            return gen_single_resource(k, a["c_ratio"], a["r1"], a["r2"])
        a = cfg.generator_args
        return gen_multi_resource(k, a["seed"], a["n_types"], a["n_resources"])
    except (NrmlabError, ValueError) as exc:
        raise ConfigError("invalid-value", f"instance at k={k}: {exc}") from exc


def _resolve_output(output: str, out_dir: str | None) -> Path:
    p = Path(output)
    if p.is_absolute():
        return p
    base = out_dir or os.environ.get(_OUT_ENV) or "."
    return Path(base) / p


def run_experiment(cfg: ExperimentConfig, threads: int = 1,
                   out_dir: str | None = None) -> Path:
    """Run the sweep and write one CSV, returning its path.

    One row per (k, policy), sorted by (k, policy, params). All content
    except wall_ms is a pure function of the config.
    """
    rows = []
    for k in cfg.k_grid:
        inst = _build_instance(cfg, k)
        v_dlp = solve_dlp(inst).objective_value
        for spec in cfg.policies:
            t0 = time.perf_counter()
            rep = estimate_regret(spec, inst, cfg.replications, cfg.base_seed,
                                  threads=threads)
            wall_ms = round(1000.0 * (time.perf_counter() - t0))
            rows.append((cfg.experiment_id, k, spec.kind, spec.params_label(),
                         cfg.replications, rep.mean_regret, rep.stderr,
                         rep.mean_revenue, rep.mean_hindsight, v_dlp,
                         cfg.base_seed, wall_ms))
    rows.sort(key=lambda r: (r[1], r[2], r[3]))
    path = _resolve_output(cfg.output, out_dir)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(_CSV_COLUMNS)
        for r in rows:
            w.writerow([r[0], r[1], r[2], r[3], r[4],
                        f"{r[5]:.17g}", f"{r[6]:.17g}", f"{r[7]:.17g}",
                        f"{r[8]:.17g}", f"{r[9]:.17g}", r[10], r[11]])
    return path


def _preset_configs(name: str, reps: int | None, base_seed: int | None,
                    full: bool) -> list[ExperimentConfig]:
    seed = _DEFAULT_SEED if base_seed is None else base_seed
    cfgs = []
    if name == "single_resource_fig1":
        R = 500 if reps is None else reps
        for r1 in (2, 5):
            for c in (0.7, 0.8, 0.9):
                eid = f"single_resource_fig1_c{int(round(10 * c)):02d}_r{r1}"
                cfgs.append(ExperimentConfig(
                    eid, "single_resource",
                    {"c_ratio": c, "r1": float(r1), "r2": 1.0}, None,
                    (PolicySpec("ff"), PolicySpec("fd"), PolicySpec("restart")),
                    tuple(range(1000, 10001, 1000)), R, seed, f"{eid}.csv"))
    elif name == "hybrid_fig2":
        R = 500 if reps is None else reps
        for r1 in (2, 5):
            eid = f"hybrid_fig2_r{r1}"
            cfgs.append(ExperimentConfig(
                eid, "single_resource",
                {"c_ratio": 0.8, "r1": float(r1), "r2": 1.0}, None,
                tuple(PolicySpec("hybrid", U=u) for u in range(5)),
                tuple(range(1000, 10001, 1000)), R, seed, f"{eid}.csv"))
    elif name == "multi_resource":
        R = 200 if reps is None else reps
        if full:
            eid, nt, grid = "multi_resource_full", 1000, \
                (50000, 100000, 200000, 500000)
        else:
            eid, nt, grid = "multi_resource_desk", 100, (2000, 5000, 10000)
        cfgs.append(ExperimentConfig(
            eid, "multi_resource",
            {"seed": 7, "n_types": nt, "n_resources": nt}, None,
            (PolicySpec("ff"), PolicySpec("fd"), PolicySpec("restart")),
            grid, R, seed, f"{eid}.csv"))
    else:
        raise ConfigError("unknown-preset", f"no preset named {name!r}")
    return cfgs


def _cmd_run(args) -> int:
    if args.policy not in _POLICY_KINDS:
        raise ConfigError("unknown-policy",
                          f"policy {args.policy!r} not one of {list(_POLICY_KINDS)}")
    with open(args.instance, encoding="utf-8") as fh:
        text = fh.read()
    try:
        inst = instance_from_json(text)
    except (NrmlabError, TypeError, ValueError, KeyError) as exc:
        raise ConfigError("invalid-value", f"{args.instance}: {exc}") from exc
    trace = simulate(PolicySpec(args.policy), inst, args.seed,
                     record=args.verbose)
    print(f"revenue {trace.revenue:.17g}")
    print("x " + " ".join(str(int(v)) for v in trace.x))
    print("B_final " + " ".join(f"{v:.17g}" for v in trace.ledger.B))
    if args.verbose:
        path = sample_path(inst, args.seed)
        w = csv.writer(sys.stdout)
        w.writerow(["t", "type", "y", "z"] +
                   [f"theta{i}" for i in range(inst.m)])
        d = trace.decisions
        for t in range(inst.T):
            w.writerow([t + 1, int(path.types[t]), int(d.y[t]), int(d.z[t])] +
                       [f"{v:.17g}" for v in d.theta[t]])
    return 0


def _cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, base_seed=args.seed)
    if args.reps is not None:
        if args.reps < 2:
            raise ConfigError("invalid-value", "--reps: must be >= 2")
        cfg = replace(cfg, replications=args.reps)
    if args.out is not None:
        cfg = replace(cfg, output=args.out)
    path = run_experiment(cfg, threads=args.threads)
    print(path)
    return 0


def _cmd_preset(args) -> int:
    for cfg in _preset_configs(args.name, args.reps, args.seed, args.full):
        path = run_experiment(cfg, threads=args.threads, out_dir=args.out)
        print(path)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nrmlab",
        description="Admission-control policy experiments for quantity-based "
                    "network revenue management.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one policy on one instance")
    p_run.add_argument("--policy", required=True,
                       help="one of ff, fd, lpt, restart, hybrid")
    p_run.add_argument("--instance", required=True,
                       help="instance JSON file")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--verbose", action="store_true",
                       help="also print the per-period decision CSV")

    p_exp = sub.add_parser("experiment", help="run a JSON experiment config")
    p_exp.add_argument("config", help="experiment config JSON file")
    p_exp.add_argument("--out", default=None, help="override the output path")
    p_exp.add_argument("--threads", type=int, default=1)
    p_exp.add_argument("--seed", type=int, default=None,
                       help="override the config base_seed")
    p_exp.add_argument("--reps", type=int, default=None,
                       help="override the config replication count")

    p_pre = sub.add_parser("preset", help="run a canned experiment")
    p_pre.add_argument("name", choices=("single_resource_fig1", "hybrid_fig2",
                                        "multi_resource"))
    p_pre.add_argument("--out", default=None, help="output directory")
    p_pre.add_argument("--threads", type=int, default=1)
    p_pre.add_argument("--seed", type=int, default=None)
    p_pre.add_argument("--reps", type=int, default=None)
    p_pre.add_argument("--full", action="store_true",
                       help="multi_resource at full scale (slow)")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "experiment":
            return _cmd_experiment(args)
        return _cmd_preset(args)
    except ConfigError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NrmlabError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 3
    except (OverflowError, FloatingPointError, ZeroDivisionError) as exc:
        print(f"error: numerical-failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
