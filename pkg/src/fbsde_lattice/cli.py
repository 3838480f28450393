"""Command-line runner: configuration in, CSV and JSON reports out.

Exit status: 0 on success, 1 when a verification fails under ``--strict``
(``check-conditions`` also returns 1 on any violation), 2 on invalid
input (configuration, model data, window), 3 when a solver fails.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .coefficients import (
    ConditionSampler,
    DrivingTerms,
    check_domination,
    check_lipschitz,
    check_monotonicity,
    parameter_window_check,
)
from .errors import (
    CaseMismatchError,
    ConfigError,
    ContractionError,
    DivergenceError,
    FBSDEError,
    HorizonError,
    LatticeError,
    NonFiniteError,
    SpecError,
    StepCollapseError,
    WindowError,
)
from .fbsde import FBSDESolution, SolverOptions, solve, verify_thm41
from .lattice import Lattice, NoiseModel
from .lq import (
    blq_qp_oracle,
    flq_qp_oracle,
    solve_blq,
    solve_flq,
    verify_blq,
    verify_flq,
)
from .models import MODELS, ModelInstance, build_model, random_saturating
from .reports import InequalityCheck, leq
from .bsde import bsde_estimate_constant
from .sde import sde_estimate_constant
from .spaces import AdaptedProcess, WeightConfig, weighted_norm_sq

log = logging.getLogger("fbsde_lattice")

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3

RESIDUAL_TOL = 1e-8
AGREEMENT_TOL = 1e-6
STATIONARITY_TOL = 1e-8
GAP_TOL = 1e-10
IDENTITY_TOL = 1e-8
ORACLE_TOL = 1e-6


# --------------------------------------------------------------------------- configuration

def _finite(value, what):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what} must be numeric") from exc
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{what} must be finite")
    return value


def _check_numeric_tree(node, path="config"):
    if isinstance(node, dict):
        for k, v in node.items():
            _check_numeric_tree(v, f"{path}.{k}")
    elif isinstance(node, list):
        for i, v in enumerate(node):
            _check_numeric_tree(v, f"{path}[{i}]")
    elif isinstance(node, float) and not math.isfinite(node):
        raise ConfigError(f"{path} must be finite")


@dataclass
class ExperimentConfig:
    lattice: dict
    weight: dict
    model: dict
    certificate: dict | None = None
    solver: dict = field(default_factory=dict)
    verify: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    SECTIONS = ("lattice", "weight", "model", "certificate", "solver", "verify", "output")

    @classmethod
    def from_mapping(cls, raw) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a mapping")
        unknown = set(raw) - set(cls.SECTIONS)
        if unknown:
            raise ConfigError(f"unknown configuration sections: {sorted(unknown)}")
        for key in ("lattice", "weight", "model"):
            if not isinstance(raw.get(key), dict):
                raise ConfigError(f"missing section {key!r}")
        _check_numeric_tree(raw)
        if "depth" not in raw["lattice"]:
            raise ConfigError("lattice.depth is required")
        if "rho" not in raw["weight"]:
            raise ConfigError("weight.rho is required")
        _finite(raw["weight"]["rho"], "weight.rho")
        name = raw["model"].get("name")
        if name not in MODELS:
            raise ConfigError(f"model.name must be one of {sorted(MODELS)}, got {name!r}")
        return cls(raw["lattice"], raw["weight"], raw["model"], raw.get("certificate"),
                   raw.get("solver") or {}, raw.get("verify") or {}, raw.get("output") or {})

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"configuration file {p} not found")
        try:
            raw = yaml.safe_load(p.read_text(encoding="utf-8"))
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {p}: {exc}") from exc
        return cls.from_mapping(raw)

    # derived objects

    def build_lattice(self) -> Lattice:
        depth = int(self.lattice["depth"])
        spec = self.lattice.get("noise", "rademacher")
        specs = spec if isinstance(spec, list) else [spec]
        noises = [_noise(s) for s in specs]
        return Lattice(depth, noises[0] if len(noises) == 1 else noises)

    def weight_config(self) -> WeightConfig:
        return WeightConfig(float(self.weight["rho"]), int(self.weight.get("horizon", self.lattice["depth"])))

    def solver_options(self, mode: str | None = None) -> SolverOptions:
        s = self.solver
        keys = {"deltaInit": "delta_init", "innerTol": "inner_tol", "maxInnerIters": "max_inner_iters",
                "damping": "damping", "truncationHorizon": "truncation_horizon", "minDelta": "min_delta",
                "nested": "nested", "patience": "patience", "enforceWindow": "enforce_window"}
        unknown = set(s) - set(keys) - {"mode"}
        if unknown:
            raise ConfigError(f"unknown solver keys: {sorted(unknown)}")
        kwargs = {keys[k]: v for k, v in s.items() if k in keys}
        try:
            return SolverOptions(mode=mode or s.get("mode", "continuation"), **kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"solver: {exc}") from exc

    def seed(self, override: int | None) -> int:
        if override is not None:
            return int(override)
        if self.verify and "seed" not in self.verify:
            raise ConfigError("verify.seed is required when a verify block is given")
        return int(self.verify.get("seed", 0))

    def build_model(self, lat: Lattice, w: WeightConfig) -> ModelInstance:
        return build_model(self.model["name"], self.model.get("params"), w.rho, lat, w.horizon,
                           self.certificate)


def _noise(spec) -> NoiseModel:
    if isinstance(spec, str):
        name = spec.lower().replace("_", "-")
        if name == "rademacher":
            return NoiseModel.rademacher()
        if name in ("three-point", "threepoint"):
            return NoiseModel.three_point()
        raise ConfigError(f"unknown noise {spec!r}")
    if not isinstance(spec, dict) or "support" not in spec or "probs" not in spec:
        raise ConfigError("noise must be a name or a mapping with support and probs")
    if spec.get("standardize", False):
        return NoiseModel.standardized(spec["support"], spec["probs"])
    return NoiseModel(tuple(spec["support"]), tuple(spec["probs"]))


# --------------------------------------------------------------------------- report files

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


class ReportWriter:
    SOLUTION_COLUMNS = ("level", "node", "component", "x", "y", "control")
    CHECK_COLUMNS = ("check", "lhs", "rhs", "constant", "margin", "passed")
    ITER_COLUMNS = ("stage", "alpha_from", "alpha_to", "delta", "iterations", "max_ratio", "update",
                    "accepted", "note")

    def __init__(self, directory):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)

    def _write(self, name, columns, rows):
        with open(self.dir / name, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(columns)
            for row in rows:
                wr.writerow([_fmt(row.get(c)) for c in columns])

    def solution(self, x: AdaptedProcess, y: AdaptedProcess, control: AdaptedProcess | None = None,
                 name: str = "solution.csv"):
        rows = []
        for k in range(x.horizon + 1):
            for node in range(x[k].shape[0]):
                for c in range(x.dim):
                    u = None
                    if control is not None and k <= control.horizon and c < control.dim:
                        u = control[k][node, c]
                    rows.append({"level": k, "node": node, "component": c, "x": x[k][node, c],
                                 "y": y[k][node, c], "control": u})
        self._write(name, self.SOLUTION_COLUMNS, rows)

    def checks(self, checks: list):
        self._write("verification.csv", self.CHECK_COLUMNS,
                    [{"check": c.name, "lhs": c.lhs, "rhs": c.rhs, "constant": c.constant,
                      "margin": c.margin, "passed": c.passed} for c in checks])

    def iterations(self, rows: list):
        self._write("iterations.csv", self.ITER_COLUMNS, rows)

    def summary(self, data: dict):
        with open(self.dir / "summary.json", "w", encoding="utf-8") as fh:
            json.dump(_jsonable(data), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else str(f)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _iteration_rows(sol: FBSDESolution, stage: str) -> list:
    rows = []
    for r in sol.alpha_trace:
        rows.append({"stage": stage, "alpha_from": r.alpha_from, "alpha_to": r.alpha_to, "delta": r.delta,
                     "iterations": r.iterations, "max_ratio": r.max_ratio, "accepted": r.accepted,
                     "note": r.note})
    if not sol.alpha_trace and sol.iterations:
        for row in sol.iterations:
            rows.append({"stage": stage, "iterations": row.get("sweep"), "update": row.get("update")})
    return rows


# --------------------------------------------------------------------------- shared steps

def _condition_checks(inst: ModelInstance, lat, w, seed, samples) -> tuple[list, dict]:
    if inst.cert is None:
        raise ConfigError(f"model {inst.name!r} has no certificate; add a certificate block")
    inst.cert.validate()
    sampler = ConditionSampler(lat, inst.dim, w.horizon, n_samples=samples, seed=seed)
    rep = (check_domination(inst.coeffs, inst.cert, sampler)
           .merge(check_monotonicity(inst.coeffs, inst.cert, w.rho, sampler))
           .merge(check_lipschitz(inst.coeffs, sampler)))
    checks = []
    for name in sorted(rep.status):
        count = rep.violation_count.get(name, 0)
        checks.append(InequalityCheck(f"condition: {name} ({rep.status[name]})", float(count), 0.0,
                                      math.nan, count == 0))
    table = {name: {"status": rep.status[name], "checked": rep.checked.get(name, 0),
                    "violations": rep.violation_count.get(name, 0),
                    "worst_margin": rep.worst_margin.get(name, math.inf)} for name in sorted(rep.status)}
    return checks, table


def _constants(inst: ModelInstance, rho: float) -> dict:
    L = inst.coeffs.lipschitz
    win = parameter_window_check(L.L1, L.L2, rho)
    out = {"L1": L.L1, "L2": L.L2, "window_lower": win.lower, "window_upper": win.upper,
           "window_feasible": win.feasible, "rho_admissible": win.rho_admissible}
    for key, fn, arg in (("sde_constant", sde_estimate_constant, L.L1),
                         ("bsde_constant", bsde_estimate_constant, L.L2)):
        try:
            out[key] = fn(arg, rho)
        except WindowError:
            out[key] = None
    return out


def _modes(args, cfg: ExperimentConfig):
    mode = args.mode or cfg.solver.get("mode", "continuation")
    if mode == "both":
        return ["continuation", "direct"]
    if mode not in ("continuation", "direct"):
        raise ConfigError(f"unknown mode {mode!r}")
    return [mode]


def _setup(args):
    cfg = ExperimentConfig.load(args.config)
    lat = cfg.build_lattice()
    w = cfg.weight_config()
    w.check(lat)
    seed = cfg.seed(args.seed)
    out = Path(args.output or cfg.output.get("directory", "out"))
    return cfg, lat, w, seed, out


def _finish(writer: ReportWriter, checks, summary, args) -> int:
    failed = [c.name for c in checks if not c.passed]
    summary["passed"] = not failed
    summary["failed_checks"] = failed
    writer.checks(checks)
    writer.summary(summary)
    status = "PASS" if not failed else "FAIL"
    print(f"{status}: {len(checks) - len(failed)}/{len(checks)} checks passed; reports in {writer.dir}")
    for name in failed:
        print(f"  failed: {name}")
    return EXIT_VERIFY if failed and args.strict else EXIT_OK


# --------------------------------------------------------------------------- subcommands

def cmd_solve_fbsde(args) -> int:
    cfg, lat, w, seed, out = _setup(args)
    t0 = time.perf_counter()
    inst = cfg.build_model(lat, w)
    samples = int(cfg.verify.get("samples", 10_000))
    checks, table = _condition_checks(inst, lat, w, seed, samples)
    sols = {}
    iters = []
    for mode in _modes(args, cfg):
        sol = solve(inst.coeffs, inst.cert, inst.driving, lat, w, cfg.solver_options(mode))
        sols[mode] = sol
        iters += _iteration_rows(sol, mode)
        checks.append(leq(f"{mode} residual", sol.residual, RESIDUAL_TOL))
    main = next(iter(sols.values()))
    N = main.horizon
    wN = WeightConfig(w.rho, N)
    if len(sols) == 2:
        a, b = sols["continuation"], sols["direct"]
        dist = math.sqrt(weighted_norm_sq(a.x - b.x, wN) + weighted_norm_sq(a.y - b.y, wN))
        checks.append(leq("continuation vs direct distance", dist, AGREEMENT_TOL))
    homog = solve(inst.coeffs, inst.cert, DrivingTerms.zeros(inst.dim), lat, w,
                  cfg.solver_options(next(iter(sols))))
    stab = verify_thm41(inst.coeffs, inst.coeffs, main, homog, lat, wN, inst.driving, None)
    checks += stab.checks()
    writer = ReportWriter(out)
    writer.solution(main.x, main.y)
    writer.iterations(iters)
    summary = {"command": "solve-fbsde", "model": inst.name, "case": inst.cert.case.value,
               "sign": inst.cert.sign.value, "rho": w.rho, "horizon": N, "depth": lat.depth,
               "nodes": lat.total_nodes, "modes": list(sols), "seed": seed,
               "residual": {m: s.residual for m, s in sols.items()},
               "converged": {m: s.converged for m, s in sols.items()},
               "data_tail": main.data_tail, "conditions": table, "constants": _constants(inst, w.rho),
               "empirical_norm_constant": stab.ratio, "empirical_stability_constant": stab.stability_ratio,
               "x0": main.x[0][0], "y0": main.y[0][0], "runtime_s": time.perf_counter() - t0,
               "version": __version__}
    return _finish(writer, checks, summary, args)


def _lq_common(args, kind):
    cfg, lat, w, seed, out = _setup(args)
    want = "lq-flq" if kind == "flq" else "lq-blq"
    if cfg.model["name"] != want:
        raise ConfigError(f"solve-{kind} needs model {want!r}, got {cfg.model['name']!r}")
    return cfg, lat, w, seed, out


def _cmd_lq(args, kind) -> int:
    cfg, lat, w, seed, out = _lq_common(args, kind)
    t0 = time.perf_counter()
    inst = cfg.build_model(lat, w)
    spec = inst.lq_spec
    case = str(cfg.model.get("params", {}).get("case", "case1"))
    samples = int(cfg.verify.get("samples", 10_000))
    trials = int(cfg.verify.get("trials", 200))
    checks, table = _condition_checks(inst, lat, w, seed, samples)
    solver, verifier, oracle = ((solve_flq, verify_flq, flq_qp_oracle) if kind == "flq"
                                else (solve_blq, verify_blq, blq_qp_oracle))
    sols = {}
    iters = []
    for mode in _modes(args, cfg):
        sol = solver(spec, lat, w, cfg.solver_options(mode), case=case)
        sols[mode] = sol
        iters += _iteration_rows(sol.fbsde, mode)
        checks.append(leq(f"{mode} hamiltonian residual", sol.hamiltonian_residual, RESIDUAL_TOL))
        checks.append(leq(f"{mode} stationarity residual", sol.stationarity_residual, STATIONARITY_TOL))
    main = next(iter(sols.values()))
    N = main.xbar.horizon
    wN = WeightConfig(w.rho, N)
    if len(sols) == 2:
        a, b = sols["continuation"], sols["direct"]
        checks.append(leq("continuation vs direct cost", abs(a.cost - b.cost), AGREEMENT_TOL))
    ver = verifier(spec, main, lat, wN, trials=trials, seed=seed, include_zero=True)
    checks.append(leq("min cost gap (negated)", -ver.min_gap, GAP_TOL))
    checks.append(leq("cost gap vs quadratic form", ver.max_identity_error, IDENTITY_TOL))
    n_vars = (spec.n if kind == "flq" else 0) + spec.m * sum(lat.level_size(k) for k in range(N))
    max_vars = int(cfg.verify.get("oracleMaxVars", 200))
    oracle_cost = None
    if n_vars <= max_vars:
        qp = oracle(spec, lat, wN)
        oracle_cost = qp.cost
        checks.append(leq("cost vs QP oracle", abs(main.cost - qp.cost), ORACLE_TOL))
        dv = max(float(np.max(np.abs(main.control[k] - qp.control[k]))) for k in range(N)) if N else 0.0
        if kind == "flq":
            dv = max(dv, float(np.max(np.abs(main.initial - qp.initial))))
        checks.append(leq("control vs QP oracle", dv, ORACLE_TOL))
    writer = ReportWriter(out)
    writer.solution(main.xbar, main.ybar, main.control)
    writer.iterations(iters)
    summary = {"command": f"solve-{kind}", "model": inst.name, "case": inst.cert.case.value, "rho": w.rho,
               "horizon": N, "depth": lat.depth, "nodes": lat.total_nodes, "modes": list(sols), "seed": seed,
               "cost": main.cost, "oracle_cost": oracle_cost, "oracle_variables": n_vars,
               "oracle_abs_diff": None if oracle_cost is None else abs(main.cost - oracle_cost),
               "stationarity_residual": main.stationarity_residual,
               "hamiltonian_residual": main.hamiltonian_residual,
               "min_gap": ver.min_gap, "max_identity_error": ver.max_identity_error,
               "max_cross_term": ver.max_cross, "trials": trials, "conditions": table,
               "constants": _constants(inst, w.rho), "runtime_s": time.perf_counter() - t0,
               "version": __version__}
    if main.initial is not None:
        summary["initial_state"] = main.initial
    return _finish(writer, checks, summary, args)


def cmd_solve_flq(args) -> int:
    return _cmd_lq(args, "flq")


def cmd_solve_blq(args) -> int:
    return _cmd_lq(args, "blq")


def cmd_run(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    name = cfg.model["name"]
    if name == "lq-flq":
        return cmd_solve_flq(args)
    if name == "lq-blq":
        return cmd_solve_blq(args)
    return cmd_solve_fbsde(args)


def cmd_check_conditions(args) -> int:
    cfg, lat, w, seed, out = _setup(args)
    inst = cfg.build_model(lat, w)
    samples = int(args.samples or cfg.verify.get("samples", 10_000))
    checks, table = _condition_checks(inst, lat, w, seed, samples)
    width = max(len(n) for n in table) if table else 10
    print(f"{'condition':<{width}}  {'status':<9} {'checked':>8} {'violations':>10}  worst margin")
    for name, row in table.items():
        print(f"{name:<{width}}  {row['status']:<9} {row['checked']:>8} {row['violations']:>10}  "
              f"{row['worst_margin']:.3e}")
    total = sum(r["violations"] for r in table.values())
    print(f"total violations: {total}")
    if args.output:
        writer = ReportWriter(out)
        writer.checks(checks)
        writer.summary({"command": "check-conditions", "model": inst.name, "seed": seed, "samples": samples,
                        "conditions": table, "violations": total, "passed": total == 0})
    return EXIT_OK if total == 0 else EXIT_VERIFY


def cmd_estimate_constants(args) -> int:
    L1, L2, rho = args.L1, args.L2, args.rho
    if args.config:
        cfg = ExperimentConfig.load(args.config)
        lat = cfg.build_lattice()
        w = cfg.weight_config()
        inst = cfg.build_model(lat, w)
        L1 = inst.coeffs.lipschitz.L1 if L1 is None else L1
        L2 = inst.coeffs.lipschitz.L2 if L2 is None else L2
        rho = w.rho if rho is None else rho
    if rho is None or (L1 is None and L2 is None):
        raise ConfigError("estimate-constants needs --rho and at least one of --L1, --L2 (or --config)")
    summary = {"rho": rho}
    if L1 is not None:
        try:
            c = sde_estimate_constant(L1, rho)
            print(f"forward estimate constant (L1={L1:g}, rho={rho:g}): {c:.4f}")
            summary["sde_constant"] = c
        except WindowError as exc:
            print(f"forward estimate constant: undefined ({exc})")
            summary["sde_constant"] = None
    if L2 is not None:
        try:
            c = bsde_estimate_constant(L2, rho)
            print(f"backward estimate constant (L2={L2:g}, rho={rho:g}): {c:.4f}")
            summary["bsde_constant"] = c
        except WindowError as exc:
            print(f"backward estimate constant: undefined ({exc})")
            summary["bsde_constant"] = None
    if L1 is not None and L2 is not None:
        win = parameter_window_check(L1, L2, rho)
        state = "nonempty" if win.feasible else "empty"
        print(f"coupled window: ({win.lower:.6g}, {win.upper:.6g}) {state}; "
              f"24 L1^2 L2^2 = {win.product:.6g}; rho admissible: {win.rho_admissible}")
        summary.update(window_lower=win.lower, window_upper=win.upper, window_feasible=win.feasible,
                       rho_admissible=win.rho_admissible)
    if args.output:
        ReportWriter(args.output).summary({"command": "estimate-constants", **summary})
    return EXIT_OK


def cmd_bench(args) -> int:
    seed = 0 if args.seed is None else args.seed
    noise = _noise(args.noise)
    lat = Lattice(args.depth, noise)
    rng = np.random.default_rng(seed)
    n = args.dim
    rows = []
    print(f"{'level':>5} {'nodes':>9} {'branch_ms':>10} {'cond_exp_ms':>12} {'cond_noise_ms':>14}")
    for k in range(args.depth):
        nk = lat.level_size(k)
        x = rng.standard_normal((nk, n))
        reps = max(1, args.repeat)
        t = time.perf_counter()
        for _ in range(reps):
            nxt = lat.branch(k, x, x)
        tb = (time.perf_counter() - t) / reps
        t = time.perf_counter()
        for _ in range(reps):
            lat.cond_exp(nxt, k + 1)
        tc = (time.perf_counter() - t) / reps
        t = time.perf_counter()
        for _ in range(reps):
            lat.cond_exp_noise(nxt, k + 1)
        tn = (time.perf_counter() - t) / reps
        rows.append({"level": k, "nodes": nk, "branch_ms": 1e3 * tb, "cond_exp_ms": 1e3 * tc,
                     "cond_noise_ms": 1e3 * tn})
        print(f"{k:>5} {nk:>9} {1e3 * tb:>10.3f} {1e3 * tc:>12.3f} {1e3 * tn:>14.3f}")
    rho = 0.5
    w = WeightConfig(rho, args.depth)
    inst = build_model("saturating", random_saturating(rng, n, rho, "case1"), rho, lat, args.depth)
    timings = {}
    for mode in ("continuation", "direct"):
        t = time.perf_counter()
        sol = solve(inst.coeffs, inst.cert, inst.driving, lat, w, SolverOptions(mode=mode))
        timings[mode] = time.perf_counter() - t
        print(f"solve {mode:<12} {timings[mode]:.3f} s  residual {sol.residual:.2e}")
    if args.output:
        out = ReportWriter(args.output)
        out._write("bench.csv", ("level", "nodes", "branch_ms", "cond_exp_ms", "cond_noise_ms"), rows)
        out.summary({"command": "bench", "depth": args.depth, "dim": n, "nodes": lat.total_nodes,
                     "solve_seconds": timings})
    return EXIT_OK


# --------------------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment configuration (YAML or JSON)")
    common.add_argument("--output", help="report directory (overrides output.directory)")
    common.add_argument("--seed", type=int, help="seed for sampled checks (overrides verify.seed)")
    common.add_argument("--strict", action="store_true", help="exit nonzero when any verification fails")
    common.add_argument("--mode", choices=("continuation", "direct", "both"), help="solver mode")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="fbsde-lattice",
                                description="Coupled forward-backward difference equations on finite lattices.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn, doc in (("run", cmd_run, "dispatch on the configured model"),
                          ("solve-fbsde", cmd_solve_fbsde, "solve a coupled system and verify it"),
                          ("solve-flq", cmd_solve_flq, "solve a forward linear-quadratic control problem"),
                          ("solve-blq", cmd_solve_blq, "solve a backward linear-quadratic control problem")):
        sp = sub.add_parser(name, parents=[common], help=doc)
        sp.set_defaults(func=fn, needs_config=True)
    sp = sub.add_parser("check-conditions", parents=[common], help="sample the structural conditions")
    sp.add_argument("--samples", type=int, help="number of sampled node pairs")
    sp.set_defaults(func=cmd_check_conditions, needs_config=True)
    sp = sub.add_parser("estimate-constants", parents=[common], help="a-priori constants and discount window")
    sp.add_argument("--L1", type=float)
    sp.add_argument("--L2", type=float)
    sp.add_argument("--rho", type=float)
    sp.set_defaults(func=cmd_estimate_constants, needs_config=False)
    sp = sub.add_parser("bench", parents=[common], help="per-level timing of the lattice kernels")
    sp.add_argument("--depth", type=int, default=8)
    sp.add_argument("--dim", type=int, default=1)
    sp.add_argument("--noise", default="rademacher")
    sp.add_argument("--repeat", type=int, default=3)
    sp.set_defaults(func=cmd_bench, needs_config=False)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.needs_config and not args.config:
        parser.error(f"{args.command} requires --config")
    try:
        return args.func(args)
    except WindowError as exc:
        print(f"error: discount window violated: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConfigError, SpecError, CaseMismatchError, HorizonError, LatticeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DivergenceError, StepCollapseError, ContractionError, NonFiniteError) as exc:
        print(f"error: solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except FBSDEError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
