"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Tolerances and sample counts are pinned below.  Run standalone with
``python3 tests/test_acceptance.py`` to print the lines without pytest.
"""
import itertools
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lq_instances import random_blq, random_flq  # noqa: E402

from fbsde_lattice.bsde import BackwardGenerator, truncation_study, verify_bsde_estimates  # noqa: E402
from fbsde_lattice.coefficients import (  # noqa: E402
    ConditionSampler,
    check_domination,
    check_lipschitz,
    check_monotonicity,
    parameter_window_check,
)
from fbsde_lattice.fbsde import SolverOptions, duality_report, solve  # noqa: E402
from fbsde_lattice.lattice import Lattice, NoiseModel  # noqa: E402
from fbsde_lattice.lq import (  # noqa: E402
    blq_qp_oracle,
    flq_qp_oracle,
    solve_blq,
    solve_flq,
    verify_blq,
    verify_flq,
)
from fbsde_lattice.models import build_model, random_saturating  # noqa: E402
from fbsde_lattice.sde import (  # noqa: E402
    ForwardCoefficients,
    picard_contraction_bound,
    picard_ratio,
    verify_sde_estimates,
)
from fbsde_lattice.spaces import AdaptedProcess, WeightConfig, weighted_norm_sq  # noqa: E402

# pinned tolerances
C1_TOL, C1_LATTICES, C1_SECONDS = 1e-12, 50, 5.0
C2_INSTANCES, C2_MARGIN, C2_SECONDS = 100, 0.1, 20.0
C3_INSTANCES, C3_PAIRS, C3_SLACK = 10, 100, 1e-9
C4_INSTANCES, C4_MARGIN = 100, 0.1
C5_PER_CASE, C5_AGREE, C5_RESIDUAL, C5_SECONDS, C5_MAX_DEPTH = 20, 1e-6, 1e-8, 120.0, 8
C6_GAP, C6_TELESCOPE = 1e-8, 1e-10
C7_INSTANCES, C7_EPS, C7_LOW, C7_HIGH = 10, 0.1, 1.33, 3.0
LQ_STATIONARITY, LQ_GAP, LQ_IDENTITY, LQ_ORACLE, LQ_TRIALS, LQ_SECONDS = 1e-8, 1e-10, 1e-8, 1e-6, 200, 60.0
C10_PAIRS = 1000


def random_noise(rng):
    size = int(rng.integers(2, 4))
    return NoiseModel.standardized(rng.uniform(-2, 2, size) + np.arange(size) * 3.0, rng.uniform(0.2, 1.0, size))


# --------------------------------------------------------------------------- criterion 1

def _brute_force(lat, v, k):
    """Conditional means over all level-(k+1) paths, grouped by their length-k prefix."""
    sizes = [lat.noise(j).size for j in range(k + 1)]
    num = {}
    numw = {}
    den = {}
    for path in itertools.product(*(range(s) for s in sizes)):
        p = math.prod(lat.noise(j).probs[path[j]] for j in range(k + 1))
        val = v[lat.node_index(path).index]
        w = lat.noise(k).support[path[k]]
        pre = path[:k]
        num[pre] = num.get(pre, 0.0) + p * val
        numw[pre] = numw.get(pre, 0.0) + p * val * w
        den[pre] = den.get(pre, 0.0) + p
    ce = np.zeros((lat.level_size(k), v.shape[1]))
    cn = np.zeros_like(ce)
    for pre in den:
        i = lat.node_index(pre).index if pre else 0
        ce[i] = num[pre] / den[pre]
        cn[i] = numw[pre] / den[pre]
    return ce, cn


def criterion_1():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(C1_LATTICES):
        depth = int(rng.integers(1, 9))
        if rng.random() < 0.5:
            noise = random_noise(rng)
        else:
            noise = [random_noise(rng) for _ in range(depth)]
        lat = Lattice(depth, noise)
        while lat.total_nodes > 20000:
            depth -= 1
            lat = Lattice(depth, noise if isinstance(noise, NoiseModel) else noise[:depth])
        k = int(rng.integers(0, depth))
        v = rng.standard_normal((lat.level_size(k + 1), int(rng.integers(1, 3))))
        ce, cn = _brute_force(lat, v, k)
        worst = max(worst, float(np.max(np.abs(lat.cond_exp(v, k + 1) - ce))),
                    float(np.max(np.abs(lat.cond_exp_noise(v, k + 1) - cn))))
    dt = time.perf_counter() - t0
    ok = worst <= C1_TOL and dt < C1_SECONDS
    return ok, f"conditional-expectation oracle: {C1_LATTICES} lattices, max err {worst:.2e} (tol {C1_TOL:g}), {dt:.2f}s (< {C1_SECONDS:g}s)"


# --------------------------------------------------------------------------- criteria 2, 3

def random_forward(rng, lat, n):
    """Nonlinear forward coefficients with node-dependent offsets and a known Lipschitz bound."""
    A = rng.uniform(-1, 1, (n, n))
    C = rng.uniform(-1, 1, (n, n))
    a1, a2 = rng.uniform(0, 0.5, 2)
    offs = [rng.uniform(-1, 1, (lat.level_size(k), n)) for k in range(lat.depth + 1)]
    L1 = max(np.linalg.norm(A, 2) + a1, np.linalg.norm(C, 2) + a2)

    def drift(k, x):
        return x @ A.T + a1 * np.sin(x) + offs[k]

    def diffusion(k, x):
        return x @ C.T + a2 * np.tanh(x) + 0.5 * offs[k]

    return ForwardCoefficients(drift, diffusion, rng.uniform(-1, 1, n), float(L1))


def criterion_2():
    rng = np.random.default_rng(202)
    t0 = time.perf_counter()
    passed = 0
    worst = math.inf
    for _ in range(C2_INSTANCES):
        n = int(rng.integers(1, 3))
        lat = Lattice(int(rng.integers(2, 7)), NoiseModel.rademacher() if rng.random() < 0.6 else NoiseModel.three_point())
        c, cb = random_forward(rng, lat, n), random_forward(rng, lat, n)
        rho = math.log(4 * c.lipschitz ** 2) + C2_MARGIN + float(rng.uniform(0, 1))
        rep = verify_sde_estimates(c, cb, lat, WeightConfig(rho, lat.depth))
        passed += rep.passed
        worst = min(worst, min(ch.margin / max(abs(ch.rhs), 1e-300) for ch in rep.checks()))
    dt = time.perf_counter() - t0
    ok = passed == C2_INSTANCES and dt < C2_SECONDS
    return ok, f"forward estimates: {passed}/{C2_INSTANCES} pass, min relative margin {worst:.3f}, {dt:.2f}s (< {C2_SECONDS:g}s)"


def criterion_3():
    rng = np.random.default_rng(303)
    worst_excess = -math.inf
    total = 0
    for _ in range(C3_INSTANCES):
        n = int(rng.integers(1, 3))
        lat = Lattice(int(rng.integers(2, 6)), NoiseModel.rademacher())
        c = random_forward(rng, lat, n)
        rho = math.log(4 * c.lipschitz ** 2) + float(rng.uniform(0.1, 1.5))
        w = WeightConfig(rho, lat.depth)
        bound = picard_contraction_bound(c.lipschitz, rho)
        for j in range(C3_PAIRS):
            scale = 10.0 ** rng.uniform(-3, 1)
            x = AdaptedProcess(lat, [rng.standard_normal((lat.level_size(k), n)) for k in range(lat.depth + 1)])
            xb = x + AdaptedProcess(lat, [scale * rng.standard_normal((lat.level_size(k), n))
                                          for k in range(lat.depth + 1)])
            worst_excess = max(worst_excess, picard_ratio(c, x, xb, lat, w) - bound)
            total += 1
    ok = worst_excess <= C3_SLACK
    return ok, f"Picard contraction: {total} pairs, max(ratio - bound) = {worst_excess:.3e} (<= {C3_SLACK:g})"


# --------------------------------------------------------------------------- criterion 4

def random_generator(rng, lat, n, rho_fn):
    """Generator ``a y' + c z' + s sin(y') + f0`` with data decaying inside the weighted space."""
    a = rng.uniform(-1, 1, (n, n))
    c = rng.uniform(-1, 1, (n, n))
    s = float(rng.uniform(0, 0.5))
    L2 = max(np.linalg.norm(a, 2) + s, np.linalg.norm(c, 2))
    rho = rho_fn(L2)
    offs = []
    for k in range(lat.depth):
        raw = rng.uniform(-1, 1, (lat.level_size(k), n))
        rms = math.sqrt(float(lat.measure(k) @ np.einsum("ij,ij->i", raw, raw)))
        offs.append(raw / rms * math.exp(rho * (k + 1) / 2) * 0.5 ** k)

    def gen(k, yp, zp):
        return yp @ a.T + zp @ c.T + s * np.sin(yp) + offs[k]

    return BackwardGenerator(gen, n, float(L2)), rho


def criterion_4():
    rng = np.random.default_rng(404)
    passed = monotone = 0
    for _ in range(C4_INSTANCES):
        n = int(rng.integers(1, 3))
        lat = Lattice(int(rng.integers(3, 7)), NoiseModel.rademacher() if rng.random() < 0.6 else NoiseModel.three_point())
        shift = float(rng.uniform(0, 1))
        g, rho = random_generator(rng, lat, n, lambda L2: -math.log(6 * L2 ** 2) - C4_MARGIN - shift)
        # the comparison generator shares the discount of the first one
        gb, _ = random_generator(rng, lat, n, lambda L2: rho)
        w = WeightConfig(rho, lat.depth)
        passed += verify_bsde_estimates(g, gb, lat, w).passed
        monotone += truncation_study(g, lat, w, range(1, lat.depth + 1)).monotone
    ok = passed == C4_INSTANCES and monotone == C4_INSTANCES
    return ok, (f"backward estimates: {passed}/{C4_INSTANCES} pass; truncation distances monotone on "
                f"{monotone}/{C4_INSTANCES}")


# --------------------------------------------------------------------------- criteria 5, 6

def _instance_lattice(rng, depth):
    return Lattice(depth, NoiseModel.three_point() if depth <= 5 and rng.random() < 0.5 else NoiseModel.rademacher())


def solved_pairs():
    """Random certified saturating instances per case, each with a perturbed companion."""
    if hasattr(solved_pairs, "cache"):
        return solved_pairs.cache
    rng = np.random.default_rng(505)
    out = []
    t0 = time.perf_counter()
    for case in ("case1", "case2"):
        for i in range(C5_PER_CASE):
            depth = int(rng.integers(3, C5_MAX_DEPTH + 1))
            lat = _instance_lattice(rng, depth)
            n = int(rng.integers(1, 4))
            rho = float(rng.uniform(0.0, 1.5))
            w = WeightConfig(rho, depth)
            params = random_saturating(rng, n, rho, case, strength=float(rng.uniform(0.1, 0.5)))
            inst = build_model("saturating", params, rho, lat, depth)
            bar_params = dict(params, psi=(np.asarray(params["psi"]) + rng.uniform(-0.2, 0.2, n)).tolist(),
                              kappa3=params["kappa3"] * 0.5, beta1=params["beta1"] * 1.2)
            bar = build_model("saturating", bar_params, rho, lat, depth)
            sampler = ConditionSampler(lat, n, depth, n_samples=2000, seed=i)
            certified = all(
                rep.ok for m in (inst, bar) for rep in (
                    check_domination(m.coeffs, m.cert, sampler),
                    check_monotonicity(m.coeffs, m.cert, rho, sampler),
                    check_lipschitz(m.coeffs, sampler)))
            cont = solve(inst.coeffs, inst.cert, inst.driving, lat, w, SolverOptions())
            direct = solve(inst.coeffs, inst.cert, inst.driving, lat, w, SolverOptions(mode="direct"))
            other = solve(bar.coeffs, bar.cert, bar.driving, lat, w, SolverOptions())
            out.append(dict(case=case, lat=lat, w=w, inst=inst, bar=bar, certified=certified,
                            cont=cont, direct=direct, other=other))
    solved_pairs.cache = (out, time.perf_counter() - t0)
    return solved_pairs.cache


def criterion_5():
    pairs, dt = solved_pairs()
    worst_dist = worst_res = 0.0
    per_case = {"case1": 0, "case2": 0}
    for p in pairs:
        w = p["w"]
        a, b = p["cont"], p["direct"]
        dist = math.sqrt(weighted_norm_sq(a.x - b.x, w) + weighted_norm_sq(a.y - b.y, w))
        worst_dist = max(worst_dist, dist)
        worst_res = max(worst_res, a.residual, b.residual)
        per_case[p["case"]] += p["certified"]
    ok = (worst_dist <= C5_AGREE and worst_res <= C5_RESIDUAL and dt < C5_SECONDS
          and min(per_case.values()) >= C5_PER_CASE)
    return ok, (f"cross-solver agreement: certified {per_case['case1']}+{per_case['case2']} instances, "
                f"max distance {worst_dist:.2e} (<= {C5_AGREE:g}), max residual {worst_res:.2e} "
                f"(<= {C5_RESIDUAL:g}), {dt:.1f}s (< {C5_SECONDS:g}s)")


def criterion_6():
    pairs, _ = solved_pairs()
    worst_gap = worst_tel = 0.0
    ok = True
    for p in pairs:
        rep = duality_report(p["inst"].coeffs, p["bar"].coeffs, p["cont"], p["other"], p["w"].rho, p["lat"],
                             p["inst"].driving, p["bar"].driving)
        tail = p["cont"].data_tail + p["other"].data_tail
        ok &= abs(rep.gap) <= C6_GAP + tail and rep.telescoping_error <= C6_TELESCOPE
        worst_gap = max(worst_gap, abs(rep.gap))
        worst_tel = max(worst_tel, rep.telescoping_error)
    return ok, (f"duality identity: {len(pairs)} pairs, max |gap| {worst_gap:.2e} (<= {C6_GAP:g} + tail), "
                f"max telescoping error {worst_tel:.2e} (<= {C6_TELESCOPE:g})")


# --------------------------------------------------------------------------- criterion 7

def criterion_7():
    rng = np.random.default_rng(707)
    ratios = []
    for i in range(C7_INSTANCES):
        case = "case1" if i % 2 == 0 else "case2"
        depth = int(rng.integers(3, 7))
        lat = _instance_lattice(rng, depth)
        n = int(rng.integers(1, 3))
        rho = float(rng.uniform(0.0, 1.0))
        w = WeightConfig(rho, depth)
        params = random_saturating(rng, n, rho, case)
        direction = rng.uniform(-1, 1, n)
        base = build_model("saturating", params, rho, lat, depth)
        ref = solve(base.coeffs, base.cert, base.driving, lat, w)
        dists = []
        for eps in (C7_EPS, C7_EPS / 2):
            # moving b by eps * direction is a shift of the drift forcing
            pert = build_model("saturating", dict(params, psi=(np.asarray(params["psi"]) + eps * direction).tolist()),
                               rho, lat, depth)
            sol = solve(pert.coeffs, pert.cert, pert.driving, lat, w)
            dists.append(math.sqrt(weighted_norm_sq(sol.x - ref.x, w) + weighted_norm_sq(sol.y - ref.y, w)))
        ratios.append(dists[0] / dists[1])
    lo, hi = min(ratios), max(ratios)
    ok = C7_LOW <= lo and hi <= C7_HIGH
    return ok, f"stability scaling: {C7_INSTANCES} instances, distance ratios in [{lo:.4f}, {hi:.4f}] (within [{C7_LOW}, {C7_HIGH}])"


# --------------------------------------------------------------------------- criteria 8, 9

def _lq_suite(kind):
    rng = np.random.default_rng(808 if kind == "flq" else 909)
    t0 = time.perf_counter()
    make, solver, verifier, oracle = ((random_flq, solve_flq, verify_flq, flq_qp_oracle) if kind == "flq"
                                      else (random_blq, solve_blq, verify_blq, blq_qp_oracle))
    stat = ident = oracle_err = 0.0
    min_gap = math.inf
    count = 0
    for i in range(6):
        lat = Lattice(4, NoiseModel.rademacher() if i % 3 else NoiseModel.three_point())
        w = None
        spec = make(rng, lat, 4, per_level=(i % 2 == 1))
        w = WeightConfig(spec.rho, 4)
        case = "case1" if i < 3 else "case2"
        sol = solver(spec, lat, w, case=case)
        ver = verifier(spec, sol, lat, w, trials=LQ_TRIALS, seed=i)
        qp = oracle(spec, lat, w)
        err = abs(sol.cost - qp.cost)
        err = max(err, max(float(np.max(np.abs(sol.control[k] - qp.control[k]))) for k in range(4)))
        if kind == "flq":
            err = max(err, float(np.max(np.abs(sol.initial - qp.initial))))
        stat = max(stat, sol.stationarity_residual, sol.hamiltonian_residual)
        ident = max(ident, ver.max_identity_error)
        min_gap = min(min_gap, ver.min_gap)
        oracle_err = max(oracle_err, err)
        count += 1
    dt = time.perf_counter() - t0
    ok = (stat <= LQ_STATIONARITY and min_gap >= -LQ_GAP and ident <= LQ_IDENTITY and oracle_err <= LQ_ORACLE
          and dt < LQ_SECONDS)
    label = "FLQ" if kind == "flq" else "BLQ"
    return ok, (f"{label} optimality: {count} instances x {LQ_TRIALS} perturbations, stationarity {stat:.1e} "
                f"(<= {LQ_STATIONARITY:g}), min gap {min_gap:.2e} (>= -{LQ_GAP:g}), gap-identity err {ident:.1e} "
                f"(<= {LQ_IDENTITY:g}), QP oracle err {oracle_err:.1e} (<= {LQ_ORACLE:g}), {dt:.1f}s (< {LQ_SECONDS:g}s)")


def criterion_8():
    return _lq_suite("flq")


def criterion_9():
    return _lq_suite("blq")


# --------------------------------------------------------------------------- criterion 10

def criterion_10():
    rng = np.random.default_rng(1010)
    mismatches = interval_mismatches = 0
    for _ in range(C10_PAIRS):
        L1, L2 = 10.0 ** rng.uniform(-3, 1, 2)
        if rng.random() < 0.2:
            L2 = (1.0 / math.sqrt(24.0)) / L1 * (1.0 + rng.uniform(-1e-6, 1e-6))
        rep = parameter_window_check(L1, L2)
        exact = 24.0 * L1 ** 2 * L2 ** 2 < 1.0
        mismatches += rep.feasible != exact
        interval_mismatches += (rep.lower < rep.upper) != exact
    ok = mismatches == 0
    return ok, (f"window arithmetic: {C10_PAIRS} pairs, feasibility mismatches {mismatches} (must be 0); "
                f"log-interval disagreements {interval_mismatches} (informational, all near the boundary)")


# --------------------------------------------------------------------------- pytest entry points

CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 11)}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, acceptance):
    ok, detail = CRITERIA[number]()
    acceptance(number, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for i, fn in CRITERIA.items():
        ok, detail = fn()
        failed += not ok
        print(f"C{i:<2} {'PASS' if ok else 'FAIL'}  {detail}", flush=True)
    sys.exit(1 if failed else 0)
