"""Fully coupled forward-backward difference equations on a truncated lattice.

The system with coefficients ``(Lambda, b, sigma, f)`` and driving terms
``(xi, phi, psi, gamma)`` reads, for ``k = 0..N-1``::

    x_{k+1} = b(k, theta_k) + psi_k + (sigma(k, theta_k) + gamma_k) w_k
    y_k     = -(f(k+1, theta_k) + phi_k)
    x_0     = Lambda(y_0) + xi,        y_N = 0

with ``theta_k = (x_k, E[y_{k+1} | node], E[y_{k+1} w_k | node])``.

Two solvers are provided: the homotopy continuation in ``alpha`` starting
from the decoupled regularized system, and a damped Gauss-Seidel fixed
point on the whole truncated system used as a cross-check.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bsde import backward_recursion
from .coefficients import (
    Case,
    CoefficientSet,
    DomMonCert,
    DrivingTerms,
    homotopy_coefficients,
    parameter_window_check,
    regularizer_coefficients,
    zero_coefficients,
)
from .errors import (
    ContractionError,
    DivergenceError,
    NonFiniteError,
    StepCollapseError,
    WindowError,
)
from .lattice import Lattice
from .reports import InequalityCheck
from .sde import ForwardCoefficients, solve_sde
from .spaces import AdaptedProcess, WeightConfig, level_sq_means, tail_bound

log = logging.getLogger(__name__)


@dataclass
class SolverOptions:
    """Iteration control.

    ``inner_tol`` is the stopping threshold of every fixed-point loop: the
    discounted pair distance between successive continuation iterates, or
    the largest node-wise update of a direct sweep.  ``max_inner_iters``
    caps both loops.  ``nested`` switches the continuation to the literal
    recursive construction on a fixed ``alpha`` grid of spacing
    ``delta_init``; its cost grows geometrically with the number of steps.
    """

    mode: str = "continuation"
    delta_init: float = 0.25
    inner_tol: float = 1e-12
    max_inner_iters: int = 400
    damping: float = 1.0
    truncation_horizon: int | None = None
    min_delta: float = 1e-6
    nested: bool = False
    enforce_window: bool = True
    patience: int = 3

    def __post_init__(self):
        if self.mode not in ("continuation", "direct"):
            raise ValueError(f"unknown solver mode {self.mode!r}")
        if not 0.0 < self.delta_init <= 1.0:
            raise ValueError("delta_init must lie in (0, 1]")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")
        if self.inner_tol <= 0 or self.max_inner_iters < 1:
            raise ValueError("inner_tol must be positive and max_inner_iters >= 1")

    def horizon(self, w: WeightConfig) -> int:
        return w.horizon if self.truncation_horizon is None else int(self.truncation_horizon)


@dataclass(frozen=True)
class AlphaStep:
    alpha_from: float
    alpha_to: float
    delta: float
    iterations: int
    ratios: tuple
    accepted: bool
    note: str = ""

    @property
    def max_ratio(self) -> float:
        return max(self.ratios) if self.ratios else 0.0


@dataclass
class FBSDESolution:
    x: AdaptedProcess
    y: AdaptedProcess
    residual: float = math.nan
    iterations: list = field(default_factory=list)
    alpha_trace: list = field(default_factory=list)
    converged: bool = True
    mode: str = ""
    data_tail: float = 0.0

    @property
    def horizon(self) -> int:
        return self.x.horizon


# --------------------------------------------------------------------------- sweeps

def projections(lat: Lattice, y: AdaptedProcess, N: int):
    """``(y'_{k+1}, z'_{k+1})`` on every level ``k < N``."""
    yp = [lat.cond_exp(y[k + 1], k + 1) for k in range(N)]
    zp = [lat.cond_exp_noise(y[k + 1], k + 1) for k in range(N)]
    return yp, zp


def forward_sweep(coeffs: CoefficientSet, d: DrivingTerms, lat: Lattice, N: int,
                  x0: np.ndarray, yp, zp) -> AdaptedProcess:
    """State recursion with the backward projections frozen."""
    def drift(k, x):
        return coeffs.eval_b(k, x, yp[k], zp[k]) + d.psi_at(k, x.shape[0])

    def diffusion(k, x):
        return coeffs.eval_sigma(k, x, yp[k], zp[k]) + d.gamma_at(k, x.shape[0])

    return solve_sde(ForwardCoefficients(drift, diffusion, np.asarray(x0, dtype=float)),
                     lat, WeightConfig(0.0, N))


def backward_sweep(coeffs: CoefficientSet, d: DrivingTerms, lat: Lattice, N: int,
                   x: AdaptedProcess) -> AdaptedProcess:
    """Backward relation with the state frozen; the generator is negated for the kernel."""
    def gen(k, yp, zp):
        return -(coeffs.eval_f(k, x[k], yp, zp) + d.phi_at(k, yp.shape[0]))

    return backward_recursion(gen, coeffs.dim, lat, N)


def initial_value(coeffs: CoefficientSet, d: DrivingTerms, y0: np.ndarray) -> np.ndarray:
    return coeffs.eval_Lambda(np.asarray(y0, dtype=float)[0]) + d.xi


def _residual(coeffs, d, lat, x, y, N) -> float:
    res = float(np.linalg.norm(x[0][0] - initial_value(coeffs, d, y[0])))
    res = max(res, float(np.max(np.linalg.norm(y[N], axis=1))))
    yp, zp = projections(lat, y, N)
    for k in range(N):
        nk = lat.level_size(k)
        drift = coeffs.eval_b(k, x[k], yp[k], zp[k]) + d.psi_at(k, nk)
        diff = coeffs.eval_sigma(k, x[k], yp[k], zp[k]) + d.gamma_at(k, nk)
        fwd = x[k + 1] - lat.branch(k, drift, diff)
        bwd = y[k] + coeffs.eval_f(k, x[k], yp[k], zp[k]) + d.phi_at(k, nk)
        res = max(res, float(np.max(np.linalg.norm(fwd, axis=1))),
                  float(np.max(np.linalg.norm(bwd, axis=1))))
    return res


def fbsde_residual(coeffs: CoefficientSet, d: DrivingTerms, sol: FBSDESolution,
                   lat: Lattice, w: WeightConfig | None = None) -> float:
    """Largest node-wise violation of the forward, backward and initial relations."""
    N = sol.x.horizon if w is None else w.horizon
    return _residual(coeffs, d, lat, sol.x, sol.y, N)


def _pair_dist(x1, y1, x2, y2, rho, N) -> float:
    disc = np.exp(-rho * np.arange(N + 1))
    return float(np.sqrt(disc @ (level_sq_means(x1 - x2, N) + level_sq_means(y1 - y2, N))))


def _max_change(a: AdaptedProcess, b: AdaptedProcess) -> float:
    return max(float(np.max(np.abs(u - v))) for u, v in zip(a.values, b.values))


def _data_tail(d: DrivingTerms, w: WeightConfig, N: int) -> float:
    return sum(tail_bound(p, w, N) for p in d.processes())


def _check_window(coeffs, w, opts):
    if not opts.enforce_window:
        return
    rep = parameter_window_check(coeffs.lipschitz.L1, coeffs.lipschitz.L2, w.rho)
    if not rep.rho_admissible:
        raise WindowError(
            f"rho={w.rho} outside the admissible window ({rep.lower:.6g}, {rep.upper:.6g})"
            f" for L1={rep.L1:g}, L2={rep.L2:g}" + ("" if rep.feasible else "; window is empty"))


def _sweeps(coeffs, d, lat, N, opts, start, tol, max_iters, label):
    """Damped Gauss-Seidel sweeps; returns ``(x, y, iterations, log)``."""
    n = coeffs.dim
    if start is None:
        x = AdaptedProcess.zeros(lat, n, N)
        y = AdaptedProcess.zeros(lat, n, N)
        x.values[0] = d.xi[None].copy()
    else:
        x, y = start
    damp = opts.damping
    history = []
    best = math.inf
    for it in range(1, max_iters + 1):
        try:
            x0 = (1.0 - damp) * x[0][0] + damp * initial_value(coeffs, d, y[0])
            yp, zp = projections(lat, y, N)
            xn = forward_sweep(coeffs, d, lat, N, x0, yp, zp)
            yn = backward_sweep(coeffs, d, lat, N, xn)
        except NonFiniteError as exc:
            raise DivergenceError(f"{label}: sweep {it} produced non-finite values") from exc
        change = max(_max_change(xn, x), _max_change(yn, y))
        history.append(change)
        x, y = xn, yn
        if change <= tol:
            return x, y, it, history
        if not math.isfinite(change) or change > 1e12 * max(best, 1.0):
            raise DivergenceError(f"{label}: sweeps diverged (update {change:.3e} at sweep {it})")
        best = min(best, change)
    raise DivergenceError(
        f"{label}: no convergence after {max_iters} sweeps (last update {history[-1]:.3e})")


def solve_direct(coeffs: CoefficientSet, cert: DomMonCert | None, d: DrivingTerms,
                 lat: Lattice, w: WeightConfig, opts: SolverOptions | None = None,
                 start=None) -> FBSDESolution:
    """Global damped fixed point: forward sweep given ``y``, backward sweep given ``x``."""
    opts = opts or SolverOptions(mode="direct")
    if cert is not None:
        cert.validate()
    _check_window(coeffs, w, opts)
    N = opts.horizon(w)
    w.check(lat)
    if N > lat.depth:
        raise ValueError("truncation horizon exceeds lattice depth")
    x, y, its, hist = _sweeps(coeffs, d, lat, N, opts, start, opts.inner_tol,
                              opts.max_inner_iters, "direct")
    res = _residual(coeffs, d, lat, x, y, N)
    log_rows = [{"sweep": i + 1, "update": h} for i, h in enumerate(hist)]
    return FBSDESolution(x, y, res, log_rows, [], True, "direct", _data_tail(d, w, N))


# --------------------------------------------------------------------------- continuation

def solve_alpha0(cert: DomMonCert, d: DrivingTerms, lat: Lattice, w: WeightConfig,
                 horizon: int | None = None) -> FBSDESolution:
    """Exact solve of the decoupled regularized system by two ordered sweeps."""
    cert.validate()
    N = w.horizon if horizon is None else horizon
    reg = regularizer_coefficients(cert)
    n = cert.dim
    if cert.case is Case.CASE1:
        # generator vanishes: backward first, then the state
        y = backward_sweep(reg, d, lat, N, AdaptedProcess.zeros(lat, n, N))
        yp, zp = projections(lat, y, N)
        x = forward_sweep(reg, d, lat, N, initial_value(reg, d, y[0]), yp, zp)
    else:
        # state equation is free of y and x_0 = xi
        zeros = [np.zeros((lat.level_size(k), n)) for k in range(N)]
        x = forward_sweep(reg, d, lat, N, d.xi, zeros, zeros)
        y = backward_sweep(reg, d, lat, N, x)
    res = _residual(reg, d, lat, x, y, N)
    return FBSDESolution(x, y, res, [], [], True, "alpha0", _data_tail(d, w, N))


def tilde_driving_terms(coeffs: CoefficientSet, base: CoefficientSet, cert: DomMonCert,
                        d: DrivingTerms, delta: float, lat: Lattice, N: int,
                        x: AdaptedProcess, y: AdaptedProcess) -> DrivingTerms:
    """Driving terms absorbing ``delta * (target - regularizer)`` evaluated on an iterate.

    ``coeffs`` is the target system and ``base`` the regularizer; the
    resulting data turn the system at ``alpha0`` into the one at
    ``alpha0 + delta`` whenever the iterate is its solution.
    """
    yp, zp = projections(lat, y, N)
    phi, psi, gamma = [], [], []
    for k in range(N):
        nk = lat.level_size(k)
        a = (x[k], yp[k], zp[k])
        phi.append(d.phi_at(k, nk) + delta * (coeffs.eval_f(k, *a) - base.eval_f(k, *a)))
        psi.append(d.psi_at(k, nk) + delta * (coeffs.eval_b(k, *a) - base.eval_b(k, *a)))
        gamma.append(d.gamma_at(k, nk) + delta * (coeffs.eval_sigma(k, *a) - base.eval_sigma(k, *a)))
    y0 = y[0][0]
    xi = d.xi + delta * (coeffs.eval_Lambda(y0) - base.eval_Lambda(y0))
    return DrivingTerms(xi, AdaptedProcess(lat, phi), AdaptedProcess(lat, psi),
                        AdaptedProcess(lat, gamma))


BaseSolver = Callable[[DrivingTerms, object], tuple]


def continuation_step(base_solver: BaseSolver, alpha0: float, delta: float,
                      coeffs: CoefficientSet, cert: DomMonCert, d: DrivingTerms,
                      lat: Lattice, w: WeightConfig, opts: SolverOptions,
                      start: tuple | None = None):
    """Picard iteration for the system at ``alpha0 + delta``.

    ``base_solver(data, warm)`` returns ``(x, y)`` solving the system at
    ``alpha0`` with driving terms ``data``.  Returns the fixed point and an
    :class:`AlphaStep` record; raises :class:`ContractionError` when the
    successive-iterate ratio stays above one for ``opts.patience`` rounds
    or no convergence occurs within ``opts.max_inner_iters``.
    """
    N = opts.horizon(w)
    if start is None:
        start = base_solver(d, None)
    x, y = start
    if delta == 0.0:
        return (x, y), AlphaStep(alpha0, alpha0, 0.0, 0, (), True)
    base = regularizer_coefficients(cert)
    ratios = []
    prev = None
    expanding = 0
    for it in range(1, opts.max_inner_iters + 1):
        dt = tilde_driving_terms(coeffs, base, cert, d, delta, lat, N, x, y)
        X, Y = base_solver(dt, (x, y) if prev is None else (x, y, prev))
        dist = _pair_dist(X, Y, x, y, w.rho, N)
        if not math.isfinite(dist):
            raise ContractionError(f"non-finite iterate at alpha={alpha0 + delta:g}")
        if prev is not None and prev > 0:
            r = dist / prev
            ratios.append(r)
            expanding = expanding + 1 if r > 1.0 else 0
            if expanding >= opts.patience:
                raise ContractionError(
                    f"step {alpha0:g}->{alpha0 + delta:g} not contracting (ratio {r:.3g})")
        x, y, prev = X, Y, dist
        if dist <= opts.inner_tol:
            return (x, y), AlphaStep(alpha0, alpha0 + delta, delta, it, tuple(ratios), True)
    raise ContractionError(
        f"step {alpha0:g}->{alpha0 + delta:g}: no convergence in {opts.max_inner_iters} iterations")


def _flat_base_solver(coeffs, cert, alpha0, lat, w, opts):
    """Solver of the ``alpha0`` system: exact at 0, warm-started sweeps otherwise."""
    N = opts.horizon(w)
    if alpha0 == 0.0:
        def solve(data, warm):
            s = solve_alpha0(cert, data, lat, w, N)
            return s.x, s.y
        return solve
    system = homotopy_coefficients(coeffs, cert, alpha0)

    def solve(data, warm):
        start = None
        tol = opts.inner_tol * 0.1
        if warm is not None:
            start = (warm[0], warm[1])
            if len(warm) == 3:
                # inexact inner solves while the outer iteration is still far out
                tol = max(tol, min(1e-3 * warm[2], 1e-4))
        x, y, _, _ = _sweeps(system, data, lat, N, opts, start, tol,
                             opts.max_inner_iters, f"inner solve at alpha={alpha0:g}")
        return x, y
    return solve


def _nested_base_solver(coeffs, cert, grid, j, lat, w, opts):
    """Literal recursion: the ``grid[j]`` system is solved by continuation from ``grid[j-1]``."""
    if j == 0:
        return _flat_base_solver(coeffs, cert, 0.0, lat, w, opts)
    inner = _nested_base_solver(coeffs, cert, grid, j - 1, lat, w, opts)
    delta = grid[j] - grid[j - 1]

    def solve(data, warm):
        (x, y), _ = continuation_step(inner, grid[j - 1], delta, coeffs, cert, data, lat, w, opts)
        return x, y
    return solve


def solve_continuation(coeffs: CoefficientSet, cert: DomMonCert, d: DrivingTerms,
                       lat: Lattice, w: WeightConfig,
                       opts: SolverOptions | None = None) -> FBSDESolution:
    """Advance ``alpha`` from 0 to 1 by contraction steps.

    The step starts at ``opts.delta_init``, halves whenever a step fails to
    contract and doubles (up to ``delta_init``) after each accepted step.
    """
    opts = opts or SolverOptions()
    cert.validate()
    _check_window(coeffs, w, opts)
    w.check(lat)
    N = opts.horizon(w)
    if N > lat.depth:
        raise ValueError("truncation horizon exceeds lattice depth")
    trace = []
    if opts.nested:
        steps = max(1, int(round(1.0 / opts.delta_init)))
        grid = [i / steps for i in range(steps + 1)]
        base = _nested_base_solver(coeffs, cert, grid, steps - 1, lat, w, opts)
        (x, y), rec = continuation_step(base, grid[-2], grid[-1] - grid[-2], coeffs, cert,
                                        d, lat, w, opts)
        trace.append(rec)
    else:
        s0 = solve_alpha0(cert, d, lat, w, N)
        x, y = s0.x, s0.y
        alpha, delta = 0.0, opts.delta_init
        while alpha < 1.0:
            step = min(delta, 1.0 - alpha)
            base = _flat_base_solver(coeffs, cert, alpha, lat, w, opts)
            try:
                (xn, yn), rec = continuation_step(base, alpha, step, coeffs, cert, d, lat, w,
                                                  opts, start=(x, y))
            except (ContractionError, DivergenceError) as exc:
                trace.append(AlphaStep(alpha, alpha + step, step, 0, (), False, str(exc)))
                log.info("continuation step rejected: %s", exc)
                delta = step / 2.0
                if delta < opts.min_delta:
                    raise StepCollapseError(
                        f"alpha step fell below {opts.min_delta:g} at alpha={alpha:g}; "
                        "the certificate is likely invalid") from exc
                continue
            trace.append(rec)
            x, y = xn, yn
            alpha = 1.0 if 1.0 - (alpha + step) < 1e-15 else alpha + step
            delta = min(2.0 * step, opts.delta_init)
    res = _residual(coeffs, d, lat, x, y, N)
    rows = [{"alpha_from": r.alpha_from, "alpha_to": r.alpha_to, "delta": r.delta,
             "iterations": r.iterations, "max_ratio": r.max_ratio, "accepted": r.accepted,
             "note": r.note} for r in trace]
    return FBSDESolution(x, y, res, rows, trace, res <= 10 * opts.inner_tol or res <= 1e-8,
                         "continuation", _data_tail(d, w, N))


def solve(coeffs, cert, d, lat, w, opts: SolverOptions | None = None) -> FBSDESolution:
    opts = opts or SolverOptions()
    if opts.mode == "direct":
        return solve_direct(coeffs, cert, d, lat, w, opts)
    return solve_continuation(coeffs, cert, d, lat, w, opts)


# --------------------------------------------------------------------------- verification

def _effective_pairing(lat, rho, k, coeffs, d, x, yp, zp, coeffs_bar, d_bar, xb, ypb, zpb):
    nk = lat.level_size(k)
    th, thb = (x[k], yp[k], zp[k]), (xb[k], ypb[k], zpb[k])
    df = coeffs.eval_f(k, *th) + d.phi_at(k, nk) - coeffs_bar.eval_f(k, *thb) - d_bar.phi_at(k, nk)
    db = coeffs.eval_b(k, *th) + d.psi_at(k, nk) - coeffs_bar.eval_b(k, *thb) - d_bar.psi_at(k, nk)
    ds = (coeffs.eval_sigma(k, *th) + d.gamma_at(k, nk)
          - coeffs_bar.eval_sigma(k, *thb) - d_bar.gamma_at(k, nk))
    e = np.exp(-rho)
    node = (np.einsum("ij,ij->i", df, th[0] - thb[0])
            + e * np.einsum("ij,ij->i", db, th[1] - thb[1])
            + e * np.einsum("ij,ij->i", ds, th[2] - thb[2]))
    return float(lat.measure(k) @ node)


@dataclass(frozen=True)
class DualityReport:
    gap: float
    telescoping_lhs: np.ndarray
    telescoping_rhs: np.ndarray

    @property
    def telescoping_error(self) -> float:
        if self.telescoping_lhs.size == 0:
            return 0.0
        return float(np.max(np.abs(self.telescoping_lhs - self.telescoping_rhs)))


def duality_report(coeffs: CoefficientSet, coeffs_bar: CoefficientSet, sol: FBSDESolution,
                   sol_bar: FBSDESolution, rho: float, lat: Lattice,
                   d: DrivingTerms | None = None, d_bar: DrivingTerms | None = None) -> DualityReport:
    """Duality functional of two solutions and its level-by-level decomposition.

    Driving terms are folded into their coefficients.  For exact solutions
    of the truncated systems the functional vanishes, and level ``k`` of the
    telescoping sum, ``E[e^{-rho(k+1)}<x^_{k+1}, y^_{k+1}> - e^{-rho k}<x^_k, y^_k>]``,
    equals the discounted expected pairing at level ``k``.
    """
    n = coeffs.dim
    d = d or DrivingTerms.zeros(n)
    d_bar = d_bar or DrivingTerms.zeros(n)
    N = sol.x.horizon
    x, y, xb, yb = sol.x, sol.y, sol_bar.x, sol_bar.y
    yp, zp = projections(lat, y, N)
    ypb, zpb = projections(lat, yb, N)
    rhs = np.array([np.exp(-rho * k) * _effective_pairing(lat, rho, k, coeffs, d, x, yp, zp,
                                                          coeffs_bar, d_bar, xb, ypb, zpb)
                    for k in range(N)])
    dx, dy = x - xb, y - yb
    inner = np.array([np.exp(-rho * k) * float(lat.measure(k) @ np.einsum("ij,ij->i", dx[k], dy[k]))
                      for k in range(N + 1)])
    lhs = inner[1:] - inner[:-1]
    x0hat = initial_value(coeffs, d, y[0]) - initial_value(coeffs_bar, d_bar, yb[0])
    gap = float(rhs.sum() + x0hat @ dy[0][0])
    return DualityReport(gap, lhs, rhs)


def duality_gap(coeffs, coeffs_bar, sol, sol_bar, rho, lat, d=None, d_bar=None) -> float:
    return duality_report(coeffs, coeffs_bar, sol, sol_bar, rho, lat, d, d_bar).gap


@dataclass(frozen=True)
class StabilityReport:
    """Solution size against its data functional, and distance against the mismatch functional."""

    norm_sq: float
    data: float
    distance_sq: float
    mismatch: float

    @property
    def ratio(self) -> float:
        return self.norm_sq / self.data if self.data > 0 else (0.0 if self.norm_sq == 0 else math.inf)

    @property
    def stability_ratio(self) -> float:
        if self.mismatch > 0:
            return self.distance_sq / self.mismatch
        return 0.0 if self.distance_sq == 0 else math.inf

    def checks(self) -> list:
        return [InequalityCheck("solution norm vs data (empirical K)", self.norm_sq, self.data,
                                self.ratio, math.isfinite(self.ratio)),
                InequalityCheck("solution distance vs mismatch (empirical K)", self.distance_sq,
                                self.mismatch, self.stability_ratio, math.isfinite(self.stability_ratio))]


def _mismatch(coeffs, d, coeffs_bar, d_bar, lat, rho, N, x, y):
    """Discounted squared mismatch of two systems evaluated along ``(x, y)``."""
    yp, zp = projections(lat, y, N)
    total = 0.0
    for k in range(N):
        nk = lat.level_size(k)
        th = (x[k], yp[k], zp[k])
        parts = (
            (coeffs.eval_b(k, *th) + d.psi_at(k, nk) - coeffs_bar.eval_b(k, *th) - d_bar.psi_at(k, nk), k),
            (coeffs.eval_sigma(k, *th) + d.gamma_at(k, nk)
             - coeffs_bar.eval_sigma(k, *th) - d_bar.gamma_at(k, nk), k),
            (coeffs.eval_f(k, *th) + d.phi_at(k, nk) - coeffs_bar.eval_f(k, *th) - d_bar.phi_at(k, nk), k + 1),
        )
        for v, p in parts:
            total += np.exp(-rho * p) * float(lat.measure(k) @ np.einsum("ij,ij->i", v, v))
    v0 = initial_value(coeffs, d, y[0]) - initial_value(coeffs_bar, d_bar, y[0])
    return total + float(v0 @ v0)


def verify_thm41(coeffs: CoefficientSet, coeffs_bar: CoefficientSet, sol: FBSDESolution,
                 sol_bar: FBSDESolution, lat: Lattice, w: WeightConfig,
                 d: DrivingTerms | None = None, d_bar: DrivingTerms | None = None) -> StabilityReport:
    n = coeffs.dim
    d = d or DrivingTerms.zeros(n)
    d_bar = d_bar or DrivingTerms.zeros(n)
    N = sol.x.horizon
    rho = w.rho
    disc = np.exp(-rho * np.arange(N + 1))
    norm_sq = float(disc @ (level_sq_means(sol.x, N) + level_sq_means(sol.y, N)))
    zero = AdaptedProcess.zeros(lat, n, N)
    data = _mismatch(coeffs, d, zero_coefficients(n), DrivingTerms.zeros(n), lat, rho, N, zero, zero)
    dist = float(disc @ (level_sq_means(sol.x - sol_bar.x, N) + level_sq_means(sol.y - sol_bar.y, N)))
    mism = _mismatch(coeffs, d, coeffs_bar, d_bar, lat, rho, N, sol_bar.x, sol_bar.y)
    return StabilityReport(norm_sq, data, dist, mism)
