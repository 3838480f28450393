"""Forward stochastic difference equations ``x_{k+1} = b(k, x_k) + sigma(k, x_k) w_k``."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NonFiniteError, WindowError
from .lattice import Lattice
from .reports import InequalityCheck, leq
from .spaces import AdaptedProcess, WeightConfig, weighted_norm_sq

LevelMap = Callable[[int, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ForwardCoefficients:
    """Drift, diffusion and initial state of a forward equation.

    ``drift(k, x)`` and ``diffusion(k, x)`` receive the level-``k`` array
    ``x`` of shape ``(n_k, n)`` and return an array of the same shape (or
    one broadcastable to it).  Their node-dependence encodes randomness of
    the coefficients.
    """

    drift: LevelMap
    diffusion: LevelMap
    eta: np.ndarray
    lipschitz: float = 0.0
    name: str = field(default="forward", compare=False)

    @property
    def dim(self) -> int:
        return int(np.atleast_1d(self.eta).shape[0])


def _level_eval(fn, k, x):
    return np.broadcast_to(np.asarray(fn(k, x), dtype=float), x.shape)


def _finite(arr, what, k):
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"non-finite {what} at level {k}")
    return arr


def solve_sde(c: ForwardCoefficients, lat: Lattice, w: WeightConfig) -> AdaptedProcess:
    """Explicit forward recursion up to the horizon of ``w``."""
    w.check(lat)
    x = [np.tile(np.atleast_1d(np.asarray(c.eta, dtype=float)), (1, 1))]
    _finite(x[0], "initial state", 0)
    for k in range(w.horizon):
        xk = x[k]
        nxt = lat.branch(k, _level_eval(c.drift, k, xk), _level_eval(c.diffusion, k, xk))
        x.append(_finite(nxt, "state", k + 1))
    return AdaptedProcess(lat, x)


def picard_map(c: ForwardCoefficients, x: AdaptedProcess, lat: Lattice,
               w: WeightConfig) -> AdaptedProcess:
    """One forward sweep treating the input process as the argument of ``b`` and ``sigma``."""
    out = [np.tile(np.atleast_1d(np.asarray(c.eta, dtype=float)), (1, 1))]
    for k in range(w.horizon):
        xk = x[k]
        out.append(lat.branch(k, _level_eval(c.drift, k, xk), _level_eval(c.diffusion, k, xk)))
    return AdaptedProcess(lat, out)


def picard_ratio(c: ForwardCoefficients, x: AdaptedProcess, xbar: AdaptedProcess,
                 lat: Lattice, w: WeightConfig) -> float:
    """``||Tx - T xbar|| / ||x - xbar||`` in the discounted norm."""
    den = weighted_norm_sq(x - xbar, w)
    if den == 0.0:
        return 0.0
    num = weighted_norm_sq(picard_map(c, x, lat, w) - picard_map(c, xbar, lat, w), w)
    return float(np.sqrt(num / den))


def picard_contraction_bound(L1: float, rho: float) -> float:
    return float(np.sqrt(2.0) * L1 * np.exp(-rho / 2.0))


def sde_estimate_constant(L1: float, rho: float) -> float:
    """Constant ``(1 + 2e^{-rho}) / (1 - 4 L1^2 e^{-rho})``; requires ``rho > ln(4 L1^2)``."""
    den = 1.0 - 4.0 * L1 * L1 * np.exp(-rho)
    if not den > 0.0:
        raise WindowError(f"rho={rho} violates rho > ln(4 L1^2) for L1={L1}")
    return float((1.0 + 2.0 * np.exp(-rho)) / den)


def _forcing_norm(drift, diffusion, xs, lat, w):
    """``sum_{k<N} e^{-rho k} E(|drift_k|^2 + |diffusion_k|^2)`` evaluated at ``xs``."""
    total = 0.0
    for k in range(w.horizon):
        xk = xs[k]
        d = _level_eval(drift, k, xk)
        s = _level_eval(diffusion, k, xk)
        sq = np.einsum("ij,ij->i", d, d) + np.einsum("ij,ij->i", s, s)
        total += np.exp(-w.rho * k) * float(lat.measure(k) @ sq)
    return total


@dataclass(frozen=True)
class SDEEstimateReport:
    constant: float
    norm_bound: InequalityCheck
    stability_bound: InequalityCheck

    @property
    def passed(self) -> bool:
        return self.norm_bound.passed and self.stability_bound.passed

    def checks(self) -> list:
        return [self.norm_bound, self.stability_bound]


def verify_sde_estimates(c: ForwardCoefficients, cbar: ForwardCoefficients,
                         lat: Lattice, w: WeightConfig) -> SDEEstimateReport:
    """Evaluate both a-priori bounds of the forward equation on the truncated lattice.

    The norm bound compares the discounted norm of the solution with the
    data functional built from the initial state and the coefficients at
    zero.  The stability bound compares the distance of two solutions with
    the coefficient mismatch evaluated along the second solution.  The
    Lipschitz constant of ``c`` enters the shared constant.
    """
    const = sde_estimate_constant(c.lipschitz, w.rho)
    x = solve_sde(c, lat, w)
    xbar = solve_sde(cbar, lat, w)
    n = c.dim
    zeros = [np.zeros((lat.level_size(k), n)) for k in range(w.horizon + 1)]
    eta = np.atleast_1d(c.eta)
    data = float(eta @ eta) + _forcing_norm(c.drift, c.diffusion, zeros, lat, w)
    norm = leq("sde norm bound", weighted_norm_sq(x, w), const * data, const)
    deta = np.atleast_1d(c.eta) - np.atleast_1d(cbar.eta)

    def gap_drift(k, xk):
        return _level_eval(c.drift, k, xk) - _level_eval(cbar.drift, k, xk)

    def gap_diff(k, xk):
        return _level_eval(c.diffusion, k, xk) - _level_eval(cbar.diffusion, k, xk)

    mismatch = float(deta @ deta) + _forcing_norm(gap_drift, gap_diff, xbar.values, lat, w)
    stab = leq("sde stability bound", weighted_norm_sq(x - xbar, w), const * mismatch, const)
    return SDEEstimateReport(const, norm, stab)


def audit_forward_lipschitz(c: ForwardCoefficients, lat: Lattice, horizon: int,
                            samples: int = 200, seed: int = 0, scale: float = 1.0) -> float:
    """Largest sampled ratio ``|b(k,x)-b(k,x')| / |x-x'|`` over drift and diffusion."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for s in range(samples):
        k = s % max(horizon, 1)
        nk = lat.level_size(k)
        x = scale * rng.standard_normal((nk, c.dim))
        xb = x + scale * rng.standard_normal((nk, c.dim)) * (1e-3 if s % 3 == 2 else 1.0)
        dx = np.linalg.norm(x - xb, axis=1)
        for fn in (c.drift, c.diffusion):
            d = np.linalg.norm(_level_eval(fn, k, x) - _level_eval(fn, k, xb), axis=1)
            mask = dx > 0
            if mask.any():
                worst = max(worst, float(np.max(d[mask] / dx[mask])))
    return worst
