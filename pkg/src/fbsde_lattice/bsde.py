"""Backward stochastic difference equations ``y_k = f(k+1, y'_{k+1}, z'_{k+1})``.

The generator attached to level ``k`` is called as ``generator(k, yp, zp)``
with ``yp = E[y_{k+1} | node]`` and ``zp = E[y_{k+1} w_k | node]`` given as
level-``k`` arrays; it plays the role of ``f(k+1, ., .)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import HorizonError, NonFiniteError, WindowError
from .lattice import Lattice
from .reports import InequalityCheck, leq
from .spaces import AdaptedProcess, WeightConfig, weighted_norm_sq

Generator = Callable[[int, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class BackwardGenerator:
    generator: Generator
    dim: int
    lipschitz: float = 0.0
    name: str = field(default="backward", compare=False)

    def __call__(self, k, yp, zp):
        return np.broadcast_to(np.asarray(self.generator(k, yp, zp), dtype=float), yp.shape)


def one_step_projections(lat: Lattice, y_next: np.ndarray, k: int):
    """``(y', z')`` on level ``k`` from the level-``k+1`` values."""
    return lat.cond_exp(y_next, k + 1), lat.cond_exp_noise(y_next, k + 1)


def backward_recursion(gen: Callable, dim: int, lat: Lattice, horizon: int) -> AdaptedProcess:
    """Kernel: ``y_N = 0`` and ``y_k = gen(k, y', z')`` down to level 0."""
    if horizon > lat.depth:
        raise HorizonError(f"horizon {horizon} exceeds lattice depth {lat.depth}")
    y = [None] * (horizon + 1)
    y[horizon] = np.zeros((lat.level_size(horizon), dim))
    for k in range(horizon - 1, -1, -1):
        yp, zp = one_step_projections(lat, y[k + 1], k)
        yk = np.broadcast_to(np.asarray(gen(k, yp, zp), dtype=float), yp.shape).copy()
        if not np.all(np.isfinite(yk)):
            raise NonFiniteError(f"non-finite backward value at level {k}")
        y[k] = yk
    return AdaptedProcess(lat, y)


def solve_bsde(g: BackwardGenerator, lat: Lattice, w: WeightConfig) -> AdaptedProcess:
    return backward_recursion(g, g.dim, lat, w.horizon)


def bsde_estimate_constant(L2: float, rho: float) -> float:
    """``3 e^rho / (1 - 6 L2^2 e^rho)``; requires ``rho < -ln(6 L2^2)``."""
    den = 1.0 - 6.0 * L2 * L2 * np.exp(rho)
    if not den > 0.0:
        raise WindowError(f"rho={rho} violates rho < -ln(6 L2^2) for L2={L2}")
    return float(3.0 * np.exp(rho) / den)


def generator_data(gen: Callable, y: AdaptedProcess, lat: Lattice, w: WeightConfig,
                   dim: int) -> float:
    """``sum_{k<N} e^{-rho(k+1)} E|gen(k, y'_{k+1}, z'_{k+1})|^2`` along ``y``."""
    total = 0.0
    for k in range(w.horizon):
        yp, zp = one_step_projections(lat, y[k + 1], k)
        v = np.broadcast_to(np.asarray(gen(k, yp, zp), dtype=float), yp.shape)
        total += np.exp(-w.rho * (k + 1)) * float(lat.measure(k) @ np.einsum("ij,ij->i", v, v))
    return total


@dataclass(frozen=True)
class BSDEEstimateReport:
    constant: float
    norm_bound: InequalityCheck
    stability_bound: InequalityCheck

    @property
    def passed(self) -> bool:
        return self.norm_bound.passed and self.stability_bound.passed

    def checks(self) -> list:
        return [self.norm_bound, self.stability_bound]


def verify_bsde_estimates(g: BackwardGenerator, gbar: BackwardGenerator,
                          lat: Lattice, w: WeightConfig) -> BSDEEstimateReport:
    const = bsde_estimate_constant(g.lipschitz, w.rho)
    y = solve_bsde(g, lat, w)
    ybar = solve_bsde(gbar, lat, w)
    zero = AdaptedProcess.zeros(lat, g.dim, w.horizon)
    norm = leq("bsde norm bound", weighted_norm_sq(y, w),
               const * generator_data(g, zero, lat, w, g.dim), const)
    mismatch = generator_data(lambda k, a, b: g(k, a, b) - gbar(k, a, b), ybar, lat, w, g.dim)
    stab = leq("bsde stability bound", weighted_norm_sq(y - ybar, w), const * mismatch, const)
    return BSDEEstimateReport(const, norm, stab)


@dataclass(frozen=True)
class TruncationReport:
    """Solutions at increasing truncation horizons compared on a common grid.

    ``distances[i, j]`` is the squared discounted distance between the
    solutions truncated at ``horizons[i]`` and ``horizons[j]``, both padded
    by zero up to the largest horizon.
    """

    horizons: tuple
    distances: np.ndarray
    consecutive: tuple
    monotone: bool

    @property
    def ratios(self) -> tuple:
        c = self.consecutive
        return tuple(c[i + 1] / c[i] if c[i] > 0 else 0.0 for i in range(len(c) - 1))


def truncation_study(g: BackwardGenerator, lat: Lattice, w: WeightConfig,
                     horizons: Sequence[int]) -> TruncationReport:
    hs = tuple(sorted(int(h) for h in horizons))
    top = hs[-1]
    if top > lat.depth:
        raise HorizonError(f"horizon {top} exceeds lattice depth {lat.depth}")
    wt = WeightConfig(w.rho, top)
    sols = [backward_recursion(g, g.dim, lat, h).resized(top) for h in hs]
    dist = np.zeros((len(hs), len(hs)))
    for i in range(len(hs)):
        for j in range(i + 1, len(hs)):
            dist[i, j] = dist[j, i] = weighted_norm_sq(sols[i] - sols[j], wt)
    consecutive = tuple(float(dist[i, i + 1]) for i in range(len(hs) - 1))
    mono = all(consecutive[i + 1] <= consecutive[i] * (1 + 1e-12) + 1e-300
               for i in range(len(consecutive) - 1))
    return TruncationReport(hs, dist, consecutive, mono)


def audit_generator_lipschitz(g: BackwardGenerator, lat: Lattice, horizon: int,
                              samples: int = 200, seed: int = 0) -> float:
    """Largest sampled ratio ``|f(a) - f(a')| / (|y'-y''| + |z'-z''|)``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for s in range(samples):
        k = s % max(horizon, 1)
        shape = (lat.level_size(k), g.dim)
        yp, zp = rng.standard_normal(shape), rng.standard_normal(shape)
        ypb, zpb = rng.standard_normal(shape), rng.standard_normal(shape)
        den = np.linalg.norm(yp - ypb, axis=1) + np.linalg.norm(zp - zpb, axis=1)
        num = np.linalg.norm(g(k, yp, zp) - g(k, ypb, zpb), axis=1)
        worst = max(worst, float(np.max(num / den)))
    return worst
