"""Adapted processes on a lattice and their discounted square norms."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import HorizonError, LevelMismatchError
from .lattice import Lattice


class AdaptedProcess:
    """Vector process whose level-``k`` value lives on the level-``k`` nodes.

    ``values[k]`` has shape ``(lat.level_size(k), dim)``.  Because each
    value is attached to a node of its own level, it is measurable with
    respect to the information revealed before that level.
    """

    __slots__ = ("lattice", "values")

    def __init__(self, lattice: Lattice, values):
        vals = [np.asarray(v, dtype=float) for v in values]
        if not vals:
            raise ValueError("an adapted process needs at least level 0")
        if len(vals) > lattice.depth + 1:
            raise HorizonError(
                f"{len(vals) - 1} exceeds lattice depth {lattice.depth}")
        dim = None
        for k, v in enumerate(vals):
            if v.ndim == 1:
                v = v[:, None]
                vals[k] = v
            if v.ndim != 2 or v.shape[0] != lattice.level_size(k):
                raise LevelMismatchError(
                    f"level {k}: expected ({lattice.level_size(k)}, n), got {v.shape}")
            if dim is None:
                dim = v.shape[1]
            elif v.shape[1] != dim:
                raise ValueError("all levels must share one dimension")
        self.lattice = lattice
        self.values = vals

    @classmethod
    def zeros(cls, lattice: Lattice, dim: int, horizon: int) -> "AdaptedProcess":
        return cls(lattice, [np.zeros((lattice.level_size(k), dim))
                             for k in range(horizon + 1)])

    @classmethod
    def from_function(cls, lattice: Lattice, dim: int, horizon: int,
                      fn: Callable[[int], np.ndarray]) -> "AdaptedProcess":
        """Build from ``fn(k)``, which may return a full level array or one broadcastable to it."""
        vals = []
        for k in range(horizon + 1):
            shape = (lattice.level_size(k), dim)
            vals.append(np.broadcast_to(np.asarray(fn(k), dtype=float), shape).copy())
        return cls(lattice, vals)

    @classmethod
    def deterministic(cls, lattice: Lattice, levels) -> "AdaptedProcess":
        """Process equal to ``levels[k]`` (a vector) at every level-``k`` node."""
        levels = [np.atleast_1d(np.asarray(v, dtype=float)) for v in levels]
        return cls(lattice, [np.tile(v, (lattice.level_size(k), 1))
                             for k, v in enumerate(levels)])

    @property
    def dim(self) -> int:
        return self.values[0].shape[1]

    @property
    def horizon(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, k: int) -> np.ndarray:
        return self.values[k]

    def __len__(self):
        return len(self.values)

    def copy(self) -> "AdaptedProcess":
        return AdaptedProcess(self.lattice, [v.copy() for v in self.values])

    def resized(self, horizon: int) -> "AdaptedProcess":
        """Truncate, or pad with zeros, to the given horizon."""
        vals = [v for v in self.values[:horizon + 1]]
        for k in range(len(vals), horizon + 1):
            vals.append(np.zeros((self.lattice.level_size(k), self.dim)))
        return AdaptedProcess(self.lattice, vals)

    def _binary(self, other, op):
        if isinstance(other, AdaptedProcess):
            if other.lattice is not self.lattice or other.horizon != self.horizon:
                raise ValueError("processes live on different lattices or horizons")
            return AdaptedProcess(self.lattice,
                                  [op(a, b) for a, b in zip(self.values, other.values)])
        return AdaptedProcess(self.lattice, [op(a, other) for a in self.values])

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, c):
        return AdaptedProcess(self.lattice, [c * v for v in self.values])

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(v))) if v.size else 0.0 for v in self.values)


@dataclass(frozen=True)
class WeightConfig:
    """Discount exponent ``rho`` and truncation horizon ``N``."""

    rho: float
    horizon: int

    def __post_init__(self):
        if not np.isfinite(self.rho):
            raise ValueError("rho must be finite")
        if int(self.horizon) != self.horizon or self.horizon < 0:
            raise ValueError("horizon must be a nonnegative integer")

    def check(self, lat: Lattice):
        if self.horizon > lat.depth:
            raise HorizonError(f"horizon {self.horizon} exceeds lattice depth {lat.depth}")

    def discount(self, k: int) -> float:
        return float(np.exp(-self.rho * k))


def level_sq_means(g: AdaptedProcess, upto: int | None = None) -> np.ndarray:
    """``E|g_k|^2`` for ``k = 0..upto``."""
    upto = g.horizon if upto is None else upto
    lat = g.lattice
    return np.array([float(lat.measure(k) @ np.einsum("ij,ij->i", g[k], g[k]))
                     for k in range(upto + 1)])


def weighted_norm_sq(g: AdaptedProcess, w: WeightConfig, lat: Lattice | None = None) -> float:
    """Discounted square norm ``sum_{k<=N} exp(-rho k) E|g_k|^2``."""
    if lat is not None and lat is not g.lattice:
        raise ValueError("process belongs to a different lattice")
    if w.horizon > g.horizon:
        raise HorizonError(f"process has {g.horizon} levels, horizon is {w.horizon}")
    sq = level_sq_means(g, w.horizon)
    disc = np.exp(-w.rho * np.arange(w.horizon + 1))
    return float(disc @ sq)


def pair_norm_sq(x: AdaptedProcess, y: AdaptedProcess, w: WeightConfig,
                 lat: Lattice | None = None) -> float:
    if x.dim != y.dim or x.lattice is not y.lattice:
        raise ValueError("pair components must share lattice and dimension")
    return weighted_norm_sq(x, w, lat) + weighted_norm_sq(y, w, lat)


def tail_bound(g: AdaptedProcess, w: WeightConfig, from_level: int) -> float:
    """Discounted square mass of ``g`` on levels ``from_level..N``."""
    top = min(w.horizon, g.horizon)
    if from_level > top:
        return 0.0
    sq = level_sq_means(g, top)[from_level:]
    disc = np.exp(-w.rho * np.arange(from_level, top + 1))
    return float(disc @ sq)
