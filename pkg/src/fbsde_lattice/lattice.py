"""Finite scenario lattices and exact conditional expectations.

A lattice of depth ``N`` is the product tree generated by the noise
variables ``w_0, ..., w_{N-1}``.  Nodes at level ``k`` are the atoms of the
sigma-algebra generated by ``w_0, ..., w_{k-1}``; level 0 holds a single root
node (the trivial sigma-algebra).  A node is addressed by the mixed-radix
positional encoding of its branch history, so that the children of node
``i`` at level ``k`` are ``i * S_k + j`` for ``j = 0, ..., S_k - 1`` where
``S_k`` is the support size of ``w_k``.

Variables on level ``k`` are arrays whose leading axis has length
``lat.level_size(k)``; trailing axes are arbitrary (vector components).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import LatticeSizeError, LevelMismatchError, MomentError

MOMENT_TOL = 1e-12
DEFAULT_MAX_NODES = 5_000_000


@dataclass(frozen=True)
class NoiseModel:
    """Finite-support law of one noise increment.

    Parameters
    ----------
    support : sequence of float
        Noise values ``w_i``.
    probs : sequence of float
        Branch probabilities ``p_i``; strictly positive and summing to one.
    """

    support: tuple
    probs: tuple

    def __post_init__(self):
        w = np.asarray(self.support, dtype=float).ravel()
        p = np.asarray(self.probs, dtype=float).ravel()
        if w.size != p.size or w.size < 2:
            raise MomentError("support and probs must have equal length >= 2")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(p))):
            raise MomentError("noise model entries must be finite")
        if np.any(p <= 0):
            raise MomentError("branch probabilities must be positive")
        if abs(p.sum() - 1.0) > MOMENT_TOL:
            raise MomentError(f"probabilities sum to {p.sum()!r}, not 1")
        mean = float(p @ w)
        if abs(mean) > MOMENT_TOL:
            raise MomentError(f"noise mean {mean:.3e} is not zero")
        second = float(p @ (w * w))
        if abs(second - 1.0) > MOMENT_TOL:
            raise MomentError(f"noise second moment {second!r} is not 1")
        object.__setattr__(self, "support", tuple(float(v) for v in w))
        object.__setattr__(self, "probs", tuple(float(v) for v in p))

    @property
    def size(self) -> int:
        return len(self.support)

    @property
    def values(self) -> np.ndarray:
        return np.array(self.support)

    @property
    def weights(self) -> np.ndarray:
        return np.array(self.probs)

    @classmethod
    def rademacher(cls) -> "NoiseModel":
        return cls((1.0, -1.0), (0.5, 0.5))

    @classmethod
    def three_point(cls) -> "NoiseModel":
        r = np.sqrt(2.0)
        return cls((-r, 0.0, r), (0.25, 0.5, 0.25))

    @classmethod
    def standardized(cls, points, probs) -> "NoiseModel":
        """Shift and rescale arbitrary distinct points to zero mean, unit variance."""
        w = np.asarray(points, dtype=float)
        p = np.asarray(probs, dtype=float)
        p = p / p.sum()
        w = w - p @ w
        w = w / np.sqrt(p @ (w * w))
        return cls(tuple(w), tuple(p))


@dataclass(frozen=True)
class NodeId:
    level: int
    index: int


class Lattice:
    """Immutable product tree of finite-support noise.

    Parameters
    ----------
    depth : int
        Number of branching levels ``N >= 1``; levels run ``0..N``.
    noise : NoiseModel or sequence of NoiseModel
        Law of ``w_k``.  A single model is used at every level; a sequence
        of length ``depth`` gives per-level laws.
    max_nodes : int
        Cap on the total node count across all levels.
    """

    def __init__(self, depth: int, noise: NoiseModel | Sequence[NoiseModel] | None = None,
                 max_nodes: int = DEFAULT_MAX_NODES):
        if int(depth) != depth or depth < 1:
            raise ValueError("lattice depth must be an integer >= 1")
        depth = int(depth)
        if noise is None:
            noise = NoiseModel.rademacher()
        if isinstance(noise, NoiseModel):
            noises = (noise,) * depth
        else:
            noises = tuple(noise)
            if len(noises) != depth:
                raise ValueError("need one noise model per branching level")
        sizes = [1]
        for nm in noises:
            sizes.append(sizes[-1] * nm.size)
            if sum(sizes) > max_nodes:
                raise LatticeSizeError(
                    f"lattice would hold more than {max_nodes} nodes")
        self._depth = depth
        self._noises = noises
        self._sizes = tuple(sizes)
        measures = [np.ones(1)]
        for nm in noises:
            m = np.outer(measures[-1], nm.weights).ravel()
            measures.append(m)
        for m in measures:
            m.setflags(write=False)
        self._measures = tuple(measures)

    def __repr__(self):
        sup = sorted({nm.size for nm in self._noises})
        return f"Lattice(depth={self._depth}, support_sizes={sup})"

    @property
    def depth(self) -> int:
        return self._depth

    @property
    def noises(self) -> tuple:
        return self._noises

    def noise(self, k: int) -> NoiseModel:
        """Law of ``w_k``, the increment branching level ``k`` into ``k+1``."""
        return self._noises[k]

    def level_size(self, k: int) -> int:
        if not 0 <= k <= self._depth:
            raise LevelMismatchError(f"level {k} outside 0..{self._depth}")
        return self._sizes[k]

    @property
    def total_nodes(self) -> int:
        return sum(self._sizes)

    def measure(self, k: int) -> np.ndarray:
        """Path measure of every level-``k`` node."""
        self.level_size(k)
        return self._measures[k]

    def level_of(self, v: np.ndarray) -> int:
        n = np.shape(v)[0]
        try:
            return self._sizes.index(n)
        except ValueError:
            raise LevelMismatchError(
                f"leading axis {n} matches no level size of {self!r}") from None

    def _check_level(self, v, level):
        v = np.asarray(v, dtype=float)
        if level is None:
            return v, self.level_of(v)
        if v.shape[:1] != (self.level_size(level),):
            raise LevelMismatchError(
                f"expected {self._sizes[level]} nodes at level {level}, got {v.shape[:1]}")
        return v, level

    # node arithmetic

    def node(self, level: int, index: int) -> NodeId:
        if not 0 <= index < self.level_size(level):
            raise LevelMismatchError(f"index {index} invalid at level {level}")
        return NodeId(level, index)

    def node_index(self, path: Sequence[int]) -> NodeId:
        """Node reached from the root by the given branch choices."""
        idx = 0
        for k, j in enumerate(path):
            s = self._noises[k].size
            if not 0 <= j < s:
                raise LevelMismatchError(f"branch {j} invalid at level {k}")
            idx = idx * s + int(j)
        return NodeId(len(path), idx)

    def path(self, node: NodeId) -> tuple:
        self.node(node.level, node.index)
        digits = []
        idx = node.index
        for k in reversed(range(node.level)):
            idx, j = divmod(idx, self._noises[k].size)
            digits.append(j)
        return tuple(reversed(digits))

    def parent(self, node: NodeId) -> NodeId:
        if node.level == 0:
            raise LevelMismatchError("the root has no parent")
        return NodeId(node.level - 1, node.index // self._noises[node.level - 1].size)

    def children(self, node: NodeId) -> list:
        self.node(node.level, node.index)
        if node.level >= self._depth:
            return []
        s = self._noises[node.level].size
        return [NodeId(node.level + 1, node.index * s + j) for j in range(s)]

    # operators

    def branch(self, k: int, drift: np.ndarray, diffusion: np.ndarray) -> np.ndarray:
        """Level-``k+1`` values ``drift + diffusion * w_k`` on every child."""
        nm = self._noises[k]
        drift = np.asarray(drift, dtype=float)
        diffusion = np.asarray(diffusion, dtype=float)
        n = drift.shape[0]
        tail = drift.shape[1:]
        w = nm.values.reshape((1, nm.size) + (1,) * len(tail))
        out = drift[:, None] + diffusion[:, None] * w
        return out.reshape((n * nm.size,) + tail)

    def _grouped(self, v, level):
        v, lvl = self._check_level(v, level)
        if lvl == 0:
            raise LevelMismatchError("level-0 variables have no parent level")
        nm = self._noises[lvl - 1]
        return v.reshape((self._sizes[lvl - 1], nm.size) + v.shape[1:]), nm

    def cond_exp(self, v, level: int | None = None) -> np.ndarray:
        """``E[v | parent atom]`` for a variable on level ``level``.

        The result lives on ``level - 1``.  If ``level`` is omitted it is
        inferred from the leading axis.
        """
        g, nm = self._grouped(v, level)
        return np.tensordot(nm.weights, g, axes=([0], [1]))

    def cond_exp_noise(self, v, level: int | None = None) -> np.ndarray:
        """``E[v * w | parent atom]``, the noise-weighted counterpart of :meth:`cond_exp`."""
        g, nm = self._grouped(v, level)
        return np.tensordot(nm.weights * nm.values, g, axes=([0], [1]))

    def expectation(self, v, level: int | None = None) -> np.ndarray | float:
        v, lvl = self._check_level(v, level)
        out = np.tensordot(self._measures[lvl], v, axes=([0], [0]))
        return float(out) if out.ndim == 0 else out


def build_lattice(depth: int, noise: NoiseModel | Sequence[NoiseModel] | None = None,
                  max_nodes: int = DEFAULT_MAX_NODES) -> Lattice:
    return Lattice(depth, noise, max_nodes=max_nodes)


def cond_exp(v, lat: Lattice, level: int | None = None) -> np.ndarray:
    return lat.cond_exp(v, level)


def cond_exp_noise(v, lat: Lattice, level: int | None = None) -> np.ndarray:
    return lat.cond_exp_noise(v, level)


def expectation(v, lat: Lattice, level: int | None = None):
    return lat.expectation(v, level)
