"""Coefficient bundles of the coupled system, certificates, and the homotopy family.

A :class:`CoefficientSet` holds the initial coupling ``Lambda`` and the
level maps ``b``, ``sigma`` and ``f``.  Each level map is called as
``fn(k, x, yp, zp)`` where the arguments are level-``k`` arrays of shape
``(n_k, n)`` carrying ``theta_k = (x_k, y'_{k+1}, z'_{k+1})`` node by node;
``f`` evaluated on level ``k`` is the generator with time index ``k+1``.
``Lambda`` acts row-wise on arrays of shape ``(..., n)``.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator

import numpy as np

from .errors import CaseMismatchError
from .lattice import Lattice
from .spaces import AdaptedProcess

log = logging.getLogger(__name__)

LevelMap = Callable[[int, np.ndarray, np.ndarray, np.ndarray], np.ndarray]


# --------------------------------------------------------------------------- matrices

def matvec(mat: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Apply a constant ``(m, n)`` or node-wise ``(n_k, m, n)`` matrix to rows of ``v``."""
    if mat.ndim == 2:
        return v @ mat.T
    return np.einsum("kij,kj->ki", mat, v)


def rmatvec(mat: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Apply the transpose of ``mat`` to rows of ``u``."""
    if mat.ndim == 2:
        return u @ mat
    return np.einsum("kij,ki->kj", mat, u)


def op_norm(mat) -> float:
    """Largest spectral norm over the node-wise matrices."""
    mat = np.asarray(mat, dtype=float)
    if mat.size == 0:
        return 0.0
    if mat.ndim == 2:
        return float(np.linalg.norm(mat, 2))
    return float(np.max(np.linalg.norm(mat, 2, axis=(-2, -1))))


class LevelMatrices:
    """Constant, per-level, or per-node matrix-valued process.

    ``source`` is either one 2-D array used at every level, or a sequence
    whose ``k``-th entry is a 2-D array (deterministic at level ``k``) or a
    3-D array with one matrix per level-``k`` node.  A sequence shorter than
    the requested level repeats its last entry.
    """

    def __init__(self, source):
        if isinstance(source, LevelMatrices):
            self._const, self._levels = source._const, source._levels
            return
        arr = None
        if not isinstance(source, (list, tuple)):
            arr = np.asarray(source, dtype=float)
        if arr is not None and arr.ndim == 2:
            self._const = arr
            self._levels = None
        else:
            levels = tuple(np.asarray(m, dtype=float) for m in source)
            if not levels or any(m.ndim not in (2, 3) for m in levels):
                raise ValueError("per-level matrices must be 2-D or node-wise 3-D arrays")
            self._const = None
            self._levels = levels
        shapes = {m.shape[-2:] for m in self.entries()}
        if len(shapes) != 1:
            raise ValueError(f"inconsistent matrix shapes {sorted(shapes)}")

    def entries(self):
        return (self._const,) if self._levels is None else self._levels

    @property
    def shape(self) -> tuple:
        return self.entries()[0].shape[-2:]

    def at(self, k: int) -> np.ndarray:
        if self._levels is None:
            return self._const
        return self._levels[min(k, len(self._levels) - 1)]

    def norm(self) -> float:
        return max(op_norm(m) for m in self.entries())

    def padded_rows(self, m: int) -> "LevelMatrices":
        def pad(a):
            extra = m - a.shape[-2]
            if extra < 0:
                raise ValueError("cannot shrink row count")
            widths = [(0, 0)] * a.ndim
            widths[-2] = (0, extra)
            return np.pad(a, widths)
        if self._levels is None:
            return LevelMatrices(pad(self._const))
        return LevelMatrices([pad(a) for a in self._levels])


# --------------------------------------------------------------------------- coefficients

@dataclass(frozen=True)
class Lipschitz:
    """Lipschitz constants: ``L`` for Lambda, ``L1`` for b, sigma in x, ``L2`` for f in (y', z'),
    ``L3, L4`` for b in y', z', ``L5, L6`` for sigma in y', z', ``L7`` for f in x."""

    L: float = 0.0
    L1: float = 0.0
    L2: float = 0.0
    L3: float = 0.0
    L4: float = 0.0
    L5: float = 0.0
    L6: float = 0.0
    L7: float = 0.0

    def inflated(self, floor: float) -> "Lipschitz":
        return replace(self, **{name: max(getattr(self, name), floor)
                                for name in ("L", "L3", "L4", "L5", "L6", "L7")})


@dataclass(frozen=True)
class CoefficientSet:
    dim: int
    Lambda: Callable[[np.ndarray], np.ndarray]
    b: LevelMap
    sigma: LevelMap
    f: LevelMap
    lipschitz: Lipschitz = field(default_factory=Lipschitz)
    name: str = field(default="custom", compare=False)

    def eval_Lambda(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return np.broadcast_to(np.asarray(self.Lambda(y), dtype=float), y.shape)

    def _eval(self, fn, k, x, yp, zp):
        return np.broadcast_to(np.asarray(fn(k, x, yp, zp), dtype=float), x.shape)

    def eval_b(self, k, x, yp, zp):
        return self._eval(self.b, k, x, yp, zp)

    def eval_sigma(self, k, x, yp, zp):
        return self._eval(self.sigma, k, x, yp, zp)

    def eval_f(self, k, x, yp, zp):
        return self._eval(self.f, k, x, yp, zp)


def zero_coefficients(dim: int) -> CoefficientSet:
    def zero(k, x, yp, zp):
        return np.zeros_like(x)
    return CoefficientSet(dim, lambda y: np.zeros_like(y), zero, zero, zero, Lipschitz(), "zero")


class Case(enum.Enum):
    CASE1 = "case1"
    CASE2 = "case2"

    @classmethod
    def parse(cls, value) -> "Case":
        if isinstance(value, Case):
            return value
        key = str(value).strip().lower().replace(" ", "").replace("_", "")
        if key in ("1", "case1"):
            return cls.CASE1
        if key in ("2", "case2"):
            return cls.CASE2
        raise ValueError(f"unknown case {value!r}")


class MonotoneSign(enum.Enum):
    STANDARD = "standard"
    SYMMETRIC = "symmetric"

    @classmethod
    def parse(cls, value) -> "MonotoneSign":
        if isinstance(value, MonotoneSign):
            return value
        return cls(str(value).strip().lower())

    @property
    def factor(self) -> float:
        """Sign of the regularizer terms: negative for the standard inequalities."""
        return -1.0 if self is MonotoneSign.STANDARD else 1.0


class DomMonCert:
    """Domination-monotonicity certificate ``(mu, nu, M, A, B, C)``.

    ``M`` is an ``(m, n)`` matrix; ``A``, ``B``, ``C`` are matrix processes
    with ``m`` rows (see :class:`LevelMatrices`); missing ones default to
    zero.  ``case`` is inferred from ``mu`` and ``nu`` when omitted.
    Construction does not enforce the case rule; :meth:`validate` does.
    """

    def __init__(self, mu: float, nu: float, M, A=None, B=None, C=None,
                 case: Case | str | None = None,
                 sign: MonotoneSign | str = MonotoneSign.STANDARD):
        self.mu = float(mu)
        self.nu = float(nu)
        self.M = np.atleast_2d(np.asarray(M, dtype=float))
        m, n = self.M.shape
        zero = np.zeros((m, n))
        self.A = LevelMatrices(zero if A is None else A)
        self.B = LevelMatrices(zero if B is None else B)
        self.C = LevelMatrices(zero if C is None else C)
        for name in ("A", "B", "C"):
            if getattr(self, name).shape != (m, n):
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, expected {(m, n)}")
        if case is None:
            case = Case.CASE1 if self.mu > 0 else Case.CASE2
        self.case = Case.parse(case)
        self.sign = MonotoneSign.parse(sign)

    def __repr__(self):
        return (f"DomMonCert(mu={self.mu:g}, nu={self.nu:g}, m={self.M.shape[0]}, "
                f"n={self.dim}, case={self.case.value}, sign={self.sign.value})")

    @property
    def dim(self) -> int:
        return self.M.shape[1]

    def validate(self) -> "DomMonCert":
        if self.mu < 0 or self.nu < 0 or not (math.isfinite(self.mu) and math.isfinite(self.nu)):
            raise CaseMismatchError("mu and nu must be finite and nonnegative")
        ok1 = self.mu > 0 and self.nu == 0
        ok2 = self.mu == 0 and self.nu > 0
        if self.case is Case.CASE1 and not ok1:
            raise CaseMismatchError(f"case 1 needs mu > 0 and nu = 0, got mu={self.mu}, nu={self.nu}")
        if self.case is Case.CASE2 and not ok2:
            raise CaseMismatchError(f"case 2 needs mu = 0 and nu > 0, got mu={self.mu}, nu={self.nu}")
        for name in ("A", "B", "C"):
            if not math.isfinite(getattr(self, name).norm()):
                raise CaseMismatchError(f"certificate matrix {name} is not bounded")
        return self

    def inflation_floor(self) -> float:
        """``max(mu, nu) * (|M| + |A| + |B| + |C|)^2``."""
        s = op_norm(self.M) + self.A.norm() + self.B.norm() + self.C.norm()
        return max(self.mu, self.nu) * s * s


def eval_P(cert: DomMonCert, k: int, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return matvec(cert.A.at(k), x[None])[0]
    return matvec(cert.A.at(k), x)


def eval_Q(cert: DomMonCert, k: int, yp: np.ndarray, zp: np.ndarray) -> np.ndarray:
    yp = np.asarray(yp, dtype=float)
    zp = np.asarray(zp, dtype=float)
    if yp.ndim == 1:
        return eval_Q(cert, k, yp[None], zp[None])[0]
    return matvec(cert.B.at(k), yp) + matvec(cert.C.at(k), zp)


@dataclass
class DrivingTerms:
    """Inhomogeneities ``(xi, phi, psi, gamma)``.

    ``xi`` is deterministic; ``phi_k``, ``psi_k``, ``gamma_k`` live on level
    ``k`` and enter the backward relation, the drift and the diffusion of
    the transition from ``k`` to ``k+1``.  ``None`` stands for zero.
    """

    xi: np.ndarray
    phi: AdaptedProcess | None = None
    psi: AdaptedProcess | None = None
    gamma: AdaptedProcess | None = None

    def __post_init__(self):
        self.xi = np.atleast_1d(np.asarray(self.xi, dtype=float))

    @property
    def dim(self) -> int:
        return self.xi.shape[0]

    @classmethod
    def zeros(cls, dim: int) -> "DrivingTerms":
        return cls(np.zeros(dim))

    @staticmethod
    def _level(proc, k, nk, n):
        if proc is None or k > proc.horizon:
            return np.zeros((nk, n))
        return proc[k]

    def phi_at(self, k, nk):
        return self._level(self.phi, k, nk, self.dim)

    def psi_at(self, k, nk):
        return self._level(self.psi, k, nk, self.dim)

    def gamma_at(self, k, nk):
        return self._level(self.gamma, k, nk, self.dim)

    def processes(self):
        return [p for p in (self.phi, self.psi, self.gamma) if p is not None]


def upsilon(coeffs: CoefficientSet, rho: float, k: int, x, yp, zp) -> np.ndarray:
    """``f + e^{-rho} b + e^{-rho} sigma`` evaluated at ``theta = (x, y', z')``."""
    x, yp, zp = (np.atleast_2d(np.asarray(a, dtype=float)) for a in (x, yp, zp))
    d = np.exp(-rho)
    out = coeffs.eval_f(k, x, yp, zp) + d * (coeffs.eval_b(k, x, yp, zp) + coeffs.eval_sigma(k, x, yp, zp))
    return out


def monotone_pairing(coeffs: CoefficientSet, rho: float, k: int, theta, theta_bar,
                     coeffs_bar: CoefficientSet | None = None) -> np.ndarray:
    """Node-wise pairing of the coefficient increment with ``theta - theta_bar``.

    The forward coefficients pair with the conditional projections of the
    backward variable and the generator pairs with the state:
    ``<f - fbar, x^> + e^{-rho}<b - bbar, y'^> + e^{-rho}<sigma - sigmabar, z'^>``.
    """
    cb = coeffs if coeffs_bar is None else coeffs_bar
    x, yp, zp = theta
    xb, ypb, zpb = theta_bar
    d = np.exp(-rho)
    df = coeffs.eval_f(k, x, yp, zp) - cb.eval_f(k, xb, ypb, zpb)
    db = coeffs.eval_b(k, x, yp, zp) - cb.eval_b(k, xb, ypb, zpb)
    ds = coeffs.eval_sigma(k, x, yp, zp) - cb.eval_sigma(k, xb, ypb, zpb)
    return (np.einsum("ij,ij->i", df, x - xb)
            + d * np.einsum("ij,ij->i", db, yp - ypb)
            + d * np.einsum("ij,ij->i", ds, zp - zpb))


# --------------------------------------------------------------------------- sampling checks

@dataclass(frozen=True)
class SampleBatch:
    kind: str
    k: int
    x: np.ndarray
    xb: np.ndarray
    y: np.ndarray
    yb: np.ndarray
    yp: np.ndarray
    ypb: np.ndarray
    zp: np.ndarray
    zpb: np.ndarray


class ConditionSampler:
    """Seeded stream of point pairs for condition checks.

    Each batch fills every node of one level with a pair of points.  Batch
    kinds rotate between Gaussian points, scaled coordinate directions and
    near-duplicate pairs.  Iteration stops once ``n_samples`` node pairs
    have been produced; iterating again replays the same stream.
    """

    KINDS = ("gaussian", "axis", "near")

    def __init__(self, lat: Lattice, dim: int, horizon: int | None = None,
                 n_samples: int = 10_000, scale: float = 1.0, seed: int = 0):
        self.lat = lat
        self.dim = dim
        self.horizon = lat.depth if horizon is None else horizon
        self.n_samples = n_samples
        self.scale = scale
        self.seed = seed

    def _draw(self, rng, kind, shape):
        if kind == "axis":
            idx = rng.integers(0, shape[1], size=shape[0])
            out = np.zeros(shape)
            out[np.arange(shape[0]), idx] = rng.choice([-1.0, 1.0], size=shape[0])
            return out * self.scale * rng.exponential(1.0, size=(shape[0], 1))
        return self.scale * rng.standard_normal(shape)

    def __iter__(self) -> Iterator[SampleBatch]:
        rng = np.random.default_rng(self.seed)
        produced = 0
        levels = max(self.horizon, 1)
        b = 0
        while produced < self.n_samples:
            kind = self.KINDS[b % 3]
            k = int(rng.integers(0, levels))
            shape = (self.lat.level_size(k), self.dim)
            arrays = []
            for _ in range(4):
                a = self._draw(rng, kind, shape)
                if kind == "near":
                    ab = a + 1e-6 * self.scale * rng.standard_normal(shape)
                else:
                    ab = self._draw(rng, kind, shape)
                arrays.extend([a, ab])
            produced += shape[0]
            b += 1
            yield SampleBatch(kind, k, *arrays)


@dataclass(frozen=True)
class Violation:
    condition: str
    level: int
    node: int
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


@dataclass
class ConditionReport:
    """Outcome per condition: ``passed``, ``violated`` or ``vacuous`` (skipped because 1/0 = inf)."""

    status: dict = field(default_factory=dict)
    checked: dict = field(default_factory=dict)
    worst_margin: dict = field(default_factory=dict)
    violation_count: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    max_stored: int = 100

    @property
    def ok(self) -> bool:
        return not any(v == "violated" for v in self.status.values())

    def mark_vacuous(self, name):
        self.status[name] = "vacuous"
        self.checked.setdefault(name, 0)

    def record(self, name, k, lhs, rhs, tol):
        """Register node-wise comparisons ``lhs <= rhs`` with a relative slack."""
        lhs = np.asarray(lhs, dtype=float)
        rhs = np.asarray(rhs, dtype=float)
        bad = lhs - rhs > tol * (1.0 + np.abs(lhs) + np.abs(rhs))
        self.checked[name] = self.checked.get(name, 0) + lhs.size
        margin = float(np.min(rhs - lhs)) if lhs.size else math.inf
        self.worst_margin[name] = min(self.worst_margin.get(name, math.inf), margin)
        nbad = int(bad.sum())
        self.violation_count[name] = self.violation_count.get(name, 0) + nbad
        if self.status.get(name) != "violated":
            self.status[name] = "violated" if nbad else "passed"
        for i in np.flatnonzero(bad):
            if len(self.violations) >= self.max_stored:
                break
            self.violations.append(Violation(name, k, int(i), float(lhs[i]), float(rhs[i])))

    def merge(self, other: "ConditionReport") -> "ConditionReport":
        out = ConditionReport(max_stored=self.max_stored)
        for rep in (self, other):
            for name, st in rep.status.items():
                prev = out.status.get(name)
                if prev == "violated" or st == "violated":
                    out.status[name] = "violated"
                elif prev == "passed" or st == "passed":
                    out.status[name] = "passed"
                else:
                    out.status[name] = st
                out.checked[name] = out.checked.get(name, 0) + rep.checked.get(name, 0)
                out.violation_count[name] = out.violation_count.get(name, 0) + rep.violation_count.get(name, 0)
                if name in rep.worst_margin:
                    out.worst_margin[name] = min(out.worst_margin.get(name, math.inf), rep.worst_margin[name])
            out.violations.extend(rep.violations)
        out.violations = out.violations[:out.max_stored]
        return out


def _rownorm(a):
    return np.linalg.norm(a, axis=1)


def check_domination(coeffs: CoefficientSet, cert: DomMonCert, sampler, tol: float = 1e-9) -> ConditionReport:
    """Test the three domination bounds on sampled pairs."""
    rep = ConditionReport()
    mu, nu = cert.mu, cert.nu
    if mu <= 0:
        for name in ("Lambda domination", "b domination", "sigma domination"):
            rep.mark_vacuous(name)
    if nu <= 0:
        rep.mark_vacuous("f domination")
    for s in sampler:
        k = s.k
        if mu > 0:
            lhs = _rownorm(coeffs.eval_Lambda(s.y) - coeffs.eval_Lambda(s.yb))
            rep.record("Lambda domination", k, lhs, _rownorm((s.y - s.yb) @ cert.M.T) / mu, tol)
            q = _rownorm(eval_Q(cert, k, s.yp - s.ypb, s.zp - s.zpb)) / mu
            for name, fn in (("b domination", coeffs.eval_b), ("sigma domination", coeffs.eval_sigma)):
                lhs = _rownorm(fn(k, s.x, s.yp, s.zp) - fn(k, s.x, s.ypb, s.zpb))
                rep.record(name, k, lhs, q, tol)
        if nu > 0:
            lhs = _rownorm(coeffs.eval_f(k, s.x, s.yp, s.zp) - coeffs.eval_f(k, s.xb, s.yp, s.zp))
            rep.record("f domination", k, lhs, _rownorm(eval_P(cert, k, s.x - s.xb)) / nu, tol)
    return rep


def check_monotonicity(coeffs: CoefficientSet, cert: DomMonCert, rho: float, sampler,
                       tol: float = 1e-9) -> ConditionReport:
    """Test both one-sided inequalities, in the orientation given by ``cert.sign``."""
    rep = ConditionReport()
    sym = cert.sign is MonotoneSign.SYMMETRIC
    for s in sampler:
        k = s.k
        dy = s.y - s.yb
        lam = np.einsum("ij,ij->i", coeffs.eval_Lambda(s.y) - coeffs.eval_Lambda(s.yb), dy)
        bound = cert.mu * np.sum(((dy) @ cert.M.T) ** 2, axis=1)
        if sym:
            rep.record("Lambda monotonicity", k, bound, lam, tol)
        else:
            rep.record("Lambda monotonicity", k, lam, -bound, tol)
        pair = monotone_pairing(coeffs, rho, k, (s.x, s.yp, s.zp), (s.xb, s.ypb, s.zpb))
        bound = (cert.nu * np.sum(eval_P(cert, k, s.x - s.xb) ** 2, axis=1)
                 + cert.mu * np.sum(eval_Q(cert, k, s.yp - s.ypb, s.zp - s.zpb) ** 2, axis=1))
        if sym:
            rep.record("coupled monotonicity", k, bound, pair, tol)
        else:
            rep.record("coupled monotonicity", k, pair, -bound, tol)
    return rep


def check_lipschitz(coeffs: CoefficientSet, sampler, tol: float = 1e-9) -> ConditionReport:
    """Fuzz the Lipschitz bounds of the declared constants."""
    rep = ConditionReport()
    L = coeffs.lipschitz
    for s in sampler:
        k = s.k
        dx, dyp, dzp = _rownorm(s.x - s.xb), _rownorm(s.yp - s.ypb), _rownorm(s.zp - s.zpb)
        rep.record("Lambda Lipschitz", k,
                   _rownorm(coeffs.eval_Lambda(s.y) - coeffs.eval_Lambda(s.yb)), L.L * _rownorm(s.y - s.yb), tol)
        for name, fn, (la, lb, lc) in (("b Lipschitz", coeffs.eval_b, (L.L1, L.L3, L.L4)),
                                       ("sigma Lipschitz", coeffs.eval_sigma, (L.L1, L.L5, L.L6)),
                                       ("f Lipschitz", coeffs.eval_f, (L.L7, L.L2, L.L2))):
            lhs = _rownorm(fn(k, s.x, s.yp, s.zp) - fn(k, s.xb, s.ypb, s.zpb))
            rep.record(name, k, lhs, la * dx + lb * dyp + lc * dzp, tol)
    return rep


# --------------------------------------------------------------------------- homotopy

def inflate_lipschitz(coeffs: CoefficientSet, cert: DomMonCert) -> CoefficientSet:
    """Raise ``L, L3..L7`` to at least the certificate floor, logging any change."""
    floor = cert.inflation_floor()
    new = coeffs.lipschitz.inflated(floor)
    if new != coeffs.lipschitz:
        log.info("inflated Lipschitz constants of %s to floor %.6g", coeffs.name, floor)
    return replace(coeffs, lipschitz=new)


def regularizer_coefficients(cert: DomMonCert) -> CoefficientSet:
    """The decoupled system at the start of the homotopy."""
    return homotopy_coefficients(zero_coefficients(cert.dim), cert, 0.0)


def homotopy_coefficients(coeffs: CoefficientSet, cert: DomMonCert, alpha: float) -> CoefficientSet:
    """Blend ``alpha * coeffs + (1 - alpha) * regularizer``.

    The regularizer is ``s mu M^T M y`` for Lambda, ``s nu A^T A x`` for f,
    and ``s mu B^T Q``, ``s mu C^T Q`` for b and sigma, with ``s = -1`` for
    the standard monotonicity orientation and ``s = +1`` for the symmetric one.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if alpha == 1.0:
        return inflate_lipschitz(coeffs, cert)
    a = float(alpha)
    r = 1.0 - a
    s = cert.sign.factor
    mu, nu = cert.mu, cert.nu
    MtM = cert.M.T @ cert.M

    def Lam(y):
        return a * coeffs.eval_Lambda(y) + s * r * mu * (np.asarray(y) @ MtM.T)

    def qreg(k, yp, zp):
        return eval_Q(cert, k, yp, zp)

    def b(k, x, yp, zp):
        out = s * r * mu * rmatvec(cert.B.at(k), qreg(k, yp, zp)) if mu else np.zeros_like(x)
        return out + a * coeffs.eval_b(k, x, yp, zp) if a else out

    def sigma(k, x, yp, zp):
        out = s * r * mu * rmatvec(cert.C.at(k), qreg(k, yp, zp)) if mu else np.zeros_like(x)
        return out + a * coeffs.eval_sigma(k, x, yp, zp) if a else out

    def f(k, x, yp, zp):
        Ak = cert.A.at(k)
        out = s * r * nu * rmatvec(Ak, matvec(Ak, x)) if nu else np.zeros_like(x)
        return out + a * coeffs.eval_f(k, x, yp, zp) if a else out

    base = inflate_lipschitz(coeffs, cert)
    return CoefficientSet(coeffs.dim, Lam, b, sigma, f, base.lipschitz,
                          f"{coeffs.name}@alpha={a:g}")


# --------------------------------------------------------------------------- windows

@dataclass(frozen=True)
class WindowReport:
    """Admissible discount window ``(ln 4 L1^2, -ln 6 L2^2)``."""

    L1: float
    L2: float
    lower: float
    upper: float
    feasible: bool
    rho: float | None = None

    @property
    def rho_admissible(self) -> bool | None:
        if self.rho is None:
            return None
        return bool(self.feasible and self.lower < self.rho < self.upper)

    @property
    def product(self) -> float:
        return 24.0 * self.L1 ** 2 * self.L2 ** 2


def _safe_log(v):
    return -math.inf if v == 0 else math.log(v)


def parameter_window_check(L1: float, L2: float, rho: float | None = None) -> WindowReport:
    L1, L2 = abs(float(L1)), abs(float(L2))
    lower = _safe_log(4.0 * L1 * L1)
    upper = -_safe_log(6.0 * L2 * L2)
    feasible = bool(24.0 * L1 ** 2 * L2 ** 2 < 1.0)
    return WindowReport(L1, L2, lower, upper, feasible, None if rho is None else float(rho))
