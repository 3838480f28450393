"""Forward and backward linear-quadratic control on a lattice.

Both problems are solved through their Hamiltonian systems, which are
coupled forward-backward equations meeting the domination-monotonicity
conditions with explicitly constructed certificates.  Costs are truncated
at the horizon ``N``: running costs are summed over ``k = 0..N-1`` and the
backward variables vanish at level ``N``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bsde import backward_recursion, one_step_projections
from .coefficients import (
    CoefficientSet,
    DomMonCert,
    DrivingTerms,
    LevelMatrices,
    Lipschitz,
    matvec,
    rmatvec,
)
from .errors import SpecError, WindowError
from .fbsde import FBSDESolution, SolverOptions, fbsde_residual, projections, solve
from .lattice import Lattice
from .sde import ForwardCoefficients, solve_sde
from .spaces import AdaptedProcess, WeightConfig

EIG_TOL = 1e-12


# --------------------------------------------------------------------------- matrix helpers

def _sym_eig(mat):
    return np.linalg.eigh(0.5 * (mat + np.swapaxes(mat, -1, -2)))


def psd_power(mat: np.ndarray, power: float) -> np.ndarray:
    """Matrix power of a symmetric nonnegative matrix (batched over leading axes)."""
    vals, vecs = _sym_eig(np.asarray(mat, dtype=float))
    if power < 0 and np.any(vals <= 0):
        raise SpecError("negative power of a singular matrix")
    vals = np.clip(vals, 0.0, None) ** power
    return (vecs * vals[..., None, :]) @ np.swapaxes(vecs, -1, -2)


def _combine(fn, *mats: LevelMatrices) -> LevelMatrices:
    """Level-wise image of several matrix processes."""
    lengths = [len(m.entries()) for m in mats if m._levels is not None]
    if not lengths:
        return LevelMatrices(fn(*(m.at(0) for m in mats)))
    return LevelMatrices([fn(*(m.at(k) for m in mats)) for k in range(max(lengths))])


def _max_norm(lm: LevelMatrices, ord=2) -> float:
    return max(float(np.max(np.linalg.norm(e, ord, axis=(-2, -1)))) for e in lm.entries())


def _min_eig(lm: LevelMatrices) -> float:
    return min(float(np.min(_sym_eig(e)[0])) for e in lm.entries())


def _is_symmetric(lm: LevelMatrices) -> bool:
    return all(np.allclose(e, np.swapaxes(e, -1, -2), atol=1e-12) for e in lm.entries())


def _forcing(proc, k):
    """Level-``k`` value of a forcing term: an adapted process, a constant vector, or ``None``."""
    if proc is None:
        return 0.0
    if isinstance(proc, AdaptedProcess):
        return proc[k] if k <= proc.horizon else 0.0
    return np.asarray(proc, dtype=float)


def _level_mats(value, name) -> LevelMatrices:
    """Scalars and 2-D arrays are constant; lists of matrices are per level."""
    try:
        if isinstance(value, LevelMatrices):
            return value
        if isinstance(value, (list, tuple)) and np.ndim(value[0]) >= 2:
            return LevelMatrices(list(value))
        return LevelMatrices(np.atleast_2d(np.asarray(value, dtype=float)))
    except (ValueError, IndexError) as exc:
        raise SpecError(f"{name}: {exc}") from exc


# --------------------------------------------------------------------------- forward LQ

@dataclass
class ForwardLQSpec:
    """Data of the forward problem.

    ``A``, ``C`` are ``n x n`` and ``B``, ``D`` are ``n x m`` matrix
    processes; ``Q`` given as a single matrix is the weight for ``k >= 1``
    (level 0 carries ``Q_0 = 0``); a per-level list must start with zero.
    ``b`` and ``sigma`` are optional forcing terms, either adapted
    processes or constant vectors.
    """

    A: object
    B: object
    C: object
    D: object
    M: object
    Q: object
    R: object
    rho: float
    b: object = None
    sigma: object = None

    def __post_init__(self):
        self.A = _level_mats(self.A, "A")
        self.B = _level_mats(self.B, "B")
        self.C = _level_mats(self.C, "C")
        self.D = _level_mats(self.D, "D")
        self.R = _level_mats(self.R, "R")
        self.M = np.atleast_2d(np.asarray(self.M, dtype=float))
        q = self.Q
        if isinstance(q, LevelMatrices):
            pass
        elif isinstance(q, (list, tuple)) and np.ndim(q[0]) >= 2:
            q = LevelMatrices(list(q))
        else:
            q2 = np.atleast_2d(np.asarray(q, dtype=float))
            q = LevelMatrices([np.zeros_like(q2), q2])
        self.Q = q

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    def lipschitz_pair(self):
        a = max(self.A.norm(), self.C.norm())
        return a, math.exp(-self.rho) * a

    def validate(self) -> "ForwardLQSpec":
        n, m = self.n, self.m
        for name, lm, shape in (("A", self.A, (n, n)), ("C", self.C, (n, n)), ("B", self.B, (n, m)),
                                ("D", self.D, (n, m)), ("Q", self.Q, (n, n)), ("R", self.R, (m, m))):
            if lm.shape != shape:
                raise SpecError(f"{name} has shape {lm.shape}, expected {shape}")
        if self.M.shape != (n, n):
            raise SpecError(f"M has shape {self.M.shape}, expected {(n, n)}")
        if not np.allclose(self.M, self.M.T, atol=1e-12) or np.min(np.linalg.eigvalsh(self.M)) <= EIG_TOL:
            raise SpecError("M must be symmetric positive definite")
        if not (_is_symmetric(self.Q) and _is_symmetric(self.R)):
            raise SpecError("Q and R must be symmetric")
        if _min_eig(self.Q) < -EIG_TOL:
            raise SpecError("Q must be nonnegative definite")
        if np.any(np.abs(self.Q.at(0)) > 0):
            raise SpecError("the level-0 state weight Q_0 must vanish")
        if _min_eig(self.R) <= EIG_TOL:
            raise SpecError("R must be uniformly positive definite")
        frob = _max_norm(self.A, "fro") + _max_norm(self.C, "fro")
        if frob > 0 and not self.rho > math.log(6.0 * frob ** 2):
            raise WindowError(f"rho={self.rho} must exceed ln(6(|A|+|C|)^2) = {math.log(6 * frob ** 2):.6g}")
        return self


@dataclass
class LQSolution:
    xbar: AdaptedProcess
    ybar: AdaptedProcess
    control: AdaptedProcess
    initial: np.ndarray | None
    cost: float
    stationarity_residual: float
    fbsde: FBSDESolution | None = None
    hamiltonian_residual: float = math.nan
    extras: dict = field(default_factory=dict)


def _flq_control(spec, k, yp, zp):
    """``-R^{-1} e^{-rho} (B^T y' + D^T z')`` at level ``k``."""
    e = math.exp(-spec.rho)
    g = rmatvec(spec.B.at(k), yp) + rmatvec(spec.D.at(k), zp)
    Rk = spec.R.at(k)
    if Rk.ndim == 2:
        return -e * np.linalg.solve(Rk, g.T).T
    return -e * np.linalg.solve(Rk, g[..., None])[..., 0]


def assemble_flq_hamiltonian(spec: ForwardLQSpec, case: str = "case1"):
    """Coupled system obtained by eliminating the control, with a certificate.

    Case 1 uses ``M^{-1/2}`` and ``R^{-1/2} B^T``, ``R^{-1/2} D^T``; case 2
    uses ``Q^{1/2}``.
    """
    spec.validate()
    n = spec.n
    rho = spec.rho
    e = math.exp(-rho)
    Minv = np.linalg.inv(spec.M)
    bproc, sproc = spec.b, spec.sigma

    def Lam(y):
        return -(np.asarray(y) @ Minv.T)

    def b(k, x, yp, zp):
        u = _flq_control(spec, k, yp, zp)
        return matvec(spec.A.at(k), x) + matvec(spec.B.at(k), u) + _forcing(bproc, k)

    def sigma(k, x, yp, zp):
        u = _flq_control(spec, k, yp, zp)
        return matvec(spec.C.at(k), x) + matvec(spec.D.at(k), u) + _forcing(sproc, k)

    def f(k, x, yp, zp):
        return -(e * rmatvec(spec.A.at(k), yp) + e * rmatvec(spec.C.at(k), zp) + matvec(spec.Q.at(k), x))

    L1, L2 = spec.lipschitz_pair()
    Rih = _combine(lambda r: psd_power(r, -0.5), spec.R)
    BR = _combine(lambda bb, r: bb @ r, spec.B, Rih).norm()
    DR = _combine(lambda dd, r: dd @ r, spec.D, Rih).norm()
    Rinv_n = _combine(lambda r: psd_power(r, -1.0), spec.R).norm()
    Bn, Dn = spec.B.norm(), spec.D.norm()
    lips = Lipschitz(
        L=float(np.linalg.norm(Minv, 2)), L1=L1, L2=L2,
        L3=e * Bn * Rinv_n * Bn, L4=e * Bn * Rinv_n * Dn,
        L5=e * Dn * Rinv_n * Bn, L6=e * Dn * Rinv_n * Dn,
        L7=spec.Q.norm())
    coeffs = CoefficientSet(n, Lam, b, sigma, f, lips, "lq-flq")

    if str(case).lower().replace(" ", "") in ("case1", "1"):
        beta = max(BR, DR)
        mh = float(np.linalg.norm(psd_power(spec.M, -0.5), 2))
        cands = [1.0] + [v ** (-2.0 / 3.0) for v in (beta, mh) if v > 0]
        mu = min(cands)
        s = mu ** -0.5
        Mt = s * psd_power(spec.M, -0.5)
        Bt = _combine(lambda r, bb: s * e * r @ np.swapaxes(bb, -1, -2), Rih, spec.B)
        Ct = _combine(lambda r, dd: s * e * r @ np.swapaxes(dd, -1, -2), Rih, spec.D)
        rows = max(n, spec.m)
        Mt = np.pad(Mt, ((0, rows - n), (0, 0)))
        cert = DomMonCert(mu, 0.0, Mt, None, Bt.padded_rows(rows), Ct.padded_rows(rows), "case1")
    else:
        qh = _combine(lambda q: psd_power(q, 0.5), spec.Q)
        qn = qh.norm()
        nu = min(1.0, qn ** (-2.0 / 3.0)) if qn > 0 else 1.0
        s = nu ** -0.5
        At = _combine(lambda q: s * q, qh)
        cert = DomMonCert(0.0, nu, np.zeros((n, n)), At, None, None, "case2")
    return coeffs, cert


def flq_state(spec: ForwardLQSpec, xi, u: AdaptedProcess, lat: Lattice, w: WeightConfig) -> AdaptedProcess:
    """State of the forward control system for initial state ``xi`` and control ``u``."""
    bproc, sproc = spec.b, spec.sigma

    def drift(k, x):
        return matvec(spec.A.at(k), x) + matvec(spec.B.at(k), u[k]) + _forcing(bproc, k)

    def diffusion(k, x):
        return matvec(spec.C.at(k), x) + matvec(spec.D.at(k), u[k]) + _forcing(sproc, k)

    return solve_sde(ForwardCoefficients(drift, diffusion, np.atleast_1d(np.asarray(xi, dtype=float))),
                     lat, w)


def _quad(lat, k, mat, a, b=None):
    b = a if b is None else b
    return float(lat.measure(k) @ np.einsum("ij,ij->i", matvec(mat, a), b))


def flq_cost(spec: ForwardLQSpec, xi, u: AdaptedProcess, lat: Lattice, w: WeightConfig) -> float:
    """Truncated criterion ``1/2 (<M xi, xi> + sum_{k<N} e^{-rho k} E[<Q x, x> + <R u, u>])``."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    x = flq_state(spec, xi, u, lat, w)
    total = float(xi @ spec.M @ xi)
    for k in range(w.horizon):
        total += math.exp(-spec.rho * k) * (_quad(lat, k, spec.Q.at(k), x[k]) + _quad(lat, k, spec.R.at(k), u[k]))
    return 0.5 * total


def solve_flq(spec: ForwardLQSpec, lat: Lattice, w: WeightConfig, opts: SolverOptions | None = None,
              case: str = "case1") -> LQSolution:
    coeffs, cert = assemble_flq_hamiltonian(spec, case)
    opts = opts or SolverOptions()
    N = opts.horizon(w)
    wN = WeightConfig(spec.rho, N)
    d = DrivingTerms.zeros(spec.n)
    sol = solve(coeffs, cert, d, lat, WeightConfig(spec.rho, w.horizon), opts)
    yp, zp = projections(lat, sol.y, N)
    u = AdaptedProcess(lat, [_flq_control(spec, k, yp[k], zp[k]) for k in range(N)]) if N else None
    e = math.exp(-spec.rho)
    stat = 0.0
    for k in range(N):
        g = e * (rmatvec(spec.B.at(k), yp[k]) + rmatvec(spec.D.at(k), zp[k])) + matvec(spec.R.at(k), u[k])
        stat = max(stat, float(np.max(np.linalg.norm(g, axis=1))))
    xi = -(np.linalg.inv(spec.M) @ sol.y[0][0])
    cost = flq_cost(spec, xi, u, lat, wN)
    ham = fbsde_residual(coeffs, d, sol, lat, wN)
    return LQSolution(sol.x, sol.y, u, xi, cost, stat, sol, ham)


@dataclass(frozen=True)
class LQVerification:
    """Per-trial cost gaps against the optimum.

    ``quadratic`` holds the explicit nonnegative quadratic form in the
    perturbation and ``cross`` the cross term that must vanish at the
    optimum; ``gap = quadratic + cross`` holds identically.
    """

    gaps: np.ndarray
    quadratic: np.ndarray
    cross: np.ndarray

    @property
    def min_gap(self) -> float:
        return float(np.min(self.gaps)) if self.gaps.size else 0.0

    @property
    def max_identity_error(self) -> float:
        return float(np.max(np.abs(self.gaps - self.quadratic))) if self.gaps.size else 0.0

    @property
    def max_cross(self) -> float:
        return float(np.max(np.abs(self.cross))) if self.cross.size else 0.0

    def passed(self, gap_tol: float = 1e-10, identity_tol: float = 1e-8) -> bool:
        return self.min_gap >= -gap_tol and self.max_identity_error <= identity_tol


def _random_control(rng, lat, m, N, scale):
    return AdaptedProcess(lat, [scale * rng.standard_normal((lat.level_size(k), m)) for k in range(N)])


def verify_flq(spec: ForwardLQSpec, sol: LQSolution, lat: Lattice, w: WeightConfig,
               trials: int = 200, seed: int = 0, include_zero: bool = False) -> LQVerification:
    rng = np.random.default_rng(seed)
    N = w.horizon
    xbar = flq_state(spec, sol.initial, sol.control, lat, w)
    ubar = sol.control
    j0 = flq_cost(spec, sol.initial, ubar, lat, w)
    gaps, quads, cross = [], [], []
    for t in range(trials):
        scale = 0.0 if include_zero and t == 0 else float(rng.uniform(0.01, 1.0))
        dxi = scale * rng.standard_normal(spec.n)
        du = _random_control(rng, lat, spec.m, N, scale)
        xi = sol.initial + dxi
        u = ubar + du
        x = flq_state(spec, xi, u, lat, w)
        dx = x - xbar
        q = float(dxi @ spec.M @ dxi)
        c = float(spec.M @ sol.initial @ dxi)
        for k in range(N):
            disc = math.exp(-spec.rho * k)
            q += disc * (_quad(lat, k, spec.Q.at(k), dx[k]) + _quad(lat, k, spec.R.at(k), du[k]))
            c += disc * (_quad(lat, k, spec.Q.at(k), xbar[k], dx[k]) + _quad(lat, k, spec.R.at(k), ubar[k], du[k]))
        gaps.append(flq_cost(spec, xi, u, lat, w) - j0)
        quads.append(0.5 * q)
        cross.append(c)
    return LQVerification(np.array(gaps), np.array(quads), np.array(cross))


# --------------------------------------------------------------------------- backward LQ

@dataclass
class BackwardLQSpec:
    """Data of the backward problem ``y_k = A y' + B z' + C v_k + alpha_k``."""

    A: object
    B: object
    C: object
    M: object
    Q: object
    L: object
    R: object
    rho: float
    alpha: object = None

    def __post_init__(self):
        for name in ("A", "B", "C", "Q", "L", "R"):
            setattr(self, name, _level_mats(getattr(self, name), name))
        self.M = np.atleast_2d(np.asarray(self.M, dtype=float))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.C.shape[1]

    def lipschitz_pair(self):
        a = max(self.A.norm(), self.B.norm())
        return math.exp(self.rho) * a, a

    def validate(self) -> "BackwardLQSpec":
        n, m = self.n, self.m
        for name, lm, shape in (("A", self.A, (n, n)), ("B", self.B, (n, n)), ("C", self.C, (n, m)),
                                ("Q", self.Q, (n, n)), ("L", self.L, (n, n)), ("R", self.R, (m, m))):
            if lm.shape != shape:
                raise SpecError(f"{name} has shape {lm.shape}, expected {shape}")
        if self.M.shape != (n, n):
            raise SpecError(f"M has shape {self.M.shape}, expected {(n, n)}")
        if not np.allclose(self.M, self.M.T, atol=1e-12) or np.min(np.linalg.eigvalsh(self.M)) <= EIG_TOL:
            raise SpecError("M must be symmetric positive definite")
        if not all(_is_symmetric(x) for x in (self.Q, self.L, self.R)):
            raise SpecError("Q, L and R must be symmetric")
        if min(_min_eig(self.Q), _min_eig(self.L)) < -EIG_TOL:
            raise SpecError("Q and L must be nonnegative definite")
        if _min_eig(self.R) <= EIG_TOL:
            raise SpecError("R must be uniformly positive definite")
        frob = _max_norm(self.A, "fro") + _max_norm(self.B, "fro")
        if frob > 0 and not self.rho < -math.log(6.0 * frob ** 2):
            raise WindowError(f"rho={self.rho} must lie below -ln(6(|A|+|B|)^2) = {-math.log(6 * frob ** 2):.6g}")
        return self


def _blq_control(spec, k, x):
    """``R^{-1} C^T x`` at level ``k``."""
    g = rmatvec(spec.C.at(k), x)
    Rk = spec.R.at(k)
    if Rk.ndim == 2:
        return np.linalg.solve(Rk, g.T).T
    return np.linalg.solve(Rk, g[..., None])[..., 0]


def assemble_blq_hamiltonian(spec: BackwardLQSpec, case: str = "case1"):
    spec.validate()
    n = spec.n
    er = math.exp(spec.rho)
    aproc = spec.alpha

    def Lam(y):
        return -(np.asarray(y) @ spec.M.T)

    def b(k, x, yp, zp):
        return er * (rmatvec(spec.A.at(k), x) - matvec(spec.Q.at(k), yp))

    def sigma(k, x, yp, zp):
        return er * (rmatvec(spec.B.at(k), x) - matvec(spec.L.at(k), zp))

    def f(k, x, yp, zp):
        out = matvec(spec.A.at(k), yp) + matvec(spec.B.at(k), zp) + matvec(spec.C.at(k), _blq_control(spec, k, x))
        return -(out + _forcing(aproc, k))

    L1, L2 = spec.lipschitz_pair()
    Rinv_n = _combine(lambda r: psd_power(r, -1.0), spec.R).norm()
    Cn = spec.C.norm()
    lips = Lipschitz(L=float(np.linalg.norm(spec.M, 2)), L1=L1, L2=L2,
                     L3=er * spec.Q.norm(), L4=0.0, L5=0.0, L6=er * spec.L.norm(),
                     L7=Cn * Rinv_n * Cn)
    coeffs = CoefficientSet(n, Lam, b, sigma, f, lips, "lq-blq")

    if str(case).lower().replace(" ", "") in ("case1", "1"):
        qh = _combine(lambda q: psd_power(q, 0.5), spec.Q)
        lh = _combine(lambda l: psd_power(l, 0.5), spec.L)
        gam = er * max(qh.norm(), lh.norm())
        mh = float(np.linalg.norm(psd_power(spec.M, 0.5), 2))
        mu = min([1.0] + [v ** (-2.0 / 3.0) for v in (gam, mh) if v > 0])
        s = mu ** -0.5
        zero = np.zeros((n, n))
        Bt = _combine(lambda q: s * np.concatenate([q, np.broadcast_to(zero, q.shape)], axis=-2), qh)
        Ct = _combine(lambda l: s * np.concatenate([np.broadcast_to(zero, l.shape), l], axis=-2), lh)
        Mt = np.concatenate([s * psd_power(spec.M, 0.5), zero], axis=0)
        cert = DomMonCert(mu, 0.0, Mt, None, Bt, Ct, "case1")
    else:
        Rih = _combine(lambda r: psd_power(r, -0.5), spec.R)
        G = _combine(lambda r, c: r @ np.swapaxes(c, -1, -2), Rih, spec.C)
        gn = G.norm()
        nu = min(1.0, gn ** (-2.0 / 3.0)) if gn > 0 else 1.0
        s = nu ** -0.5
        At = _combine(lambda g: s * g, G)
        rows = max(n, spec.m)
        cert = DomMonCert(0.0, nu, np.zeros((rows, n)), At.padded_rows(rows), None, None, "case2")
    return coeffs, cert


def blq_state(spec: BackwardLQSpec, v: AdaptedProcess, lat: Lattice, w: WeightConfig) -> AdaptedProcess:
    aproc = spec.alpha

    def gen(k, yp, zp):
        out = matvec(spec.A.at(k), yp) + matvec(spec.B.at(k), zp) + matvec(spec.C.at(k), v[k])
        return out + _forcing(aproc, k)

    return backward_recursion(gen, spec.n, lat, w.horizon)


def _blq_terms(spec, y, v, lat, N):
    """Level-wise ``(y', z', v)`` used by the cost."""
    out = []
    for k in range(N):
        yp, zp = one_step_projections(lat, y[k + 1], k)
        out.append((yp, zp, v[k]))
    return out


def blq_cost(spec: BackwardLQSpec, v: AdaptedProcess, lat: Lattice, w: WeightConfig) -> float:
    y = blq_state(spec, v, lat, w)
    y0 = y[0][0]
    total = float(y0 @ spec.M @ y0)
    for k, (yp, zp, vk) in enumerate(_blq_terms(spec, y, v, lat, w.horizon)):
        total += math.exp(-spec.rho * k) * (_quad(lat, k, spec.Q.at(k), yp) + _quad(lat, k, spec.L.at(k), zp)
                                            + _quad(lat, k, spec.R.at(k), vk))
    return 0.5 * total


def solve_blq(spec: BackwardLQSpec, lat: Lattice, w: WeightConfig, opts: SolverOptions | None = None,
              case: str = "case1") -> LQSolution:
    coeffs, cert = assemble_blq_hamiltonian(spec, case)
    opts = opts or SolverOptions()
    N = opts.horizon(w)
    wN = WeightConfig(spec.rho, N)
    d = DrivingTerms.zeros(spec.n)
    sol = solve(coeffs, cert, d, lat, WeightConfig(spec.rho, w.horizon), opts)
    v = AdaptedProcess(lat, [_blq_control(spec, k, sol.x[k]) for k in range(N)]) if N else None
    stat = 0.0
    for k in range(N):
        g = rmatvec(spec.C.at(k), sol.x[k]) - matvec(spec.R.at(k), v[k])
        stat = max(stat, float(np.max(np.linalg.norm(g, axis=1))))
    cost = blq_cost(spec, v, lat, wN)
    ham = fbsde_residual(coeffs, d, sol, lat, wN)
    state_gap = (blq_state(spec, v, lat, wN) - sol.y).max_abs()
    return LQSolution(sol.x, sol.y, v, None, cost, stat, sol, ham, {"state_gap": state_gap})


def verify_blq(spec: BackwardLQSpec, sol: LQSolution, lat: Lattice, w: WeightConfig,
               trials: int = 200, seed: int = 0, include_zero: bool = False) -> LQVerification:
    rng = np.random.default_rng(seed)
    N = w.horizon
    vbar = sol.control
    ybar = blq_state(spec, vbar, lat, w)
    bar_terms = _blq_terms(spec, ybar, vbar, lat, N)
    j0 = blq_cost(spec, vbar, lat, w)
    gaps, quads, cross = [], [], []
    for t in range(trials):
        scale = 0.0 if include_zero and t == 0 else float(rng.uniform(0.01, 1.0))
        dv = _random_control(rng, lat, spec.m, N, scale)
        v = vbar + dv
        y = blq_state(spec, v, lat, w)
        dy0 = y[0][0] - ybar[0][0]
        q = float(dy0 @ spec.M @ dy0)
        c = float(spec.M @ ybar[0][0] @ dy0)
        for k, ((yp, zp, _), (ypb, zpb, vb)) in enumerate(zip(_blq_terms(spec, y, v, lat, N), bar_terms)):
            disc = math.exp(-spec.rho * k)
            dyp, dzp = yp - ypb, zp - zpb
            Qk, Lk, Rk = spec.Q.at(k), spec.L.at(k), spec.R.at(k)
            q += disc * (_quad(lat, k, Qk, dyp) + _quad(lat, k, Lk, dzp) + _quad(lat, k, Rk, dv[k]))
            c += disc * (_quad(lat, k, Qk, ypb, dyp) + _quad(lat, k, Lk, zpb, dzp) + _quad(lat, k, Rk, vb, dv[k]))
        gaps.append(blq_cost(spec, v, lat, w) - j0)
        quads.append(0.5 * q)
        cross.append(c)
    return LQVerification(np.array(gaps), np.array(quads), np.array(cross))


# --------------------------------------------------------------------------- brute-force oracle

@dataclass(frozen=True)
class QPResult:
    variables: np.ndarray
    cost: float
    hessian: np.ndarray
    initial: np.ndarray | None
    control: AdaptedProcess


def _minimize_quadratic(J, dim):
    """Exact minimizer of a quadratic from its values on basis points."""
    eye = np.eye(dim)
    j0 = J(np.zeros(dim))
    ji = np.array([J(eye[i]) for i in range(dim)])
    H = np.empty((dim, dim))
    for i in range(dim):
        for j in range(i, dim):
            val = J(eye[i] + eye[j]) - ji[i] - ji[j] + j0
            H[i, j] = H[j, i] = val
    g = ji - j0 - 0.5 * np.diag(H)
    v = np.linalg.solve(H, -g)
    return v, H


def _unpack_control(vec, lat, m, N, offset=0):
    vals = []
    for k in range(N):
        nk = lat.level_size(k)
        vals.append(vec[offset:offset + nk * m].reshape(nk, m))
        offset += nk * m
    return AdaptedProcess(lat, vals), offset


def flq_qp_oracle(spec: ForwardLQSpec, lat: Lattice, w: WeightConfig) -> QPResult:
    """Minimize the truncated cost over the initial state and every node-wise control value."""
    N, n, m = w.horizon, spec.n, spec.m
    dim = n + m * sum(lat.level_size(k) for k in range(N))

    def J(vec):
        u, _ = _unpack_control(vec, lat, m, N, n)
        return flq_cost(spec, vec[:n], u, lat, w)

    v, H = _minimize_quadratic(J, dim)
    u, _ = _unpack_control(v, lat, m, N, n)
    return QPResult(v, J(v), H, v[:n].copy(), u)


def blq_qp_oracle(spec: BackwardLQSpec, lat: Lattice, w: WeightConfig) -> QPResult:
    N, m = w.horizon, spec.m
    dim = m * sum(lat.level_size(k) for k in range(N))

    def J(vec):
        v, _ = _unpack_control(vec, lat, m, N)
        return blq_cost(spec, v, lat, w)

    v, H = _minimize_quadratic(J, dim)
    ctrl, _ = _unpack_control(v, lat, m, N)
    return QPResult(v, J(v), H, None, ctrl)
