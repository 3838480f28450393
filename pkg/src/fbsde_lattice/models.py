"""Named coefficient models addressable from configuration files.

Every builder takes a parameter mapping and the discount ``rho`` and
returns a :class:`ModelInstance` bundling coefficients, a certificate
(built automatically where the structure allows it) and driving terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .coefficients import (
    CoefficientSet,
    DomMonCert,
    DrivingTerms,
    Lipschitz,
    matvec,
    rmatvec,
    zero_coefficients,
)
from .errors import ConfigError
from .lattice import Lattice
from .spaces import AdaptedProcess

Builder = Callable[[dict, float], "ModelInstance"]
MODELS: dict[str, Builder] = {}


@dataclass
class ModelInstance:
    name: str
    coeffs: CoefficientSet
    cert: DomMonCert | None
    driving: DrivingTerms
    lq_spec: Any = None

    @property
    def dim(self) -> int:
        return self.coeffs.dim


def register_model(name: str):
    def deco(fn: Builder) -> Builder:
        MODELS[name] = fn
        return fn
    return deco


def build_model(name: str, params: dict | None, rho: float, lat: Lattice | None = None,
                horizon: int | None = None, certificate: dict | None = None) -> ModelInstance:
    """Instantiate a registered model; an explicit ``certificate`` mapping overrides the built-in one."""
    if name not in MODELS:
        raise ConfigError(f"unknown model {name!r}; registered: {sorted(MODELS)}")
    params = dict(params or {})
    inst = MODELS[name](params, float(rho))
    if lat is not None and horizon is not None:
        inst.driving = _driving_from_params(params, inst.dim, lat, horizon, inst.driving)
    if certificate:
        inst.cert = certificate_from_mapping(certificate, inst.dim)
    return inst


def certificate_from_mapping(m: dict, n: int) -> DomMonCert:
    M = np.atleast_2d(np.asarray(m.get("M", np.zeros((n, n))), dtype=float))

    def opt(key):
        v = m.get(key)
        return None if v is None else np.atleast_2d(np.asarray(v, dtype=float))

    try:
        return DomMonCert(m.get("mu", 0.0), m.get("nu", 0.0), M, opt("A"), opt("B"), opt("C"),
                          m.get("case"), m.get("sign", "standard"))
    except ValueError as exc:
        raise ConfigError(f"certificate: {exc}") from exc


def _mat(params, key, n, default=0.0):
    v = params.get(key, default)
    a = np.asarray(v, dtype=float)
    if a.ndim == 0:
        return float(a) * np.eye(n)
    a = np.atleast_2d(a)
    if a.shape != (n, n):
        raise ConfigError(f"parameter {key!r} must be {n}x{n}, got {a.shape}")
    return a


def _vec(params, key, n):
    a = np.asarray(params.get(key, 0.0), dtype=float)
    return np.broadcast_to(a, (n,)).copy()


def _driving_from_params(params, n, lat, horizon, base: DrivingTerms) -> DrivingTerms:
    """Deterministic constant forcing vectors ``psi``, ``gamma``, ``phi`` and ``xi``."""
    def proc(key, existing):
        if key not in params:
            return existing
        v = _vec(params, key, n)
        return AdaptedProcess.deterministic(lat, [v] * (horizon + 1))
    xi = _vec(params, "xi", n) if "xi" in params else base.xi
    return DrivingTerms(xi, proc("phi", base.phi), proc("psi", base.psi), proc("gamma", base.gamma))


def _norm(a) -> float:
    return float(np.linalg.norm(a, 2))


def _lmin(a) -> float:
    return float(np.min(np.linalg.eigvalsh(0.5 * (a + a.T))))


@register_model("zero")
def _zero(params, rho):
    n = int(params.get("dim", 1))
    cert = DomMonCert(1.0, 0.0, np.zeros((n, n)), case="case1")
    return ModelInstance("zero", zero_coefficients(n), cert, DrivingTerms.zeros(n))


@register_model("linear")
def _linear(params, rho):
    """Constant-matrix model.

    ``Lambda(y) = Lam y``, ``b = A x + By y' + Bz z'``,
    ``sigma = C x + Sy y' + Sz z'``, ``f = F x + Gy y' + Gz z'``.
    There is no generic certificate; supply one in the configuration.
    """
    n = int(params.get("dim", 1))
    Lam, A, By, Bz = (_mat(params, k, n) for k in ("Lambda", "A", "By", "Bz"))
    C, Sy, Sz = (_mat(params, k, n) for k in ("C", "Sy", "Sz"))
    F, Gy, Gz = (_mat(params, k, n) for k in ("F", "Gy", "Gz"))

    def b(k, x, yp, zp):
        return matvec(A, x) + matvec(By, yp) + matvec(Bz, zp)

    def sigma(k, x, yp, zp):
        return matvec(C, x) + matvec(Sy, yp) + matvec(Sz, zp)

    def f(k, x, yp, zp):
        return matvec(F, x) + matvec(Gy, yp) + matvec(Gz, zp)

    lips = Lipschitz(_norm(Lam), max(_norm(A), _norm(C)), max(_norm(Gy), _norm(Gz)),
                     _norm(By), _norm(Bz), _norm(Sy), _norm(Sz), _norm(F))
    coeffs = CoefficientSet(n, lambda y: np.asarray(y) @ Lam.T, b, sigma, f, lips, "linear")
    return ModelInstance("linear", coeffs, None, DrivingTerms.zeros(n))


@register_model("saturating")
def _saturating(params, rho):
    """Linear backbone with smooth clamps, coupled through ``y'`` and ``z'``.

    ``Lambda(y) = -Lam y - k0 tanh(y)``,
    ``b = A x - beta1 y' - k1 tanh(y')``, ``sigma = C x - beta2 z' - k2 tanh(z')``,
    ``f = -e^{-rho}(A^T y' + C^T z') - Q x - k3 tanh(x)``.
    ``case`` selects which certificate is built.
    """
    n = int(params.get("dim", 1))
    A, C, Q = _mat(params, "A", n), _mat(params, "C", n), _mat(params, "Q", n)
    Lam = _mat(params, "Lambda", n, 1.0)
    b1, b2 = float(params.get("beta1", 0.5)), float(params.get("beta2", 0.5))
    k0, k1, k2, k3 = (float(params.get(f"kappa{i}", 0.0)) for i in range(4))
    if min(b1, b2, k0, k1, k2, k3) < 0:
        raise ConfigError("saturating model needs nonnegative beta and kappa parameters")
    e = math.exp(-rho)

    def Lambda(y):
        y = np.asarray(y)
        return -(y @ Lam.T) - k0 * np.tanh(y)

    def b(k, x, yp, zp):
        return matvec(A, x) - b1 * yp - k1 * np.tanh(yp)

    def sigma(k, x, yp, zp):
        return matvec(C, x) - b2 * zp - k2 * np.tanh(zp)

    def f(k, x, yp, zp):
        return -e * (rmatvec(A, yp) + rmatvec(C, zp)) - matvec(Q, x) - k3 * np.tanh(x)

    a = max(_norm(A), _norm(C))
    lips = Lipschitz(_norm(Lam) + k0, a, e * a, b1 + k1, 0.0, 0.0, b2 + k2, _norm(Q) + k3)
    coeffs = CoefficientSet(n, Lambda, b, sigma, f, lips, "saturating")
    case = str(params.get("case", "case1")).lower()
    cert = saturating_certificate(n, rho, Lam, Q, b1, b2, k0, k1, k2, k3, case)
    return ModelInstance("saturating", coeffs, cert, DrivingTerms.zeros(n))


def saturating_certificate(n, rho, Lam, Q, b1, b2, k0, k1, k2, k3, case="case1") -> DomMonCert:
    """Certificate for the saturating model.

    Case 1 uses ``B = s[sqrt(beta1) I; 0]``, ``C = s[0; sqrt(beta2) I]`` and
    ``M = t[I; 0]`` with ``mu s^2 = e^{-rho}`` and ``mu t^2 = lmin(Lam)``.
    Case 2 uses ``A = s I`` with ``nu s^2 = lmin(Q)``.  The multiplier is
    the largest value for which every domination bound holds.
    """
    e = math.exp(-rho)
    eye, zero = np.eye(n), np.zeros((n, n))
    if case in ("case1", "1"):
        lam = _lmin(Lam)
        if lam <= 0:
            raise ConfigError("case 1 needs a positive definite Lambda weight")
        caps = [1.0, (lam / (_norm(Lam) + k0) ** 2) ** (1 / 3)]
        for beta, kap in ((b1, k1), (b2, k2)):
            if beta > 0:
                caps.append((e * beta / (beta + kap) ** 2) ** (1 / 3))
            elif kap > 0:
                raise ConfigError("case 1 needs beta > 0 wherever a clamp couples the forward equation")
        mu = min(caps)
        s, t = math.sqrt(e / mu), math.sqrt(lam / mu)
        B = np.vstack([s * math.sqrt(b1) * eye, zero])
        Cm = np.vstack([zero, s * math.sqrt(b2) * eye])
        M = np.vstack([t * eye, zero])
        return DomMonCert(mu, 0.0, M, None, B, Cm, "case1")
    q = _lmin(Q)
    if q <= 0:
        raise ConfigError("case 2 needs a positive definite Q")
    nu = min(1.0, (q / (_norm(Q) + k3) ** 2) ** (1 / 3))
    return DomMonCert(0.0, nu, zero, math.sqrt(q / nu) * eye, None, None, "case2")


def random_saturating(rng: np.random.Generator, n: int, rho: float, case: str = "case1",
                      strength: float = 0.3) -> dict:
    """Parameters of a random saturating instance with couplings of size about ``strength``."""
    def small():
        return (strength * rng.uniform(-1, 1, (n, n)) / max(n, 1)).tolist()

    def spd(lo, hi):
        G = rng.standard_normal((n, n))
        U, _ = np.linalg.qr(G)
        return (U @ np.diag(rng.uniform(lo, hi, n)) @ U.T).tolist()

    return {
        "dim": n, "case": case, "A": small(), "C": small(),
        "Q": spd(0.1, 0.5) if case == "case2" else spd(0.0, 0.3),
        "Lambda": spd(0.2, 0.6),
        "beta1": float(rng.uniform(0.1, 0.4) * strength), "beta2": float(rng.uniform(0.1, 0.4) * strength),
        "kappa0": float(rng.uniform(0, 0.2)), "kappa1": float(rng.uniform(0, 0.1) * strength),
        "kappa2": float(rng.uniform(0, 0.1) * strength), "kappa3": float(rng.uniform(0, 0.2)),
        "xi": rng.uniform(-1, 1, n).tolist(), "psi": rng.uniform(-0.5, 0.5, n).tolist(),
        "gamma": rng.uniform(-0.5, 0.5, n).tolist(), "phi": rng.uniform(-0.5, 0.5, n).tolist(),
    }


def _lq_field(params, key, default=None):
    if key not in params:
        if default is None:
            raise ConfigError(f"LQ model needs parameter {key!r}")
        return default
    return params[key]


@register_model("lq-flq")
def _lq_flq(params, rho):
    from .lq import ForwardLQSpec, assemble_flq_hamiltonian
    spec = ForwardLQSpec(*(_lq_field(params, k) for k in ("A", "B", "C", "D", "M", "Q", "R")), rho=rho,
                         b=params.get("b"), sigma=params.get("sigma"))
    coeffs, cert = assemble_flq_hamiltonian(spec, str(params.get("case", "case1")))
    return ModelInstance("lq-flq", coeffs, cert, DrivingTerms.zeros(spec.n), spec)


@register_model("lq-blq")
def _lq_blq(params, rho):
    from .lq import BackwardLQSpec, assemble_blq_hamiltonian
    spec = BackwardLQSpec(*(_lq_field(params, k) for k in ("A", "B", "C", "M", "Q", "L", "R")), rho=rho,
                          alpha=params.get("alpha"))
    coeffs, cert = assemble_blq_hamiltonian(spec, str(params.get("case", "case1")))
    return ModelInstance("lq-blq", coeffs, cert, DrivingTerms.zeros(spec.n), spec)
