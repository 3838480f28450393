import math

import numpy as np
import pytest

from fbsde_lattice.errors import WindowError
from fbsde_lattice.lattice import build_lattice
from fbsde_lattice.sde import (
    ForwardCoefficients,
    audit_forward_lipschitz,
    picard_contraction_bound,
    sde_estimate_constant,
    solve_sde,
    verify_sde_estimates,
)
from fbsde_lattice.spaces import WeightConfig


def zero_map(k, x):
    return np.zeros_like(x)


def test_zero_coefficients_start_only():
    lat = build_lattice(3)
    x = solve_sde(ForwardCoefficients(zero_map, zero_map, np.array([2.0, -1.0])), lat, WeightConfig(0.0, 3))
    np.testing.assert_allclose(x[0], [[2.0, -1.0]])
    for k in (1, 2, 3):
        assert not np.any(x[k])


def test_scalar_branches():
    lat = build_lattice(1)
    c = ForwardCoefficients(lambda k, x: 0.5 * x, lambda k, x: np.ones_like(x), np.array([1.0]))
    x = solve_sde(c, lat, WeightConfig(0.0, 1))
    np.testing.assert_allclose(x[1][:, 0], [1.5, -0.5])
    assert lat.expectation(x[1][:, 0] ** 2) == pytest.approx(1.25)


def test_deterministic_fixed_point():
    lat = build_lattice(4)
    c = ForwardCoefficients(lambda k, x: x, zero_map, np.array([1.0]))
    x = solve_sde(c, lat, WeightConfig(0.0, 4))
    for k in range(5):
        np.testing.assert_allclose(x[k], 1.0)


def test_estimate_constants():
    assert sde_estimate_constant(0.5, 1.0) == pytest.approx(2.7459, abs=5e-5)
    assert sde_estimate_constant(0.0, 0.0) == pytest.approx(3.0)
    with pytest.raises(WindowError):
        sde_estimate_constant(0.5, 0.0)


def test_identical_coefficients_pass():
    lat = build_lattice(3)
    c = ForwardCoefficients(lambda k, x: 0.3 * np.sin(x) + 1, lambda k, x: 0.2 * x, np.array([0.5]), 0.3)
    rep = verify_sde_estimates(c, c, lat, WeightConfig(0.5, 3))
    assert rep.passed
    assert rep.stability_bound.lhs == 0.0 and rep.stability_bound.rhs == 0.0


def test_zero_dynamics_norm_bound():
    lat = build_lattice(2)
    v = np.array([1.0, 2.0])
    c = ForwardCoefficients(zero_map, zero_map, v)
    rep = verify_sde_estimates(c, c, lat, WeightConfig(0.0, 2))
    assert rep.norm_bound.lhs == pytest.approx(5.0)
    assert rep.norm_bound.rhs >= 5.0 and rep.passed


def test_random_linear_scalar_instances():
    rng = np.random.default_rng(3)
    lat = build_lattice(5)
    for _ in range(100):
        a, s, a2, s2 = rng.uniform(-1, 1, 4)
        L1 = max(abs(a), abs(s))
        c = ForwardCoefficients(lambda k, x, a=a: a * x + 1.0, lambda k, x, s=s: s * x, np.array([1.0]), L1)
        cb = ForwardCoefficients(lambda k, x, a=a2: a * x, lambda k, x, s=s2: s * x + 0.5, np.array([0.0]))
        rho = math.log(4 * L1 ** 2) + 0.1 + rng.uniform(0, 1)
        assert verify_sde_estimates(c, cb, lat, WeightConfig(rho, 5)).passed


def test_contraction_bound_formula():
    assert picard_contraction_bound(0.5, 0.0) == pytest.approx(math.sqrt(2) / 2)


def test_lipschitz_audit_detects_understatement():
    lat = build_lattice(2)
    c = ForwardCoefficients(lambda k, x: 2 * x, zero_map, np.array([0.0]), lipschitz=1.0)
    assert audit_forward_lipschitz(c, lat, 2) > 1.0
