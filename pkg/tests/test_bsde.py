import math

import numpy as np
import pytest

from fbsde_lattice.bsde import (
    BackwardGenerator,
    audit_generator_lipschitz,
    bsde_estimate_constant,
    solve_bsde,
    truncation_study,
    verify_bsde_estimates,
)
from fbsde_lattice.errors import HorizonError, WindowError
from fbsde_lattice.lattice import NoiseModel, build_lattice
from fbsde_lattice.spaces import WeightConfig


def const_gen(c, dim=1):
    return BackwardGenerator(lambda k, yp, zp: np.full_like(yp, c), dim)


def test_zero_generator():
    lat = build_lattice(3)
    y = solve_bsde(const_gen(0.0, 2), lat, WeightConfig(0.0, 3))
    assert all(not np.any(y[k]) for k in range(4))


def test_constant_generator():
    lat = build_lattice(3)
    y = solve_bsde(const_gen(2.5), lat, WeightConfig(0.0, 3))
    for k in range(3):
        np.testing.assert_allclose(y[k], 2.5)
    assert not np.any(y[3])


def test_geometric_recursion():
    lat = build_lattice(3)
    g = BackwardGenerator(lambda k, yp, zp: 0.25 * yp + 1.0, 1, 0.25)
    y = solve_bsde(g, lat, WeightConfig(0.0, 3))
    np.testing.assert_allclose([y[2][0, 0], y[1][0, 0], y[0][0, 0]], [1.0, 1.25, 1.3125])


def test_noise_coefficient_enters():
    # y_1 equals the first noise outcome, so z'_0 = E[w_0^2] = 1 and y_0 = 1
    lat = build_lattice(2, NoiseModel.three_point())
    w0 = np.asarray(lat.noise(0).values)[:, None]

    def gen(k, yp, zp):
        return zp if k == 0 else w0

    y = solve_bsde(BackwardGenerator(gen, 1, 1.0), lat, WeightConfig(0.0, 2))
    np.testing.assert_allclose(y[0], 1.0)


def test_estimate_constants():
    assert bsde_estimate_constant(0.25, -0.5) == pytest.approx(2.3553, abs=5e-5)
    assert bsde_estimate_constant(0.0, 0.0) == pytest.approx(3.0)
    with pytest.raises(WindowError):
        bsde_estimate_constant(0.25, -math.log(6 * 0.0625))


def test_identical_generators():
    lat = build_lattice(3)
    g = BackwardGenerator(lambda k, yp, zp: 0.2 * yp + 0.1 * zp + 1.0, 1, 0.2)
    rep = verify_bsde_estimates(g, g, lat, WeightConfig(-0.5, 3))
    assert rep.passed and rep.stability_bound.lhs == 0.0


def test_zero_comparison_reduces_to_norm_bound():
    lat = build_lattice(3)
    g = BackwardGenerator(lambda k, yp, zp: 0.2 * np.sin(yp) + 0.1 * zp + 1.0, 1, 0.2)
    rep = verify_bsde_estimates(g, const_gen(0.0), lat, WeightConfig(-0.5, 3))
    assert rep.stability_bound.lhs == pytest.approx(rep.norm_bound.lhs)
    assert rep.stability_bound.rhs == pytest.approx(rep.norm_bound.rhs)
    assert rep.passed


def test_random_linear_generators():
    rng = np.random.default_rng(5)
    lat = build_lattice(4)
    for _ in range(100):
        a, c, a2, c2 = rng.uniform(-1, 1, 4)
        L2 = max(abs(a), abs(c))
        g = BackwardGenerator(lambda k, yp, zp, a=a, c=c: a * yp + c * zp + 1.0, 1, L2)
        gb = BackwardGenerator(lambda k, yp, zp, a=a2, c=c2: a * yp + c * zp, 1)
        rho = -math.log(6 * L2 ** 2) - 0.1 - rng.uniform(0, 1)
        assert verify_bsde_estimates(g, gb, lat, WeightConfig(rho, 4)).passed


def test_truncation_constant_generator():
    lat = build_lattice(5)
    rho, c = 0.4, 1.5
    rep = truncation_study(const_gen(c), lat, WeightConfig(rho, 5), [2, 3, 4, 5])
    for N, d in zip((2, 3, 4), rep.consecutive):
        assert d == pytest.approx(math.exp(-rho * N) * c * c)
    assert rep.monotone


def test_truncation_finite_support():
    lat = build_lattice(5)
    g = BackwardGenerator(lambda k, yp, zp: np.full_like(yp, 1.0 if k <= 1 else 0.0), 1, 0.0)
    rep = truncation_study(g, lat, WeightConfig(0.0, 5), [3, 4, 5])
    assert np.all(rep.distances == 0.0)


def test_truncation_contracting_ratios():
    lat = build_lattice(6)
    rho = -1.0
    g = BackwardGenerator(lambda k, yp, zp: 0.1 * yp + math.exp(rho * (k + 1) / 2) * 0.5 ** k, 1, 0.1)
    rep = truncation_study(g, lat, WeightConfig(rho, 6), range(1, 7))
    assert rep.monotone and all(r < 1 for r in rep.ratios)


def test_truncation_horizon_check():
    with pytest.raises(HorizonError):
        truncation_study(const_gen(1.0), build_lattice(2), WeightConfig(0.0, 2), [1, 3])


def test_generator_audit():
    g = BackwardGenerator(lambda k, yp, zp: 0.3 * yp - 0.2 * zp, 1, 0.3)
    assert audit_generator_lipschitz(g, build_lattice(2), 2) <= 0.3 + 1e-12
