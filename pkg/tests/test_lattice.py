import math

import numpy as np
import pytest

from fbsde_lattice.errors import LatticeSizeError, LevelMismatchError, MomentError
from fbsde_lattice.lattice import (
    Lattice,
    NodeId,
    NoiseModel,
    build_lattice,
    cond_exp,
    cond_exp_noise,
    expectation,
)


def test_depth_one_rademacher():
    lat = build_lattice(1, NoiseModel.rademacher())
    assert lat.level_size(0) == 1 and lat.level_size(1) == 2
    np.testing.assert_allclose(lat.measure(1), [0.5, 0.5])


def test_depth_three_measures():
    lat = build_lattice(3)
    assert lat.level_size(3) == 8
    np.testing.assert_allclose(lat.measure(3), np.full(8, 1 / 8))


def test_three_point_moments_and_size():
    nm = NoiseModel.three_point()
    w, p = nm.values, nm.weights
    assert abs(p @ w) < 1e-15 and abs(p @ w ** 2 - 1) < 1e-15
    assert build_lattice(2, nm).level_size(2) == 9


@pytest.mark.parametrize("support, probs", [
    ((1.0, 0.0), (0.5, 0.5)),          # nonzero mean
    ((2.0, -2.0), (0.5, 0.5)),          # wrong variance
    ((1.0, -1.0), (0.6, 0.6)),          # probabilities do not sum to one
    ((1.0, -1.0), (1.0, 0.0)),          # zero branch
    ((1.0,), (1.0,)),
])
def test_moment_validation(support, probs):
    with pytest.raises(MomentError):
        NoiseModel(support, probs)


def test_standardized_rescales():
    nm = NoiseModel.standardized([0, 1, 5], [1, 2, 1])
    assert abs(nm.weights @ nm.values) < 1e-12
    assert abs(nm.weights @ nm.values ** 2 - 1) < 1e-12


def test_size_cap():
    with pytest.raises(LatticeSizeError):
        Lattice(30, NoiseModel.rademacher(), max_nodes=1000)


def test_per_level_noise_length_checked():
    with pytest.raises(ValueError):
        Lattice(3, [NoiseModel.rademacher()] * 2)


def test_cond_exp_examples():
    lat = build_lattice(1)
    assert cond_exp(np.array([3.0, 1.0]), lat)[0] == pytest.approx(2.0)
    lat3 = build_lattice(1, NoiseModel.three_point())
    assert cond_exp(np.array([4.0, 1.0, 0.0]), lat3)[0] == pytest.approx(1.5)
    lat_deep = build_lattice(3)
    np.testing.assert_allclose(cond_exp(np.full(8, 5.0), lat_deep), np.full(4, 5.0))


def test_cond_exp_noise_examples():
    lat = build_lattice(2)
    np.testing.assert_allclose(cond_exp_noise(np.full(4, 7.0), lat), 0.0, atol=1e-15)
    lat1 = build_lattice(1)
    assert cond_exp_noise(np.array([3.0, 1.0]), lat1)[0] == pytest.approx(1.0)
    nm = NoiseModel.three_point()
    lat3 = build_lattice(1, nm)
    assert cond_exp_noise(nm.values, lat3)[0] == pytest.approx(1.0)


def test_expectation_examples():
    lat = build_lattice(3)
    assert expectation(np.full(8, 2.5), lat) == pytest.approx(2.5)
    assert expectation(np.array([3.0, 1.0]), lat, 1) == pytest.approx(2.0)
    ind = np.zeros(8)
    ind[5] = 1.0
    assert expectation(ind, lat) == pytest.approx(1 / 8)


def test_vector_valued_cond_exp():
    lat = build_lattice(2, NoiseModel.three_point())
    v = np.arange(18, dtype=float).reshape(9, 2)
    out = lat.cond_exp(v, 2)
    assert out.shape == (3, 2)
    np.testing.assert_allclose(out[0], 0.25 * v[0] + 0.5 * v[1] + 0.25 * v[2])


def test_level_mismatch_raises():
    lat = build_lattice(2)
    with pytest.raises(LevelMismatchError):
        lat.cond_exp(np.zeros(3))
    with pytest.raises(LevelMismatchError):
        lat.cond_exp(np.zeros(2), 2)
    with pytest.raises(LevelMismatchError):
        lat.cond_exp(np.zeros(1), 0)


def test_node_navigation_roundtrip():
    lat = Lattice(3, [NoiseModel.rademacher(), NoiseModel.three_point(), NoiseModel.rademacher()])
    for idx in range(lat.level_size(3)):
        node = NodeId(3, idx)
        assert lat.node_index(lat.path(node)) == node
        assert node in lat.children(lat.parent(node))
    assert lat.children(NodeId(3, 0)) == []
    with pytest.raises(LevelMismatchError):
        lat.parent(NodeId(0, 0))


def test_branch_layout_matches_children():
    lat = build_lattice(2, NoiseModel.three_point())
    drift = np.array([[1.0], [2.0], [3.0]])
    diff = np.array([[0.0], [1.0], [0.0]])
    out = lat.branch(1, drift, diff)
    r = math.sqrt(2)
    np.testing.assert_allclose(out[3:6, 0], [2 - r, 2, 2 + r])
    np.testing.assert_allclose(out[[0, 1, 2, 6, 7, 8], 0], [1, 1, 1, 3, 3, 3])
