import math

import numpy as np
import pytest

from fbsde_lattice.errors import HorizonError, LevelMismatchError
from fbsde_lattice.lattice import build_lattice
from fbsde_lattice.spaces import (
    AdaptedProcess,
    WeightConfig,
    level_sq_means,
    pair_norm_sq,
    tail_bound,
    weighted_norm_sq,
)


@pytest.fixture
def lat():
    return build_lattice(2)


def ones(lat, horizon=2):
    return AdaptedProcess.deterministic(lat, [[1.0]] * (horizon + 1))


def test_zero_norm(lat):
    assert weighted_norm_sq(AdaptedProcess.zeros(lat, 2, 2), WeightConfig(0.3, 2)) == 0.0


def test_geometric_norm(lat):
    assert weighted_norm_sq(ones(lat), WeightConfig(math.log(2), 2)) == pytest.approx(1.75)


def test_single_level_norm(lat):
    g = AdaptedProcess(lat, [[0.0], [3.0, 1.0], [0.0] * 4])
    assert weighted_norm_sq(g, WeightConfig(0.0, 2)) == pytest.approx(5.0)


def test_pair_norm(lat):
    w = WeightConfig(math.log(2), 2)
    g = ones(lat)
    z = AdaptedProcess.zeros(lat, 1, 2)
    assert pair_norm_sq(z, z, w) == 0.0
    assert pair_norm_sq(g, z, w) == pytest.approx(weighted_norm_sq(g, w))
    assert pair_norm_sq(g, g, w) == pytest.approx(3.5)


def test_tail_bound(lat):
    w = WeightConfig(math.log(2), 2)
    assert tail_bound(ones(lat), w, 3) == 0.0
    assert tail_bound(ones(lat), w, 1) == pytest.approx(0.75)
    only0 = AdaptedProcess(lat, [[4.0], [0.0, 0.0], [0.0] * 4])
    assert tail_bound(only0, w, 1) == 0.0


def test_horizon_checks(lat):
    with pytest.raises(HorizonError):
        WeightConfig(0.0, 5).check(lat)
    with pytest.raises(HorizonError):
        weighted_norm_sq(AdaptedProcess.zeros(lat, 1, 1), WeightConfig(0.0, 2))
    with pytest.raises(ValueError):
        WeightConfig(float("nan"), 1)


def test_shape_validation(lat):
    with pytest.raises(LevelMismatchError):
        AdaptedProcess(lat, [[0.0], [1.0, 2.0, 3.0]])
    with pytest.raises(HorizonError):
        AdaptedProcess(lat, [[0.0]] + [[0.0] * 2] + [[0.0] * 4] + [[0.0] * 8])


def test_arithmetic_and_resize(lat):
    g = AdaptedProcess.from_function(lat, 2, 2, lambda k: [k, -k])
    h = 2 * g - g
    np.testing.assert_allclose(h[2], g[2])
    assert g.resized(1).horizon == 1 and g.resized(1).resized(2)[2].sum() == 0
    np.testing.assert_allclose(level_sq_means(g), [0, 2, 8])
