import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dqmimo.arrangement import (Arrangement, channel_arrangement, enumerate_regions,
                                general_position_arrangement, max_regions,
                                max_regions_zero_threshold, sample_region_count,
                                sign_vector, sign_vector_ambient)
from dqmimo.channel import ChannelModel
from dqmimo.errors import ConstructionFailure, InvalidArgument, ResourceLimit

LINE = Arrangement(np.array([[1.0], [1.0]]), np.zeros(2))


def test_sign_vector_examples():
    assert sign_vector(LINE, [1.0]).tolist() == [1, 1]
    assert sign_vector(LINE, [-1.0]).tolist() == [0, 0]
    axes = Arrangement(np.eye(2), np.zeros(2))
    assert sign_vector(axes, [1.0, -1.0]).tolist() == [1, 0]


def test_tie_maps_to_one():
    arr = Arrangement(np.array([[1.0, -1.0], [2.0, 0.5]]), np.array([0.0, -2.5]))
    assert sign_vector(arr, [1.0, 1.0]).tolist() == [1, 1]


def test_sign_vector_batch_matches_single():
    arr = general_position_arrangement(4, 2, rng=0)
    pts = np.random.default_rng(1).standard_normal((50, 2))
    batch = sign_vector(arr, pts)
    assert all(np.array_equal(batch[i], sign_vector(arr, p)) for i, p in enumerate(pts))


def test_duplicate_line_example():
    regions = enumerate_regions(LINE)
    assert regions.as_set() == {(0, 0), (1, 1)}
    assert regions.degenerate
    assert sample_region_count(LINE, 1000, 2.0, rng=0) == 2


def test_three_lines():
    arr = Arrangement(np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]), np.array([0.0, 0.0, -1.0]))
    assert len(enumerate_regions(arr)) == 7
    central = Arrangement(arr.v, np.zeros(3))
    assert len(enumerate_regions(central)) == 6


@pytest.mark.parametrize("n_q,d,want", [(3, 2, 7), (2, 1, 3), (0, 5, 1), (5, 2, 16), (1, 3, 2)])
def test_max_regions(n_q, d, want):
    assert max_regions(n_q, d) == want


@pytest.mark.parametrize("n_q,d,want", [(3, 2, 6), (1, 1, 2), (4, 2, 8), (5, 2, 10)])
def test_max_regions_zero_threshold(n_q, d, want):
    assert max_regions_zero_threshold(n_q, d) == want


def test_four_random_central_lines():
    rng = np.random.default_rng(4)
    arr = Arrangement(rng.standard_normal((4, 2)), np.zeros(4))
    assert len(enumerate_regions(arr)) == 8


@pytest.mark.parametrize("n_q,d,zero,want", [(5, 2, False, 16), (5, 2, True, 10), (1, 3, False, 2)])
@pytest.mark.parametrize("method", ["spread", "iid"])
def test_general_position_counts(n_q, d, zero, want, method):
    arr = general_position_arrangement(n_q, d, zero, rng=3, method=method)
    assert arr.zero_threshold == zero
    assert len(enumerate_regions(arr)) == want


def test_construction_failure_after_retries():
    with pytest.raises(ConstructionFailure):
        general_position_arrangement(6, 3, rng=0, max_retries=0)


def test_budget_exceeded():
    arr = Arrangement(np.random.default_rng(0).standard_normal((25, 2)), np.ones(25))
    with pytest.raises(ResourceLimit):
        enumerate_regions(arr)
    arr = Arrangement(np.random.default_rng(0).standard_normal((2, 13)), np.ones(2))
    with pytest.raises(ResourceLimit):
        enumerate_regions(arr)


def test_brute_force_agrees_on_small_instances():
    # every sign pattern checked by its own LP against the incremental frontier
    from dqmimo.arrangement import _unit_rows, strict_interior
    for seed in range(5):
        rng = np.random.default_rng(seed)
        arr = Arrangement(rng.standard_normal((5, 2)), rng.standard_normal(5))
        a, b = _unit_rows(arr)
        brute = {s for s in product((0, 1), repeat=5)
                 if strict_interior(a, b, 2.0 * np.array(s) - 1.0)[0] >= 1e-7}
        assert enumerate_regions(arr).as_set() == brute


def test_regions_have_interior_certificates():
    arr = general_position_arrangement(6, 3, rng=2)
    regions = enumerate_regions(arr)
    assert len({bytes(s) for s in regions.signs}) == len(regions)
    assert np.all(regions.margins >= 1e-7)
    for s, p in zip(regions.signs, regions.points):
        assert np.array_equal(sign_vector(arr, p), s)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), n_q=st.integers(1, 6), d=st.integers(1, 3),
       zero=st.booleans(), c=st.floats(1e-3, 1e3))
def test_count_bounds_and_scale_invariance(seed, n_q, d, zero, c):
    rng = np.random.default_rng(seed)
    t = np.zeros(n_q) if zero else rng.standard_normal(n_q)
    arr = Arrangement(rng.standard_normal((n_q, d)), t)
    regions = enumerate_regions(arr)
    assert len(regions) <= max_regions(n_q, d)
    if zero:
        assert len(regions) <= max_regions_zero_threshold(n_q, d)
    assert enumerate_regions(arr.scaled(c)).as_set() == regions.as_set()
    assert sample_region_count(arr, 2000, 3.0, rng=seed) <= len(regions)


def test_sampling_oracle_single_point():
    assert sample_region_count(general_position_arrangement(3, 2, rng=0), 1, 1.0, rng=0) == 1
    with pytest.raises(InvalidArgument):
        sample_region_count(LINE, 0, 1.0)


def test_json_round_trip():
    ch = ChannelModel.random(2, 3, seed=0)
    arr = channel_arrangement(ch, 3, rng=1)
    back = Arrangement.from_json(arr.to_json())
    assert np.array_equal(back.v, arr.v) and np.array_equal(back.t, arr.t)
    assert np.allclose(back.normals, arr.normals)
    doc = {"v": [[1.0], [1.0]], "t": [0.0, 0.0], "d": 1, "zero_threshold": True}
    assert Arrangement.from_json(doc).zero_threshold
    with pytest.raises(InvalidArgument):
        Arrangement.from_json({"v": [[1.0]], "t": [1.0], "d": 2, "zero_threshold": False})
    with pytest.raises(InvalidArgument):
        Arrangement.from_json({"v": [[1.0]], "t": [1.0], "zero_threshold": True})


def test_zero_rows_rejected():
    with pytest.raises(InvalidArgument):
        Arrangement(np.array([[1.0, 0.0], [0.0, 0.0]]), np.zeros(2))
    # a row orthogonal to the image vanishes after composition with the basis
    with pytest.raises(InvalidArgument):
        Arrangement(np.array([[1.0, -1.0]]), np.zeros(1), basis=np.array([[1.0], [1.0]]) / math.sqrt(2))


def test_channel_arrangement_lives_in_block_image():
    ch = ChannelModel.random(1, 2, seed=0)
    arr = channel_arrangement(ch, 2, ell=3, rng=0)
    assert arr.m_q == 6 and arr.d == 3 and arr.v.shape == (6, 6)
    assert len(enumerate_regions(arr)) == max_regions(6, 3)
    u = ch.block_image(3)
    assert np.allclose(arr.v, arr.v @ u @ u.T)
    y = np.random.default_rng(0).standard_normal((10, 3))
    assert np.array_equal(sign_vector(arr, y), sign_vector_ambient(arr, arr.to_ambient(y)))


def test_arrangement_is_immutable():
    with pytest.raises(ValueError):
        LINE.t[0] = 1.0
