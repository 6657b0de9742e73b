import numpy as np
import pytest

from dqmimo.channel import ChannelModel, apply_channel, image_basis, sample_noise, snr_db_to_power
from dqmimo.errors import DegenerateChannel, InvalidArgument


def test_apply_channel_hand_examples():
    eye = ChannelModel(np.eye(2))
    assert np.array_equal(apply_channel(eye, [0, 0], [0, 0]), [0, 0])
    assert apply_channel(ChannelModel([[2.0]]), [3.0], [0.5]) == pytest.approx([6.5])
    h = ChannelModel([[1, 1], [1, -1]])
    assert apply_channel(h, [1, 2], [0, 0]) == pytest.approx([3, -1])


def test_apply_channel_dimension_mismatch():
    ch = ChannelModel(np.eye(2))
    with pytest.raises(InvalidArgument):
        apply_channel(ch, [1, 2, 3], [0, 0])
    with pytest.raises(InvalidArgument):
        apply_channel(ch, [1, 2], [0])


def test_noise_statistics_and_determinism():
    z = sample_noise(10**6, 3)
    assert abs(z.mean()) < 0.01
    assert 0.99 < z.var() < 1.01
    assert np.array_equal(sample_noise(3, 11), sample_noise(3, 11))
    assert sample_noise(0, 1).shape == (0,)


def test_image_basis_examples():
    u, r = image_basis(np.eye(2))
    assert r == 2 and np.allclose(u.T @ u, np.eye(2))
    u, r = image_basis([[1, 1], [1, 1]])
    assert r == 1
    assert np.allclose(np.abs(u[:, 0]), [2**-0.5, 2**-0.5])
    h = np.random.default_rng(0).standard_normal((4, 3))
    u, r = image_basis(h)
    assert r == 3
    assert np.abs(h - u @ (u.T @ h)).max() < 1e-10


def test_zero_channel_rejected():
    with pytest.raises(DegenerateChannel):
        image_basis(np.zeros((2, 2)))


def test_output_lies_in_image():
    ch = ChannelModel.random(2, 4, seed=5)
    rng = np.random.default_rng(1)
    for _ in range(20):
        x, n = rng.standard_normal(2), rng.standard_normal(4)
        s = apply_channel(ch, x, n) - n
        assert np.abs(s - ch.image @ (ch.image.T @ s)).max() < 1e-10


@pytest.mark.parametrize("ell", [1, 2, 3])
def test_block_rank_scales_with_ell(ell):
    ch = ChannelModel([[1.0, 2.0], [2.0, 4.0], [0.0, 1.0]])
    assert np.linalg.matrix_rank(ch.block_matrix(ell)) == ell * ch.rank
    u = ch.block_image(ell)
    assert u.shape == (3 * ell, 2 * ell)
    assert np.allclose(u.T @ u, np.eye(2 * ell))
    b = ch.block_matrix(ell)
    assert np.abs(b - u @ (u.T @ b)).max() < 1e-10


def test_block_matrix_is_time_major():
    ch = ChannelModel([[1.0, 2.0]])
    x = np.array([1.0, 0.0, 0.0, 1.0])   # use 1 sends e1, use 2 sends e2
    assert ch.block_matrix(2) @ x == pytest.approx([1.0, 2.0])


def test_rank_deficient_and_power():
    ch = ChannelModel([[1.0, 1.0], [1.0, 1.0 + 1e-12]])
    assert ch.rank == 1
    assert ch.with_power(100.0).snr_db == pytest.approx(20.0)
    assert snr_db_to_power(30) == pytest.approx(1000.0)
    with pytest.raises(InvalidArgument):
        ChannelModel(np.eye(2), power=0.0)


def test_random_channel_reproducible_and_immutable():
    a, b = ChannelModel.random(3, 2, seed=9), ChannelModel.random(3, 2, seed=9)
    assert np.array_equal(a.h, b.h) and a.seed == 9
    assert a.rank == 2
    with pytest.raises(ValueError):
        a.h[0, 0] = 1.0
