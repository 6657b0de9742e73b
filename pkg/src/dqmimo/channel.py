"""Real-valued MIMO channel y = h x + n with unit-variance Gaussian noise."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateChannel, InvalidArgument

RANK_RTOL = 1e-9


def image_basis(h, rtol=RANK_RTOL):
    """Orthonormal basis of the column space of ``h`` and its numerical rank.

    Singular values below ``rtol`` times the largest one count as zero.
    """
    h = np.atleast_2d(np.asarray(h, dtype=float))
    u, s, _ = np.linalg.svd(h, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        raise DegenerateChannel("channel matrix is identically zero")
    rank = int(np.sum(s > rtol * s[0]))
    return u[:, :rank].copy(), rank


@dataclass(frozen=True)
class ChannelModel:
    h: np.ndarray
    power: float = 1.0
    seed: int | None = None
    image: np.ndarray = field(init=False, repr=False)
    rank: int = field(init=False)

    def __post_init__(self):
        h = np.atleast_2d(np.asarray(self.h, dtype=float)).copy()
        if not self.power > 0:
            raise InvalidArgument(f"power must be positive, got {self.power}")
        basis, rank = image_basis(h)
        h.setflags(write=False)
        basis.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "image", basis)
        object.__setattr__(self, "rank", rank)

    @property
    def n_r(self):
        return self.h.shape[0]

    @property
    def n_t(self):
        return self.h.shape[1]

    @property
    def noise_variance(self):
        return 1.0

    @property
    def snr_db(self):
        return 10.0 * np.log10(self.power)

    @classmethod
    def random(cls, n_t, n_r, seed, power=1.0):
        """i.i.d. standard normal gains; full rank with probability one."""
        rng = np.random.default_rng(seed)
        return cls(rng.standard_normal((n_r, n_t)), power=power, seed=seed)

    def with_power(self, power):
        return ChannelModel(self.h, power=power, seed=self.seed)

    def block_matrix(self, ell):
        """Channel seen by a time-major stacked block (y(1), ..., y(ell))."""
        return np.kron(np.eye(ell), self.h)

    def block_image(self, ell):
        """Orthonormal basis of the image of the ell-use block channel."""
        return np.kron(np.eye(ell), self.image)


def apply_channel(ch, x, noise):
    x = np.asarray(x, dtype=float)
    noise = np.asarray(noise, dtype=float)
    if x.shape != (ch.n_t,) or noise.shape != (ch.n_r,):
        raise InvalidArgument(
            f"expected x of length {ch.n_t} and noise of length {ch.n_r}, "
            f"got {x.shape} and {noise.shape}"
        )
    return ch.h @ x + noise


def sample_noise(dim, rng):
    """Standard normal vector of length ``dim``; ``rng`` is a Generator or a seed."""
    rng = np.random.default_rng(rng)
    return rng.standard_normal(int(dim))


def snr_db_to_power(snr_db):
    return 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)
