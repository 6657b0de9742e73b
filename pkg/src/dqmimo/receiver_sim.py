"""Time-domain simulation of the delay-line receiver.

Received vectors enter a line of ``2 * ell`` delay elements. While batch
``m`` is being written, the combiner reads batch ``m - 1`` and produces
``n_q`` outputs per channel use, which are compared against a threshold
sub-vector that repeats with period ``ell``. After ``ell`` uses the
``ell * n_q`` bits of a block are complete and go to the decoder.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from .arrangement import sign_vector
from .channel import apply_channel
from .codec import blahut_arimoto
from .errors import InvalidArgument


def period_index(i, ell):
    """1-based threshold slot used at 1-based channel use ``i``."""
    return (i - 1) % ell + 1


class DelayNetwork:
    """Double buffer of ``2 * ell`` received vectors."""

    def __init__(self, ell, n_r):
        self.ell = ell
        self.n_r = n_r
        self.buffer = deque(maxlen=2 * ell)
        self.channel_use = 0

    def step(self, y):
        """Store ``y``; return ``(k, block)`` while the previous batch is being combined.

        ``block`` is the time-major concatenation of the batch the combiner
        reads at this use and ``k`` the 1-based use index within the batch
        period. Nothing is returned during the first ``ell`` uses.
        """
        y = np.asarray(y, dtype=float)
        if y.shape != (self.n_r,):
            raise InvalidArgument(f"expected a length-{self.n_r} vector, got {y.shape}")
        self.buffer.append(y)
        self.channel_use += 1
        i, ell = self.channel_use, self.ell
        if i <= ell:
            return None
        k = period_index(i, ell)
        # batch under combination occupies the ell slots written before the current batch
        stored = list(self.buffer)
        start = len(stored) - k - ell
        return k, np.concatenate(stored[start:start + ell])


def step_delay_network(state, y):
    out = state.step(y)
    return state, out


def quantize_block(combiner_out, t):
    """One-bit ADCs: ``1{out + t >= 0}``."""
    out = np.asarray(combiner_out, dtype=float)
    t = np.asarray(t, dtype=float)
    if out.shape != t.shape:
        raise InvalidArgument(f"{out.shape} combiner outputs but {t.shape} thresholds")
    return (out + t >= 0).astype(np.uint8)


def use_thresholds(t, i, ell, n_q):
    """Threshold sub-vector applied at 1-based channel use ``i``."""
    k = period_index(i, ell)
    return np.asarray(t)[(k - 1) * n_q:k * n_q]


class Receiver:
    """Delay network, blockwise combiner and periodic-threshold ADCs."""

    def __init__(self, arr, ell, n_r):
        if arr.v.shape != (arr.m_q, ell * n_r) or arr.m_q % ell:
            raise InvalidArgument("combiner must be (ell * n_q) x (ell * n_r)")
        self.arr = arr
        self.ell = ell
        self.n_q = arr.m_q // ell
        self.net = DelayNetwork(ell, n_r)
        self._bits = []

    def step(self, y):
        """Feed one received vector; return ``(bits, block)`` when a block completes."""
        out = self.net.step(y)
        if out is None:
            return None
        k, block = out
        rows = slice((k - 1) * self.n_q, k * self.n_q)
        w = self.arr.v[rows] @ block
        self._bits.append(quantize_block(w, use_thresholds(self.arr.t, self.net.channel_use,
                                                           self.ell, self.n_q)))
        if k < self.ell:
            return None
        bits = np.concatenate(self._bits)
        self._bits = []
        return bits, block


@dataclass
class SimReport:
    message_errors: int
    blocks: int
    error_rate: float
    snr_db: float
    latency_uses: int
    seed: object
    pipeline_mismatches: int = 0
    empirical_rate: float = 0.0     # bits per channel use
    stray_patterns: int = 0


def plugin_mutual_information(sent, received, k_in, k_out):
    """Plug-in estimate (bits) from paired symbol indices."""
    joint = np.zeros((k_in, k_out))
    np.add.at(joint, (sent, received), 1.0)
    joint /= joint.sum()
    px = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    nz = joint > 0
    return float((joint[nz] * np.log2(joint[nz] / (px @ py)[nz])).sum())


def simulate_link(ch, cons, chan, n_blocks, rng=None, decoder="ml", messages="uniform",
                  noise_scale=1.0, arr=None):
    """Send ``n_blocks`` representatives through the channel and the receiver.

    Messages are uniform over all cells, or uniform over the support of the
    capacity-achieving input distribution with ``messages="support"``. The
    ``ml`` decoder picks the input maximising the induced-channel likelihood
    of the received cell; ``sign`` accepts the received cell as is. ``chan``
    must describe unit-variance noise unless ``noise_scale`` is 0. Every
    block is also classified geometrically to confirm that the time-domain
    bits agree with ``sign_vector`` of the noisy block.
    """
    if arr is not None and (arr.m_q != cons.arr.m_q or arr.d != cons.arr.d):
        raise InvalidArgument("arrangement does not match the constellation")
    if decoder not in ("ml", "sign"):
        raise InvalidArgument(f"unknown decoder {decoder!r}")
    ell = cons.ell
    arr = cons.arr
    K = len(cons)
    if cons.inputs.shape[1] != ell * ch.n_t:
        raise InvalidArgument("constellation inputs do not match the channel")
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = np.random.default_rng(rng)
    if messages == "support":
        dist = blahut_arimoto(chan).input_distribution
        alphabet = np.flatnonzero(dist > 1e-6)
    else:
        alphabet = np.arange(K)
    sent = rng.choice(alphabet, size=n_blocks)
    index = cons.index()
    # ML is taken with respect to the noise actually injected; without noise
    # every representative lands in its own cell and the channel is the identity
    likelihood = chan.transition if noise_scale else np.eye(K)
    rx = Receiver(arr, ell, ch.n_r)
    decoded = np.empty(n_blocks, dtype=int)
    cells = np.empty(n_blocks, dtype=int)
    mismatches = stray = 0
    latency = None
    done = 0
    # one extra block of silence flushes the pipeline
    stream = [cons.inputs[j].reshape(ell, ch.n_t) for j in sent] + [np.zeros((ell, ch.n_t))]
    use = 0
    for xs in stream:
        for x in xs:
            use += 1
            y = apply_channel(ch, x, noise_scale * rng.standard_normal(ch.n_r))
            out = rx.step(y)
            if out is None:
                continue
            bits, block = out
            if latency is None:
                latency = use
            geo = sign_vector(arr, arr.to_image(block))
            mismatches += int(not np.array_equal(geo, bits))
            k = index.get(bytes(bits))
            if k is None:
                stray += 1
                z = arr.to_image(block)
                k = int(((cons.reps - z) ** 2).sum(axis=1).argmin())
                decoded[done] = k if decoder == "ml" else -1
            else:
                decoded[done] = int(likelihood[:, k].argmax()) if decoder == "ml" else k
            cells[done] = k
            done += 1
    errors = int((decoded != sent).sum())
    mi = plugin_mutual_information(sent, cells, K, K) / ell
    snr = 10 * np.log10(cons.power) if cons.power else float("nan")
    return SimReport(errors, n_blocks, errors / n_blocks, snr, latency, seed, mismatches, mi, stray)
