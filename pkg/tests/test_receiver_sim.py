import math

import numpy as np
import pytest

from dqmimo.arrangement import Arrangement, channel_arrangement, max_regions
from dqmimo.channel import ChannelModel
from dqmimo.codec import blahut_arimoto, build_constellation, induced_channel
from dqmimo.errors import InvalidArgument
from dqmimo.receiver_sim import (DelayNetwork, Receiver, period_index,
                                 plugin_mutual_information, quantize_block, simulate_link,
                                 step_delay_network, use_thresholds)


def test_delay_network_emissions_ell2():
    net = DelayNetwork(2, 1)
    out = [net.step([float(i)]) for i in range(1, 7)]
    assert out[0] is None and out[1] is None
    assert [o[0] for o in out[2:]] == [1, 2, 1, 2]
    for o in out[2:4]:
        assert o[1].tolist() == [1.0, 2.0]
    for o in out[4:6]:
        assert o[1].tolist() == [3.0, 4.0]


def test_delay_network_ell1_and_buffer():
    net = DelayNetwork(1, 2)
    assert net.step([1.0, 1.0]) is None
    k, block = net.step([2.0, 2.0])
    assert k == 1 and block.tolist() == [1.0, 1.0]
    net = DelayNetwork(3, 1)
    for i in range(10):
        state, _ = step_delay_network(net, [float(i)])
    assert len(state.buffer) == 6 and state.channel_use == 10
    with pytest.raises(InvalidArgument):
        net.step([1.0, 2.0])


def test_quantize_examples():
    assert quantize_block(np.zeros(3), np.zeros(3)).tolist() == [1, 1, 1]
    assert quantize_block([-1.0, 1.0], [0.0, 0.0]).tolist() == [0, 1]
    with pytest.raises(InvalidArgument):
        quantize_block([1.0], [0.0, 0.0])


def test_threshold_periodicity():
    t = np.arange(6.0)
    assert [period_index(i, 3) for i in range(1, 8)] == [1, 2, 3, 1, 2, 3, 1]
    for i in range(1, 10):
        assert np.array_equal(use_thresholds(t, i, 3, 2), use_thresholds(t, i + 3, 3, 2))
    assert use_thresholds(t, 3, 3, 2).tolist() == [4.0, 5.0]


def test_receiver_rejects_wrong_combiner():
    arr = Arrangement(np.ones((3, 2)), np.zeros(3))
    with pytest.raises(InvalidArgument):
        Receiver(arr, 2, 1)


def _link(n_t, n_r, n_q, ell, power, seed=1, mc=20_000):
    ch = ChannelModel.random(n_t, n_r, seed=seed)
    arr = channel_arrangement(ch, n_q, ell, rng=0)
    cons = build_constellation(ch, arr, ell, power)
    return ch, cons, induced_channel(cons, mc, rng=0)


@pytest.mark.parametrize("n_t,n_r,ell", [(1, 1, 1), (1, 2, 3), (2, 2, 2), (1, 1, 4)])
def test_pipeline_matches_geometry_and_latency(n_t, n_r, ell):
    ch, cons, chan = _link(n_t, n_r, 2, ell, 100.0, mc=2000)
    rep = simulate_link(ch, cons, chan, 500, rng=3)
    assert rep.pipeline_mismatches == 0 and rep.stray_patterns == 0
    assert rep.latency_uses == 2 * ell
    assert 0 <= rep.error_rate <= 1 and rep.seed == 3


@pytest.mark.parametrize("decoder", ["ml", "sign"])
def test_zero_noise_no_errors(decoder):
    ch, cons, chan = _link(2, 2, 3, 1, 0.5)
    rep = simulate_link(ch, cons, chan, 2000, rng=0, decoder=decoder, noise_scale=0.0)
    assert rep.message_errors == 0


def test_high_snr_line():
    ch = ChannelModel([[1.0]])
    arr = Arrangement(np.array([[1.0], [1.0]]), np.array([-1.0, 1.0]))
    cons = build_constellation(ch, arr, 1, 10**5)
    rep = simulate_link(ch, cons, induced_channel(cons), 10**4, rng=0)
    assert len(cons) == 3 and rep.error_rate < 1e-2
    assert rep.snr_db == pytest.approx(50.0)


def test_error_rate_monotone_in_snr():
    rates = []
    for db in (10, 20, 30, 40):
        ch, cons, chan = _link(2, 2, 3, 1, 10 ** (db / 10))
        rates.append(simulate_link(ch, cons, chan, 4000, rng=db).error_rate)
    for a, b in zip(rates, rates[1:]):
        se = math.sqrt((a * (1 - a) + b * (1 - b)) / 4000)
        assert b <= a + 2 * se


def test_plugin_mi_below_capacity():
    ch, cons, chan = _link(1, 1, 2, 1, 10.0)
    n = 20_000
    cap = blahut_arimoto(chan).rate
    rep = simulate_link(ch, cons, chan, n, rng=5, messages="support")
    k = len(cons)
    se = math.sqrt(2 * (k - 1) ** 2 / n)           # loose plug-in bias and spread allowance
    assert rep.empirical_rate <= cap + 3 * se


def test_plugin_mi_known_values():
    sent = np.array([0, 1, 0, 1])
    assert plugin_mutual_information(sent, sent, 2, 2) == pytest.approx(1.0)
    assert plugin_mutual_information(sent, np.array([0, 0, 1, 1]), 2, 2) == pytest.approx(0.0)


def test_one_shot_count_consistency():
    ch, cons, chan = _link(2, 3, 4, 1, 1e6, mc=2000)
    assert len(cons) == max_regions(4, 2)
    assert blahut_arimoto(chan).rate == pytest.approx(math.log2(max_regions(4, 2)), abs=1e-3)


def test_simulate_rejects_bad_arguments():
    ch, cons, chan = _link(1, 1, 2, 1, 10.0, mc=1000)
    with pytest.raises(InvalidArgument):
        simulate_link(ch, cons, chan, 10, decoder="map")
    other = Arrangement(np.eye(2), np.zeros(2))
    with pytest.raises(InvalidArgument):
        simulate_link(ch, cons, chan, 10, arr=other)
    with pytest.raises(InvalidArgument):
        simulate_link(ChannelModel(np.eye(2)), cons, chan, 10)
