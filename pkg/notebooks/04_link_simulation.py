# coding: utf-8

# # The receiver in time
#
# The delay line holds 2 * ell received vectors. While one batch is being
# written the combiner reads the previous one, a slice of n_q outputs per use,
# against thresholds that repeat every ell uses.

# In[1]:

from dqmimo import (ChannelModel, DelayNetwork, build_constellation, channel_arrangement,
                    induced_channel, simulate_link)

net = DelayNetwork(2, 1)
for i in range(1, 7):
    print(i, net.step([float(i)]))


# Error rate and empirical rate across SNR, with the bit-level check that the
# pipeline agrees with the geometric cell lookup.

# In[2]:

ch = ChannelModel.random(1, 2, seed=1)
arr = channel_arrangement(ch, 2, ell=2, rng=1)
print("snr_db  error_rate  bits/use  mismatches  latency")
for db in (10, 20, 30, 40):
    cons = build_constellation(ch, arr, 2, 10 ** (db / 10))
    chan = induced_channel(cons, 20_000, rng=db)
    rep = simulate_link(ch, cons, chan, 5000, rng=db, messages="support")
    print(f"{db:6d} {rep.error_rate:11.4f} {rep.empirical_rate:9.4f} "
          f"{rep.pipeline_mismatches:11d} {rep.latency_uses:8d}")
