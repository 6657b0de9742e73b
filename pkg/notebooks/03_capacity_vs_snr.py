# coding: utf-8

# # Finite-SNR capacity of the cell channel
#
# Each cell gets a representative point and the least-norm input that
# produces it. Noise moves the output between cells; Blahut-Arimoto gives
# the capacity of that finite channel under the average power budget.

# In[1]:

import math

import numpy as np

from dqmimo import ChannelModel, capacity_at_power, channel_arrangement

ch = ChannelModel.random(2, 2, seed=1)
arr = channel_arrangement(ch, 3, rng=1)
print(np.round(ch.h, 3), "rank", ch.rank)


# In[2]:

for db in (0, 10, 20, 30, 40, 50):
    res, cons, chan = capacity_at_power(ch, arr, 1, 10 ** (db / 10), mc_samples=50_000, rng=db)
    print(f"{db:3d} dB  {res.rate_per_use:.4f} bits/use  cells {len(cons)}  "
          f"ceiling {math.log2(len(cons)):.4f}")


# Two uses per block on a scalar channel with one ADC per use: four cells,
# so at most one bit per use.

# In[3]:

sc = ChannelModel.random(1, 1, seed=0)
blk = channel_arrangement(sc, 1, ell=2, rng=0)
for db in (10, 30, 50):
    res, cons, _ = capacity_at_power(sc, blk, 2, 10 ** (db / 10), mc_samples=20_000, rng=0)
    print(db, round(res.rate_per_use, 4), len(cons))
