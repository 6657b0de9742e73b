# coding: utf-8

# # What delay buys
#
# Combining ell received vectors before quantization turns n_q ADCs per use
# into ell * n_q comparisons on an ell * rank dimensional space. The exact
# per-use rate cap is (1/ell) log2 of the cell count.

# In[1]:

import math

from dqmimo import high_snr_rate_exact, theorem1_bounds
from dqmimo.asymptotics import fig4_rate


# With four ADCs on a rank-two channel the cap climbs toward four bits.

# In[2]:

print("  ell   exact  zero_t   bound")
for ell in (1, 2, 4, 8, 16, 64, 256):
    b = theorem1_bounds(4, 2, 2, ell)
    print(f"{ell:5d} {high_snr_rate_exact(4, 2, ell):7.4f} "
          f"{high_snr_rate_exact(4, 2, ell, zero_threshold=True):7.4f} {b.lower:7.4f}")


# When ADCs outnumber twice the rank, growth in n_q is only logarithmic.

# In[3]:

for n_t in (2, 4, 8):
    row = [fig4_rate(n_q, n_t) for n_q in (4, 8, 16, 32, 64)]
    print(n_t, " ".join(f"{r:7.3f}" for r in row))


# Local slope against log2 n_q at n_q = 64 sits close to the rank.

# In[4]:

for n_t in (2, 4, 8):
    s = (fig4_rate(65, n_t) - fig4_rate(63, n_t)) / (math.log2(65) - math.log2(63))
    print(n_t, round(s, 3))
