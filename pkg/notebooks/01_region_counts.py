# coding: utf-8

# # Cells cut out of the channel image
#
# One-bit ADCs after a linear combiner split the image of the channel into
# cells, one per distinct output pattern. The number of cells caps the rate at
# high SNR, so it is the first thing worth checking.

# In[1]:

import math

import numpy as np

from dqmimo import (Arrangement, enumerate_regions, general_position_arrangement,
                    max_regions, max_regions_zero_threshold, sample_region_count)


# Two ADCs looking at the same scalar with zero thresholds only ever agree, so
# the line is cut into two halves instead of three.

# In[2]:

dup = Arrangement(np.array([[1.0], [1.0]]), np.zeros(2))
print(sorted(enumerate_regions(dup).as_set()))


# Generic combiners reach the maximal count. Zero thresholds lose a bit.

# In[3]:

print(" d  n_q  exact  bound  exact_t0  bound_t0  sampled")
for d in (1, 2, 3):
    for n_q in (2, 4, 6):
        arr = general_position_arrangement(n_q, d, rng=n_q)
        arr0 = general_position_arrangement(n_q, d, zero_threshold=True, rng=n_q)
        seen = sample_region_count(arr, 50_000, 1.1 * math.sqrt(d), rng=0)
        print(f"{d:2d} {n_q:4d} {len(enumerate_regions(arr)):6d} {max_regions(n_q, d):6d}"
              f" {len(enumerate_regions(arr0)):9d} {max_regions_zero_threshold(n_q, d):9d}"
              f" {seen:8d}")


# The sampled column undercounts once d and n_q grow: some bounded cells are
# far smaller than the ball the samples come from.

# In[4]:

arr = general_position_arrangement(8, 3, rng=0)
for n in (10**4, 10**5, 10**6):
    print(n, sample_region_count(arr, n, 1.1 * math.sqrt(3), rng=1), "of", max_regions(8, 3))
