"""Achievable rates of MIMO receivers with one-bit ADCs and delay-line
blockwise analog combining."""

__version__ = "0.1.0"

from .arrangement import (Arrangement, RegionSet, channel_arrangement, enumerate_regions,
                          general_position_arrangement, max_regions,
                          max_regions_zero_threshold, sample_region_count, sign_vector)
from .asymptotics import (RateBounds, binary_entropy, fig4_curves, high_snr_rate,
                          high_snr_rate_exact, log_binomial_exact, log_binomial_expansion,
                          log_binomial_sum_exact, log_binomial_sum_expansion, theorem1_bounds)
from .channel import ChannelModel, apply_channel, image_basis, sample_noise, snr_db_to_power
from .codec import (CapacityResult, Constellation, InducedChannel, blahut_arimoto,
                    blahut_arimoto_cost, build_constellation, capacity_at_power,
                    high_snr_capacity_check, induced_channel, min_norm_input)
from .errors import (ConstructionFailure, DegenerateChannel, DomainError, InfeasibleBudget,
                     InfeasibleTarget, InvalidArgument, ResourceLimit)
from .receiver_sim import (DelayNetwork, Receiver, SimReport, quantize_block, simulate_link,
                           step_delay_network)
