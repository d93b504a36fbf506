"""Chirp-permuted AFDM: keyed DAFT modulation, delay-Doppler channels and a secrecy simulator."""

__version__ = "0.1.0"

from .channel import (ChannelBatch, ChannelScenarioConfig, DelayDopplerChannel, PathParams,  # noqa: E402
                      build_channel, channel_matrix, sample_channel)
from .link import (Constellation, direct_effective_channel, effective_channel, map_bits,  # noqa: E402
                   demap_symbols, ml_detect, mmse_equalize, modulate, demodulate, receive)
from .security import (derangement_count, guess_cdf_wrong, guess_distribution, guess_pmf,  # noqa: E402
                       quantum_cost)
from .sim import BerConfig, BerReport, EveStrategy, run_ber, run_fixed_point_sweep  # noqa: E402
from .transforms import (ChirpProfile, PermutationKey, daft, daft_apply, idaft_apply,  # noqa: E402
                         perm_to_rank, rank_to_perm)

__all__ = [
    "BerConfig", "BerReport", "ChannelBatch", "ChannelScenarioConfig", "ChirpProfile", "Constellation",
    "DelayDopplerChannel", "EveStrategy", "PathParams", "PermutationKey", "build_channel", "channel_matrix",
    "daft", "daft_apply", "demap_symbols", "demodulate", "derangement_count", "direct_effective_channel",
    "effective_channel", "guess_cdf_wrong", "guess_distribution", "guess_pmf", "idaft_apply", "map_bits",
    "ml_detect", "mmse_equalize", "modulate", "perm_to_rank", "quantum_cost", "rank_to_perm", "receive",
    "run_ber", "run_fixed_point_sweep", "sample_channel",
]
