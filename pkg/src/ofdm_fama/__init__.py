"""Link-level simulator and rate analysis for fluid-antenna multiple access
over OFDM downlinks.

Multi-port receive antennas pick the ports where interference is naturally
weak, so several single-stream users can share the band without transmit-side
channel knowledge.  The package covers the spatially correlated channel
models, the subframe transmit/receive chain with IRC equalization, the port
training strategies, semi-analytic rate metrics, and a deterministic
experiment harness with reproduction recipes.
"""

from ._version import __version__
from .channel import (ChannelRealization, TapProfile, gen_block_fading,
                      gen_tdl, load_tap_profile, to_frequency)
from .coding import CODECS, decode, encode
from .config import load_config, validate_config
from .geometry import (FasGeometry, SpatialModel, build_covariance,
                       eigendecompose, sample_correlated_batch)
from .harness import (RunResult, SimConfig, SubframeRecord, run_link,
                      run_training_trace, save_run, sweep_multiplexing_gain,
                      wilson_interval)
from .mcs import McsEntry, load_mcs_table, mcs_entry
from .modulation import ModulationScheme, map_qam, scheme_for_qm, soft_demap
from .phy_rx import (IrcState, RxBranchData, equalize_subframe,
                     estimate_channel, estimate_interference_cov, irc_weights,
                     ofdm_demodulate, per_port_sinr)
from .phy_tx import (Numerology, ResourceGrid, default_numerology,
                     extract_data, ofdm_modulate, transmit_subframe)
from .port_control import (PortMap, SinrTable, interleave_ports,
                           select_running, step_stage, strategy_a_schedule,
                           strategy_b_schedule, training_length)
from .rates import (NStarResult, RateSample, ami, approximate_n_star,
                    cutoff_rate, draw_rate_samples, evaluate_criterion,
                    outage_rate, target_sinr)
from .recipes import RECIPES, ReproRecipe, list_recipes, run_recipe

__all__ = [
    "__version__",
    "ChannelRealization", "TapProfile", "gen_block_fading", "gen_tdl",
    "load_tap_profile", "to_frequency",
    "CODECS", "decode", "encode",
    "load_config", "validate_config",
    "FasGeometry", "SpatialModel", "build_covariance", "eigendecompose",
    "sample_correlated_batch",
    "RunResult", "SimConfig", "SubframeRecord", "run_link",
    "run_training_trace", "save_run", "sweep_multiplexing_gain",
    "wilson_interval",
    "McsEntry", "load_mcs_table", "mcs_entry",
    "ModulationScheme", "map_qam", "scheme_for_qm", "soft_demap",
    "IrcState", "RxBranchData", "equalize_subframe", "estimate_channel",
    "estimate_interference_cov", "irc_weights", "ofdm_demodulate",
    "per_port_sinr",
    "Numerology", "ResourceGrid", "default_numerology", "extract_data",
    "ofdm_modulate", "transmit_subframe",
    "PortMap", "SinrTable", "interleave_ports", "select_running",
    "step_stage", "strategy_a_schedule", "strategy_b_schedule",
    "training_length",
    "NStarResult", "RateSample", "ami", "approximate_n_star", "cutoff_rate",
    "draw_rate_samples", "evaluate_criterion", "outage_rate", "target_sinr",
    "RECIPES", "ReproRecipe", "list_recipes", "run_recipe",
]
