"""Source localization from OFDM pilot+data frames on a distributed array.

The package simulates a single-antenna transmitter observed by distributed,
non-phase-synchronized receiver nodes and localizes it from frequency-domain
pilot and data observations. Estimators range from pilot-only correlation
through decision-directed variants to marginal-likelihood objectives that
integrate the unknown data symbols and channel coefficients out.
"""

__version__ = "0.1.0"

from .channel import (ChannelRealization, Observations, observe, steering_matrix,
                      steering_phases, synthesize_channel)
from .equalize import (DataEstimates, EqualizedObs, dd_equalize, estimate_channel_lmmse,
                       genie_equalize, hard_decision, mean_abs_error, pilot_equalize,
                       soft_data_estimate, symbol_error_rate)
from .estimators import (ObjectiveContext, marginal_channel_likelihood,
                         objective_equalized, objective_mml_approx, objective_mml_fast,
                         objective_mml_optimal, objective_pilot, pilot_channel_coeff)
from .experiment import (ESTIMATOR_NAMES, AmbiguityCut, ComplexityRow, SweepResult,
                         SweepRow, TransmissionTally, TrialResult, account_complexity,
                         account_transmission, ambiguity_function, main_lobe_width,
                         run_sweep, run_trial)
from .model import (C_LIGHT, ConfigError, Constellation, ConstellationMap, ResourceGrid,
                    Scene, SystemConfig, build_resource_grid, build_scene,
                    config_from_dict, config_to_dict, load_config,
                    make_bpsk_constellation, make_qam_constellation)
from .ops import OpCounter
from .oracles import gauss_hermite_marginal_loglik, run_identity_suite, run_quadrature_suite
from .search import SearchGrid, grid_search, make_grid, nelder_mead_refine

__all__ = [name for name in dir() if not name.startswith("_")]
