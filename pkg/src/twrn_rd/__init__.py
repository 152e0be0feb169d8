"""Rate-distortion tools for the downlink of the two-way relay network."""
__version__ = "0.1.0"

from .errors import (BadInputFile, BudgetExceeded, DomainError, InfeasibleDistortion, NoConvergence,
                     NotDifferenceMeasure, NotHamming, NotNormalized, NegativeProbability,
                     NonNormalDistortion, ShapeMismatch, TwrnError, UnknownCommand, ValidationError)
from .prob import (Channel, JointSource, SolverConfig, binary_convolution, binary_entropy,
                   conditional_entropy_xy, conditional_mutual_information, entropy, expected_distortion,
                   hamming, info_terms, mutual_information, random_pmf, validate_joint_source, validate_pmf)
from .rd import RdResult, conditional_rd, joint_rd, marginal_rd, rd_curve
from .auxiliary import (additive_capacity, additive_channel, check_difference_measure, minimax_capacity,
                        wyner_ziv_rd)
from .cr import CrResult, cr_rd, cr_rd_joint_upper, cr_rd_max_distortion, cr_sweep, cr_weighted
from .bounds import (BoundBundle, appendix_lower_candidate, bound_bundle, compress_linear_upper,
                     cut_set_lower, heegard_berger_upper, minimax_gap, one_description_upper)
from .closed_forms import (GaussianSpec, dsbs_cascade_channel, dsbs_cr_upper, dsbs_d_star,
                           dsbs_four_input_channel, dsbs_rd, dsbs_source, dsbs_wyner_common_information,
                           figure_curves, gaussian_conditional_rd, gaussian_region)
from .jscc import (BroadcastChannelSpec, FeasibilityVerdict, binary_symmetric_broadcast, channel_mi_frontier,
                   jscc_cr_achievable, jscc_cut_set_feasible, nayak_sufficient_check,
                   tuncel_zero_distortion_feasible)
from .oracle import GridSpec, OracleResult, enumerate_decoders, grid_min_channel
