"""Numerical evaluation of inner/outer sum-rate bounds for two-receiver
discrete memoryless broadcast channels, with the supporting perturbation
calculus and constructive cardinality reductions."""

from .info_core import (
    JointDistribution,
    SixTuple,
    six_tuple,
    entropy,
    mutual_information,
    conditional_mutual_information,
    push_through_channel,
    marginalize,
    condition,
)
from .channels import (
    BroadcastChannel,
    binary_example,
    product_channel,
    random_channel,
    validate,
)
from .perturbation import (
    PerturbationDirection,
    StationarityReport,
    center_direction,
    epsilon_range,
    perturb,
    h_L,
    i_L,
    r_function,
    fisher_information,
    entropy_decomposition_check,
    stationarity_check,
)
from .reduction import ReductionOutcome, reduce_w, reduce_u_support, reduce_v_support, extremize_x
from .bounds import (
    OptimizationConfig,
    OptimizationResult,
    HyperplaneWeights,
    t_function,
    term_a,
    term_b,
    marton_sum_rate,
    ne_outer_sum_rate,
    hyperplane_max,
    region_sample,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
