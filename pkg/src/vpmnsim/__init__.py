"""Device-to-device network simulator: correlated shadowing channels,
threshold connectivity, max-flow and LP uplink routing, Monte Carlo metrics."""

from ._version import __version__
from .channel import (
    ChannelParams,
    ChannelRealization,
    DegenerateGeometryError,
    correlation_matrix,
    gain_linear,
    path_loss_db,
    realize_channel,
)
from .connectivity import AdjacencyGraph, adjacency, all_connected, component_labels, component_of
from .experiments import (
    ExperimentConfig,
    MetricsReport,
    RateTrialResult,
    estimate_p_conn,
    line_scenario_experiment,
    localization_experiment_single_gateway,
    rate_experiment,
    rate_trials,
    trial_rng,
    worker_count,
)
from .flow import FlowNetwork, FlowSolution, build_uplink_network, max_flow, max_flow_from, min_cut_value
from .linalg import CholeskyResult, NotPositiveDefiniteError, NotSymmetricError, cholesky, correlated_gaussian
from .privacy import (
    EmptyRatioBinError,
    HoldoutResult,
    JointHistogram,
    LocalizationSample,
    UndefinedMetricError,
    average_localization_error,
    build_joint_histogram,
    conditional_mean_estimate,
    estimate_position,
    flow_ratio,
    holdout_localization_error,
    ratio_fraction,
    single_gateway_error,
)
from .routing import (
    Algorithm,
    RateMatrix,
    RoutingMode,
    RoutingResult,
    multi_source_flow_lp,
    ppmf,
    ppmf_lp,
    rate_matrix,
    rates_from_gains,
    total_rate,
    umf,
    umf_all,
)
from .scenario import (
    Point2D,
    Scenario,
    ScenarioKind,
    distance_matrix,
    place_line,
    place_uniform_square,
)
from .simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, LpProblem, LpSolution, solve

__all__ = [
    "__version__",
    "AdjacencyGraph",
    "Algorithm",
    "ChannelParams",
    "ChannelRealization",
    "CholeskyResult",
    "DegenerateGeometryError",
    "EmptyRatioBinError",
    "ExperimentConfig",
    "FlowNetwork",
    "FlowSolution",
    "HoldoutResult",
    "INFEASIBLE",
    "JointHistogram",
    "LocalizationSample",
    "LpProblem",
    "LpSolution",
    "MetricsReport",
    "NotPositiveDefiniteError",
    "NotSymmetricError",
    "OPTIMAL",
    "Point2D",
    "RateMatrix",
    "RateTrialResult",
    "RoutingMode",
    "RoutingResult",
    "Scenario",
    "ScenarioKind",
    "UNBOUNDED",
    "UndefinedMetricError",
    "adjacency",
    "all_connected",
    "average_localization_error",
    "build_joint_histogram",
    "build_uplink_network",
    "cholesky",
    "component_labels",
    "component_of",
    "conditional_mean_estimate",
    "correlated_gaussian",
    "correlation_matrix",
    "distance_matrix",
    "estimate_p_conn",
    "estimate_position",
    "flow_ratio",
    "gain_linear",
    "holdout_localization_error",
    "line_scenario_experiment",
    "localization_experiment_single_gateway",
    "max_flow",
    "max_flow_from",
    "min_cut_value",
    "multi_source_flow_lp",
    "path_loss_db",
    "place_line",
    "place_uniform_square",
    "ppmf",
    "ppmf_lp",
    "rate_experiment",
    "rate_matrix",
    "rate_trials",
    "rates_from_gains",
    "ratio_fraction",
    "realize_channel",
    "single_gateway_error",
    "solve",
    "total_rate",
    "trial_rng",
    "umf",
    "umf_all",
    "worker_count",
]
