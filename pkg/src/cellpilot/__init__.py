"""Multi-cell pilot assignment with a learned swap policy.

The package models a hexagonal cluster of massive-MIMO cells whose users
share a small pilot set. Pilot reuse across cells contaminates channel
estimates; an angular-overlap cost model scores each assignment, and a
deep Q-network learns to swap pilots so the worst user's contamination
stays low. Baselines (random, exhaustive, reuse-splitting) and a
Monte-Carlo uplink rate benchmark make the learned policy comparable.
"""

from .config import (
    PACKAGE_VERSION,
    BudgetError,
    ConfigError,
    EnvOptions,
    NumericError,
    RateOptions,
    SystemConfig,
    TrainingSchedule,
    load_config_file,
    load_config_overrides,
    substream,
)
from .scenario import (
    AoAInterval,
    CellLayout,
    ScenarioBundle,
    UserDrop,
    aoa_interval,
    build_layout,
    drop_users,
    fresh_world,
    hexagon_vertices,
    in_hexagon,
    large_scale,
)
from .channel import covariance, realize_channel, steering
from .contamination import (
    CostTable,
    NullBounds,
    NullBoundsError,
    approx_gain,
    cosine_support,
    dirichlet_magnitude,
    extended_user_costs,
    first_null_bounds,
    interference_integral,
    kernel_zeros,
    pair_cost,
    pairwise_cost_matrix,
    response_overlap,
    total_costs,
)
from .assignment import (
    ExtendedAssignment,
    OverheadReport,
    PilotAssignment,
    SwapAction,
    apply_swap,
    assignment_cost,
    exhaustive_search,
    random_assignment,
    spr_like_assignment,
)
from .env import (
    EnvState,
    PilotEnv,
    RewardThresholds,
    StepOutcome,
    calibrate_thresholds,
    encode_state,
    encoded_size,
    make_env,
    reward_components,
)
from .qnn import (
    NetworkParams,
    ReplayBuffer,
    RmsPropState,
    TrainResult,
    act,
    backward,
    epsilon,
    forward,
    init_params,
    load_checkpoint,
    rmsprop_step,
    save_checkpoint,
    sync_target,
    td_targets,
    train,
)
from .rate import RateReport, min_rate, moving_average
from .harness import (
    ExperimentPreset,
    emit_plot_data,
    presets,
    run_experiment,
)

__version__ = PACKAGE_VERSION

__all__ = [
    "PACKAGE_VERSION",
    "__version__",
    "BudgetError",
    "ConfigError",
    "NumericError",
    "SystemConfig",
    "TrainingSchedule",
    "EnvOptions",
    "RateOptions",
    "load_config_file",
    "load_config_overrides",
    "substream",
    "CellLayout",
    "UserDrop",
    "AoAInterval",
    "ScenarioBundle",
    "build_layout",
    "hexagon_vertices",
    "in_hexagon",
    "drop_users",
    "large_scale",
    "aoa_interval",
    "fresh_world",
    "steering",
    "covariance",
    "realize_channel",
    "NullBoundsError",
    "NullBounds",
    "CostTable",
    "dirichlet_magnitude",
    "response_overlap",
    "interference_integral",
    "cosine_support",
    "kernel_zeros",
    "first_null_bounds",
    "approx_gain",
    "pair_cost",
    "pairwise_cost_matrix",
    "total_costs",
    "extended_user_costs",
    "PilotAssignment",
    "SwapAction",
    "ExtendedAssignment",
    "OverheadReport",
    "random_assignment",
    "apply_swap",
    "exhaustive_search",
    "spr_like_assignment",
    "assignment_cost",
    "RewardThresholds",
    "EnvState",
    "StepOutcome",
    "PilotEnv",
    "calibrate_thresholds",
    "encode_state",
    "encoded_size",
    "reward_components",
    "make_env",
    "NetworkParams",
    "ReplayBuffer",
    "RmsPropState",
    "TrainResult",
    "init_params",
    "forward",
    "backward",
    "td_targets",
    "sync_target",
    "rmsprop_step",
    "epsilon",
    "act",
    "train",
    "save_checkpoint",
    "load_checkpoint",
    "RateReport",
    "min_rate",
    "moving_average",
    "ExperimentPreset",
    "presets",
    "run_experiment",
    "emit_plot_data",
]
