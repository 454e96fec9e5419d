"""Sliding-mode control with RBF compensation for underactuated systems."""
from .cartpole import NOMINAL, CartPoleParams, DeadZone, apply_dead_zone, cartpole_model
from .dynamics import GeneralizedState, PartitionedModel, accelerations, reduced_blocks
from .errors import (ConfigError, ControllerSingularityError, InsufficientDataError,
                     IntegrationDivergedError, ShapeError, SimulationAborted,
                     SingularInertiaError, TrainingDataError, UnderactError)
from .rbf import RbfNetwork, TrainingSet, collect_training_pair, rbf_eval, rbf_train
from .sim import SimConfig, SimTrace, metrics, run
from .smc import (ControllerConfig, Mode, Reference, SurfaceParams, boundary_distance,
                  cartpole_control_law, control_generic, saturation, sliding_variable)

__version__ = "0.1.0"

__all__ = [
    "NOMINAL", "CartPoleParams", "DeadZone", "apply_dead_zone", "cartpole_model",
    "GeneralizedState", "PartitionedModel", "accelerations", "reduced_blocks",
    "ConfigError", "ControllerSingularityError", "InsufficientDataError",
    "IntegrationDivergedError", "ShapeError", "SimulationAborted", "SingularInertiaError",
    "TrainingDataError", "UnderactError",
    "RbfNetwork", "TrainingSet", "collect_training_pair", "rbf_eval", "rbf_train",
    "SimConfig", "SimTrace", "metrics", "run",
    "ControllerConfig", "Mode", "Reference", "SurfaceParams", "boundary_distance",
    "cartpole_control_law", "control_generic", "saturation", "sliding_variable",
]
