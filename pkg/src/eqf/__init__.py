"""Symmetry-based state estimation on homogeneous spaces.

The package splits into a small generic core and one worked example:

- groups: similarity transformations of R^3 (rotation, scale, translation)
  with exp/log, adjoint, and supporting SO(3) helpers.
- filter: predict / update / reset machinery for concentrated Gaussian
  beliefs whose reference point lives on the symmetry group; the reset
  parallel-transports the covariance to the moved reference.
- kinematics: the bearing/range target-tracking example (second-order
  kinematics) and the model structure the generic filter consumes.
- baselines: classical EKF variants and the covariance-transport ablation.
- sim / export / cli: seeded Monte-Carlo harness with deterministic CSV and
  SVG output, also reachable as the `eqf` command.
- check: runtime self-diagnostics (`eqf check`).
"""

from .baselines import (
    EkfBelief,
    ekf_predict,
    ekf_update_bearing_range,
    ekf_update_position,
)
from .filter import (
    ChartDomainError,
    ConcentratedGaussian,
    EquivariantFilter,
    SystemModel,
    equivariant_error,
    filter_energy,
    predict,
    reset,
    update,
    verify_linearization,
)
from .groups import DomainError, Sim3
from .kinematics import KinematicInput, KinematicState, make_model, state_action
from .sim import ConfigError, SimConfig, monte_carlo, run_experiment

__version__ = "0.1.0"

__all__ = [
    "ChartDomainError",
    "ConcentratedGaussian",
    "ConfigError",
    "DomainError",
    "EkfBelief",
    "EquivariantFilter",
    "KinematicInput",
    "KinematicState",
    "Sim3",
    "SimConfig",
    "SystemModel",
    "ekf_predict",
    "ekf_update_bearing_range",
    "ekf_update_position",
    "equivariant_error",
    "filter_energy",
    "make_model",
    "monte_carlo",
    "predict",
    "reset",
    "run_experiment",
    "state_action",
    "update",
    "verify_linearization",
]
