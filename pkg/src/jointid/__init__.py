"""Motor and friction parameter identification for electric joint actuators.

A two-phase linear least-squares toolkit: phase 1 fits static friction
(Coulomb/viscous, optionally with exponential breakaway) from zero-PWM
recordings, phase 2 fits the PWM-to-torque gain and offset with the friction
model subtracted. Coupled joints driven through an invertible coupling matrix
are identified motor by motor via torque projection onto the motor's
transmission column. A deterministic forward simulator provides ground-truth
data for validation.
"""

__version__ = "0.1.0"

from .coupling import (
    CouplingMatrix,
    motor_to_joint_torque,
    motor_to_joint_velocity,
    motor_velocity_from_joints,
    project_joint_torque_to_motor,
)
from .errors import (
    BlockedMotorError,
    ConfigError,
    ConstraintError,
    DataError,
    DesignError,
    DomainError,
    EmptyDesignError,
    JointIdError,
    RankDeficientError,
    SimulationError,
    SingularMatrixError,
)
from .identify import (
    ChainConfig,
    FrictionFit,
    IdentificationReport,
    MotorFit,
    identify_coupled_motor,
    identify_friction,
    identify_motor,
    identify_pipeline,
    reduce_to_motor,
)
from .model import (
    CoupledDataset,
    Dataset,
    FrictionParams,
    InertiaParams,
    MotorParams,
    Sample,
    friction_torque,
    joint_torque_forward,
    motor_pwm_torque,
    reflect_inertia,
    reflect_torque,
    reflect_velocity,
)
from .regression import (
    DesignSystem,
    FitResult,
    build_cv_design,
    build_pwm_design,
    build_stribeck_design,
    condition_number,
    derive_acceleration,
    solve_constrained_lsq,
    solve_lsq,
    stribeck_regressors,
    zero_slope_constraint,
)
from .simulate import (
    ActuatorChain,
    ExcitationProfile,
    NoiseSpec,
    gen_coupled,
    gen_phase1,
    gen_phase2,
)

__all__ = [
    "__version__",
    # model
    "FrictionParams",
    "MotorParams",
    "InertiaParams",
    "Sample",
    "Dataset",
    "CoupledDataset",
    "friction_torque",
    "motor_pwm_torque",
    "joint_torque_forward",
    "reflect_inertia",
    "reflect_velocity",
    "reflect_torque",
    # coupling
    "CouplingMatrix",
    "motor_to_joint_velocity",
    "motor_to_joint_torque",
    "project_joint_torque_to_motor",
    "motor_velocity_from_joints",
    # regression
    "DesignSystem",
    "FitResult",
    "build_cv_design",
    "build_stribeck_design",
    "build_pwm_design",
    "stribeck_regressors",
    "solve_lsq",
    "solve_constrained_lsq",
    "condition_number",
    "zero_slope_constraint",
    "derive_acceleration",
    # identify
    "ChainConfig",
    "FrictionFit",
    "MotorFit",
    "IdentificationReport",
    "identify_friction",
    "identify_motor",
    "identify_pipeline",
    "identify_coupled_motor",
    "reduce_to_motor",
    # simulate
    "ExcitationProfile",
    "NoiseSpec",
    "ActuatorChain",
    "gen_phase1",
    "gen_phase2",
    "gen_coupled",
    # errors
    "JointIdError",
    "DomainError",
    "DataError",
    "DesignError",
    "EmptyDesignError",
    "RankDeficientError",
    "ConstraintError",
    "SingularMatrixError",
    "BlockedMotorError",
    "SimulationError",
    "ConfigError",
]
