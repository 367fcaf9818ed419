"""Two-phase identification pipelines for single and coupled chains.

Phase 1 fits the friction coefficients from externally driven motion recorded
with the motor input held at zero; phase 2 then fits the PWM gain and offset
with the phase-1 friction model subtracted from the torque. Coupled chains
are reduced to independent single-shaft problems by blocking all sibling
motors and projecting the joint torques onto the active motor's column of the
coupling matrix.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .coupling import CouplingMatrix, motor_velocity_from_joints
from .errors import BlockedMotorError, DataError, DataWarning, DomainError
from .model import (
    CoupledDataset,
    Dataset,
    FrictionParams,
    InertiaParams,
    MotorParams,
    friction_torque,
)
from .regression import (
    COND_WARN_DEFAULT,
    build_cv_design,
    build_pwm_design,
    build_stribeck_design,
    derive_acceleration,
    solve_constrained_lsq,
    solve_lsq,
    zero_slope_constraint,
    FitResult,
)

__all__ = [
    "MODEL_KINDS",
    "ChainConfig",
    "FrictionFit",
    "MotorFit",
    "IdentificationReport",
    "identify_friction",
    "identify_motor",
    "identify_pipeline",
    "identify_coupled_motor",
    "reduce_to_motor",
]

MODEL_KINDS = ("coulomb-viscous", "stribeck", "stribeck-constrained")


@dataclass(frozen=True)
class ChainConfig:
    """Given quantities and model choices for one actuation chain."""

    inertia: InertiaParams = InertiaParams(0.0)
    rho: float = 1.0
    omega_s: float = 1.0  # deg/s
    omega_dead: float | None = None  # deg/s; default 1e-3 * omega_s
    model_kind: str = "stribeck"
    constraint_side: str = "right"  # stribeck-constrained only
    cond_warn: float = COND_WARN_DEFAULT

    def __post_init__(self) -> None:
        if self.rho <= 0:
            raise DomainError(f"rho must be > 0, got {self.rho}")
        if self.omega_s <= 0:
            raise DomainError(f"omega_s must be > 0, got {self.omega_s}")
        if self.omega_dead is not None and self.omega_dead < 0:
            raise DomainError(f"omega_dead must be >= 0, got {self.omega_dead}")
        if self.model_kind not in MODEL_KINDS:
            raise DomainError(
                f"model_kind must be one of {MODEL_KINDS}, got {self.model_kind!r}"
            )
        if self.constraint_side not in ("right", "left", "both"):
            raise DomainError(f"unknown constraint side {self.constraint_side!r}")

    @property
    def effective_omega_dead(self) -> float:
        return 1e-3 * self.omega_s if self.omega_dead is None else self.omega_dead


@dataclass(frozen=True)
class FrictionFit:
    params: FrictionParams
    fit: FitResult
    physical: bool  # sigma_plus >= k_c and sigma_minus >= k_c


@dataclass(frozen=True)
class MotorFit:
    params: MotorParams
    fit: FitResult


@dataclass(frozen=True)
class IdentificationReport:
    """Per-chain identification output with diagnostics for every phase run."""

    friction: FrictionFit
    motor: MotorFit | None = None
    fitted_curve: np.ndarray | None = None  # (n, 2) columns (omega, tau_friction)
    blocked_rejected: int = 0


def _fitted_curve(params: FrictionParams, omega_lo: float, omega_hi: float) -> np.ndarray:
    # even point count keeps the sampled grid off the undefined omega == 0
    grid = np.linspace(omega_lo, omega_hi, 200)
    return np.column_stack([grid, friction_torque(params, grid)])


def identify_friction(data: Dataset, config: ChainConfig) -> FrictionFit:
    """Phase 1: fit the friction coefficients from a zero-PWM recording.

    Any sample with a nonzero motor input invalidates the phase-1 model and
    rejects the dataset outright.
    """
    if np.any(data.pwm != 0.0):
        bad = int(np.flatnonzero(data.pwm != 0.0)[0])
        raise DataError(
            f"phase-1 data must be recorded with pwm = 0; row {bad} has pwm = "
            f"{data.pwm[bad]!r}"
        )
    dead = config.effective_omega_dead
    if config.model_kind == "coulomb-viscous":
        system = build_cv_design(data, config.inertia, omega_dead=dead)
        fit = solve_lsq(system, cond_warn=config.cond_warn)
        k_c, k_v = (float(v) for v in fit.theta)
        params = FrictionParams(
            k_c=k_c, k_v=k_v, sigma_plus=k_c, sigma_minus=k_c, omega_s=config.omega_s
        )
    else:
        system = build_stribeck_design(
            data, config.inertia, config.omega_s, omega_dead=dead
        )
        if config.model_kind == "stribeck-constrained":
            a, b = zero_slope_constraint(config.omega_s, side=config.constraint_side)
            fit = solve_constrained_lsq(system, a, b, cond_warn=config.cond_warn)
        else:
            fit = solve_lsq(system, cond_warn=config.cond_warn)
        k_c, k_v, sigma_plus, sigma_minus = (float(v) for v in fit.theta)
        params = FrictionParams(
            k_c=k_c,
            k_v=k_v,
            sigma_plus=sigma_plus,
            sigma_minus=sigma_minus,
            omega_s=config.omega_s,
        )
    return FrictionFit(params=params, fit=fit, physical=params.is_physical)


def identify_motor(
    data: Dataset, friction: FrictionParams, config: ChainConfig
) -> MotorFit:
    """Phase 2: fit the PWM gain and offset using the phase-1 friction model."""
    system = build_pwm_design(
        data, friction, config.inertia, omega_dead=config.effective_omega_dead
    )
    fit = solve_lsq(system, cond_warn=config.cond_warn)
    params = MotorParams(
        k_pwm_star=fit["k_pwm_star"], tau_0=fit["tau_0"], rho=config.rho
    )
    return MotorFit(params=params, fit=fit)


def identify_pipeline(
    phase1: Dataset,
    config: ChainConfig,
    phase2: Dataset | None = None,
) -> IdentificationReport:
    """Run both identification phases on one chain and assemble the report."""
    friction = identify_friction(phase1, config)
    motor = None
    if phase2 is not None:
        motor = identify_motor(phase2, friction.params, config)
    curve = _fitted_curve(
        friction.params, float(np.min(phase1.omega)), float(np.max(phase1.omega))
    )
    return IdentificationReport(friction=friction, motor=motor, fitted_curve=curve)


def _violation_spans(t: np.ndarray, violated: np.ndarray) -> list[tuple[float, float]]:
    idx = np.flatnonzero(violated)
    if idx.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate([[0], breaks + 1])
    ends = np.concatenate([breaks, [idx.size - 1]])
    return [(float(t[idx[s]]), float(t[idx[e]])) for s, e in zip(starts, ends)]


def reduce_to_motor(
    data: CoupledDataset,
    coupling: CouplingMatrix,
    motor_index: int,
    *,
    omega_block: float = 0.1,
    max_reject_fraction: float = 0.05,
) -> tuple[Dataset, int]:
    """Collapse an n-joint recording onto one motor's transmission chain.

    Sibling motor velocities must stay inside ``omega_block``; violating
    samples are dropped, and the whole dataset is rejected when more than
    ``max_reject_fraction`` of it violates.
    """
    k = int(motor_index)
    if not 0 <= k < coupling.n:
        raise DataError(f"motor index {k} out of range for {coupling.n} motors")
    if data.n != coupling.n:
        raise DataError(
            f"dataset has {data.n} channels but coupling matrix is {coupling.n}x{coupling.n}"
        )

    # motor-encoder channel wins when present; otherwise reconstruct from joints
    omega_m = data.omega_m
    if omega_m is None:
        omega_m = motor_velocity_from_joints(coupling, data.omega_j)

    siblings = np.delete(np.arange(coupling.n), k)
    violated = np.max(np.abs(omega_m[:, siblings]), axis=1) > omega_block
    fraction = float(np.mean(violated))
    if fraction > max_reject_fraction:
        spans = _violation_spans(data.t, violated)
        shown = ", ".join(f"[{a:.3f}, {b:.3f}] s" for a, b in spans[:5])
        more = "" if len(spans) <= 5 else f" (+{len(spans) - 5} more)"
        raise BlockedMotorError(
            f"sibling motors moved in {fraction:.1%} of samples "
            f"(limit {max_reject_fraction:.1%}); offending spans: {shown}{more}"
        )
    rejected = int(np.count_nonzero(violated))
    if rejected:
        warnings.warn(
            f"dropping {rejected} samples where blocked motors moved",
            DataWarning,
            stacklevel=3,
        )

    omega = omega_m[:, k]
    if data.omega_dot_j is not None:
        omega_dot = motor_velocity_from_joints(coupling, data.omega_dot_j)[:, k]
    else:
        omega_dot = derive_acceleration(data.t, omega)
    tau = data.tau_j @ coupling.t[:, k]

    keep = ~violated
    reduced = Dataset(
        t=data.t[keep],
        pwm=data.pwm[keep, k],
        omega=omega[keep],
        omega_dot=omega_dot[keep],
        tau=tau[keep],
        shaft=f"motor-{k}",
        sample_rate=data.sample_rate,
        derived_acceleration=data.omega_dot_j is None,
        dropped_rows=data.dropped_rows,
    )
    return reduced, rejected


def identify_coupled_motor(
    data: CoupledDataset,
    coupling: CouplingMatrix,
    motor_index: int,
    config: ChainConfig,
    phase2: CoupledDataset | None = None,
    *,
    omega_block: float = 0.1,
    max_reject_fraction: float = 0.05,
) -> IdentificationReport:
    """Identify one motor of a coupled set from blocked-sibling recordings.

    ``data`` holds the zero-PWM friction experiment; ``phase2`` optionally
    holds the PWM excitation experiment for the same motor. Both are reduced
    to single-shaft datasets (velocity from the motor encoders when recorded,
    else reconstructed through the coupling inverse; torque projected on the
    motor's coupling column) before running the ordinary two-phase pipeline.
    """
    reduced1, rejected = reduce_to_motor(
        data,
        coupling,
        motor_index,
        omega_block=omega_block,
        max_reject_fraction=max_reject_fraction,
    )
    reduced2 = None
    if phase2 is not None:
        reduced2, rejected2 = reduce_to_motor(
            phase2,
            coupling,
            motor_index,
            omega_block=omega_block,
            max_reject_fraction=max_reject_fraction,
        )
        rejected += rejected2
    report = identify_pipeline(reduced1, config, reduced2)
    return replace(report, blocked_rejected=rejected)
