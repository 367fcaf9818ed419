"""Single-chain actuation model: friction, motor torque, gearbox reflection.

The forward model of one actuation chain (motor, reduction drive, output
shaft) expressed at the reduction-drive output point is

    tau_joint = k_pwm_star * pwm + tau_0 - i_reflected * omega_dot + tau_f(omega)

where ``tau_f`` is a static friction model combining Coulomb, viscous and
exponential-breakaway components. Friction always opposes motion and is left
undefined at rest (returned as zero): in the stick phase the transmitted
torque is a reaction to the applied load, not a function of velocity.

Units: torques in N*m, angular velocities in deg/s, accelerations in deg/s^2,
motor input in PWM duty-cycle units. Radian-based recordings must be converted
on ingestion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import DataError, DomainError

__all__ = [
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
]


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class FrictionParams:
    """Static friction model coefficients for one actuation chain.

    ``sigma_plus``/``sigma_minus`` are the breakaway magnitudes approached as
    the velocity tends to zero from above/below. ``omega_s`` sets how fast the
    breakaway excess decays with speed; it is a fixed model constant, never a
    fitted parameter, so the model stays linear in the coefficients.
    """

    k_c: float  # Coulomb magnitude, N*m
    k_v: float  # viscous coefficient, N*m*s/deg
    sigma_plus: float  # breakaway magnitude for omega -> 0+, N*m
    sigma_minus: float  # breakaway magnitude for omega -> 0-, N*m
    omega_s: float = 1.0  # breakaway decay velocity, deg/s

    def __post_init__(self) -> None:
        for name in ("k_c", "k_v", "sigma_plus", "sigma_minus", "omega_s"):
            _require_finite(name, getattr(self, name))
        if self.k_c < 0:
            raise DomainError(f"k_c must be >= 0, got {self.k_c}")
        if self.k_v < 0:
            raise DomainError(f"k_v must be >= 0, got {self.k_v}")
        if self.omega_s <= 0:
            raise DomainError(f"omega_s must be > 0, got {self.omega_s}")

    @property
    def is_physical(self) -> bool:
        """True when the breakaway magnitudes dominate the Coulomb level.

        Fits on poorly excited or non-Stribeck data may come out with
        ``sigma < k_c``; that is reported as a validity flag rather than
        rejected outright.
        """
        return self.sigma_plus >= self.k_c and self.sigma_minus >= self.k_c


@dataclass(frozen=True)
class MotorParams:
    """PWM-to-torque model of the combined motor and reduction drive."""

    k_pwm_star: float  # PWM duty cycle to shaft torque gain, N*m per PWM unit
    tau_0: float = 0.0  # torque offset from driver bias current, N*m
    rho: float = 1.0  # gearbox step-down ratio

    def __post_init__(self) -> None:
        _require_finite("k_pwm_star", self.k_pwm_star)
        _require_finite("tau_0", self.tau_0)
        _require_finite("rho", self.rho)
        if self.rho <= 0:
            raise DomainError(f"rho must be > 0, got {self.rho}")

    @classmethod
    def from_motor_side(cls, k_pwm: float, tau_0: float, rho: float) -> "MotorParams":
        """Build output-side parameters from a motor-side gain."""
        return cls(k_pwm_star=float(rho) * float(k_pwm), tau_0=tau_0, rho=rho)


@dataclass(frozen=True)
class InertiaParams:
    """Rotor plus gearbox inertia reflected at the reduction-drive output."""

    i_reflected: float  # N*m*s^2/deg

    def __post_init__(self) -> None:
        _require_finite("i_reflected", self.i_reflected)
        if self.i_reflected < 0:
            raise DomainError(f"i_reflected must be >= 0, got {self.i_reflected}")

    @classmethod
    def from_motor_side(cls, i_motor_side: float, rho: float) -> "InertiaParams":
        return cls(reflect_inertia(rho, i_motor_side))


@dataclass(frozen=True)
class Sample:
    """One timestamped measurement on a single shaft."""

    t: float  # s
    pwm: float  # PWM duty-cycle units
    omega: float  # deg/s
    omega_dot: float  # deg/s^2
    tau: float  # N*m


def _column(name: str, values, length: int | None = None) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise DataError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise DataError(f"{name} has {arr.shape[0]} rows, expected {length}")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise DataError(f"{name} contains a non-finite value at row {bad}")
    arr.setflags(write=False)
    return arr


def _check_time(t: np.ndarray) -> None:
    if t.shape[0] == 0:
        raise DataError("dataset is empty")
    steps = np.diff(t)
    if np.any(steps <= 0):
        bad = int(np.flatnonzero(steps <= 0)[0]) + 1
        raise DataError(f"time must be strictly increasing; row {bad} violates order")


@dataclass(frozen=True)
class Dataset:
    """Ordered single-shaft measurement log.

    Column-oriented for numerical work; ``samples()`` iterates row records.
    """

    t: np.ndarray
    pwm: np.ndarray
    omega: np.ndarray
    omega_dot: np.ndarray
    tau: np.ndarray
    shaft: str = ""
    sample_rate: float | None = None
    derived_acceleration: bool = False
    dropped_rows: int = 0

    def __post_init__(self) -> None:
        t = _column("t", self.t)
        _check_time(t)
        n = t.shape[0]
        object.__setattr__(self, "t", t)
        for name in ("pwm", "omega", "omega_dot", "tau"):
            object.__setattr__(self, name, _column(name, getattr(self, name), n))

    def __len__(self) -> int:
        return int(self.t.shape[0])

    def samples(self) -> Iterator[Sample]:
        for i in range(len(self)):
            yield Sample(
                t=float(self.t[i]),
                pwm=float(self.pwm[i]),
                omega=float(self.omega[i]),
                omega_dot=float(self.omega_dot[i]),
                tau=float(self.tau[i]),
            )

    @classmethod
    def from_samples(cls, samples, **metadata) -> "Dataset":
        rows = list(samples)
        if not rows:
            raise DataError("dataset is empty")
        return cls(
            t=[s.t for s in rows],
            pwm=[s.pwm for s in rows],
            omega=[s.omega for s in rows],
            omega_dot=[s.omega_dot for s in rows],
            tau=[s.tau for s in rows],
            **metadata,
        )


def _matrix(name: str, values, rows: int, cols: int | None = None) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2:
        raise DataError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if arr.shape[0] != rows:
        raise DataError(f"{name} has {arr.shape[0]} rows, expected {rows}")
    if cols is not None and arr.shape[1] != cols:
        raise DataError(f"{name} has {arr.shape[1]} channels, expected {cols}")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class CoupledDataset:
    """Joint-space measurement log for ``n`` coupled joints.

    ``omega_m`` optionally carries motor-shaft velocities from dedicated
    encoders (expressed at the reduction-drive output, the same space the
    coupling matrix acts on). ``omega_dot_j`` is optional because the on-disk
    format does not persist accelerations; they are rederived on load.
    """

    t: np.ndarray
    pwm: np.ndarray  # (n_samples, n_motors)
    omega_j: np.ndarray  # joint velocities, deg/s
    tau_j: np.ndarray  # joint torques, N*m
    omega_m: np.ndarray | None = None  # motor-shaft velocities, deg/s
    omega_dot_j: np.ndarray | None = None  # joint accelerations, deg/s^2
    sample_rate: float | None = None
    dropped_rows: int = 0

    def __post_init__(self) -> None:
        t = _column("t", self.t)
        _check_time(t)
        rows = t.shape[0]
        object.__setattr__(self, "t", t)
        pwm = _matrix("pwm", self.pwm, rows)
        object.__setattr__(self, "pwm", pwm)
        n = pwm.shape[1]
        object.__setattr__(self, "omega_j", _matrix("omega_j", self.omega_j, rows, n))
        object.__setattr__(self, "tau_j", _matrix("tau_j", self.tau_j, rows, n))
        if self.omega_m is not None:
            object.__setattr__(self, "omega_m", _matrix("omega_m", self.omega_m, rows, n))
        if self.omega_dot_j is not None:
            object.__setattr__(
                self, "omega_dot_j", _matrix("omega_dot_j", self.omega_dot_j, rows, n)
            )

    @property
    def n(self) -> int:
        return int(self.pwm.shape[1])

    def __len__(self) -> int:
        return int(self.t.shape[0])


def friction_torque(params: FrictionParams, omega):
    """Friction torque opposing motion at shaft velocity ``omega``.

    .. code-block:: text

        omega > 0:  -(k_c + (sigma_plus  - k_c) * exp(-omega/omega_s) + k_v*omega)
        omega < 0:  +(k_c + (sigma_minus - k_c) * exp(+omega/omega_s)) - k_v*omega
        omega = 0:  0.0   (stick phase: reaction torque, not modelled)

    The magnitude tends to ``sigma_plus`` (``sigma_minus``) as the velocity
    approaches rest from above (below) and to ``k_c + k_v*|omega|`` at speed.

    Accepts a scalar or a one-dimensional array and returns the same shape.
    """
    p = params
    if np.isscalar(omega):
        w = float(omega)
        if not math.isfinite(w):
            raise DomainError(f"omega must be finite, got {w!r}")
        if w > 0:
            return -(p.k_c + (p.sigma_plus - p.k_c) * math.exp(-w / p.omega_s) + p.k_v * w)
        if w < 0:
            return (p.k_c + (p.sigma_minus - p.k_c) * math.exp(w / p.omega_s)) - p.k_v * w
        return 0.0
    w = np.asarray(omega, dtype=float)
    if w.ndim == 0:
        return friction_torque(params, float(w))
    if not np.all(np.isfinite(w)):
        raise DomainError("omega contains non-finite values")
    out = np.zeros(w.shape)
    pos = w > 0
    neg = w < 0
    wp = w[pos]
    out[pos] = -(p.k_c + (p.sigma_plus - p.k_c) * np.exp(-wp / p.omega_s) + p.k_v * wp)
    wn = w[neg]
    out[neg] = (p.k_c + (p.sigma_minus - p.k_c) * np.exp(wn / p.omega_s)) - p.k_v * wn
    return out


def motor_pwm_torque(params: MotorParams, pwm):
    """Drive torque at the reduction-drive output for a PWM duty cycle."""
    if np.isscalar(pwm):
        v = float(pwm)
        if not math.isfinite(v):
            raise DomainError(f"pwm must be finite, got {v!r}")
        return params.k_pwm_star * v + params.tau_0
    v = np.asarray(pwm, dtype=float)
    if not np.all(np.isfinite(v)):
        raise DomainError("pwm contains non-finite values")
    return params.k_pwm_star * v + params.tau_0


def joint_torque_forward(
    motor: MotorParams,
    friction: FrictionParams,
    inertia: InertiaParams,
    pwm,
    omega,
    omega_dot,
):
    """Forward (ground-truth) joint torque of the assembled chain.

    ``motor_pwm_torque - i_reflected*omega_dot + friction_torque``; this is
    the oracle the simulator and the fit-recovery tests are built on.
    """
    if np.isscalar(omega_dot):
        _require_finite("omega_dot", omega_dot)
    else:
        omega_dot = np.asarray(omega_dot, dtype=float)
        if not np.all(np.isfinite(omega_dot)):
            raise DomainError("omega_dot contains non-finite values")
    return (
        motor_pwm_torque(motor, pwm)
        - inertia.i_reflected * omega_dot
        + friction_torque(friction, omega)
    )


def _check_ratio(rho: float) -> float:
    rho = _require_finite("rho", rho)
    if rho <= 0:
        raise DomainError(f"rho must be > 0, got {rho}")
    return rho


def reflect_inertia(rho: float, i_motor_side: float) -> float:
    """Apparent inertia of a motor-side mass seen at the drive output: rho^2 * I."""
    rho = _check_ratio(rho)
    i_motor_side = _require_finite("i_motor_side", i_motor_side)
    if i_motor_side < 0:
        raise DomainError(f"inertia must be >= 0, got {i_motor_side}")
    return rho * rho * i_motor_side


def reflect_velocity(rho: float, omega_motor_side: float) -> float:
    """Output-side angular velocity of a step-down drive: omega / rho."""
    rho = _check_ratio(rho)
    return _require_finite("omega_motor_side", omega_motor_side) / rho


def reflect_torque(rho: float, tau_motor_side: float, tau_friction_output: float = 0.0) -> float:
    """Output-side torque: rho * tau plus a friction torque already at the output."""
    rho = _check_ratio(rho)
    tau = _require_finite("tau_motor_side", tau_motor_side)
    tau_f = _require_finite("tau_friction_output", tau_friction_output)
    return rho * tau + tau_f
