"""Linear transforms between motor-shaft space and joint space.

A differential (or any bijective) coupling maps motor-shaft velocities to
joint velocities through an invertible matrix ``T``:

    omega_joint = T @ omega_motor
    tau_joint   = inv(T).T @ tau_motor      (power conservation)

Torque measurements taken at the joints are pulled back onto one motor's
transmission chain by projecting on the corresponding column of ``T``, which
is what makes motor-wise identification of coupled joints possible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, SingularMatrixError

__all__ = [
    "CouplingMatrix",
    "motor_to_joint_velocity",
    "motor_to_joint_torque",
    "project_joint_torque_to_motor",
    "motor_velocity_from_joints",
]

#: singular values below this fraction of the largest mark T as singular
EPS_DET = 1e-9


@dataclass(frozen=True)
class CouplingMatrix:
    """Invertible map from motor-shaft velocities to joint velocities."""

    t: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] < 1:
            raise DataError(f"coupling matrix must be square, got shape {t.shape}")
        if not np.all(np.isfinite(t)):
            raise DataError("coupling matrix contains non-finite entries")
        sv = np.linalg.svd(t, compute_uv=False)
        if sv[0] == 0.0 or sv[-1] <= EPS_DET * sv[0]:
            cond = float("inf") if sv[-1] == 0.0 else float(sv[0] / sv[-1])
            raise SingularMatrixError(
                f"coupling matrix is singular at tolerance {EPS_DET:g} "
                f"(condition number {cond:.3e})"
            )
        t.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "_cond", float(sv[0] / sv[-1]))

    @property
    def n(self) -> int:
        return int(self.t.shape[0])

    @property
    def condition_number(self) -> float:
        """2-norm condition number of ``T``."""
        return self._cond  # type: ignore[attr-defined]

    @classmethod
    def identity(cls, n: int) -> "CouplingMatrix":
        return cls(np.eye(int(n)))


def _vectors(c: CouplingMatrix, v, name: str) -> tuple[np.ndarray, bool]:
    """Coerce to an (m, n) batch; also reports whether input was a single vector."""
    arr = np.asarray(v, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2 or arr.shape[1] != c.n:
        raise DataError(
            f"{name} must have {c.n} components per sample, got shape {np.shape(v)}"
        )
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    return arr, single


def motor_to_joint_velocity(c: CouplingMatrix, omega_m):
    """Joint velocities for motor-shaft velocities: ``T @ omega_m``.

    Accepts a single n-vector or an (m, n) batch of samples.
    """
    arr, single = _vectors(c, omega_m, "omega_m")
    out = arr @ c.t.T
    return out[0] if single else out


def motor_to_joint_torque(c: CouplingMatrix, tau_m):
    """Joint torques for motor-shaft torques: ``inv(T).T @ tau_m``.

    Satisfies the power identity ``tau_j . omega_j == tau_m . omega_m`` for
    every velocity pair related by the velocity transform.
    """
    arr, single = _vectors(c, tau_m, "tau_m")
    out = np.linalg.solve(c.t.T, arr.T).T
    return out[0] if single else out


def project_joint_torque_to_motor(c: CouplingMatrix, motor_index: int, tau_j) -> float:
    """Joint torques projected onto one motor's transmission chain.

    Returns ``T[:, k] . tau_j``, the torque an observer on motor ``k``'s
    shaft accounts for; with ``tau_j = inv(T).T @ tau_m`` this recovers
    ``tau_m[k]`` exactly, which decorrelates the coupled motors.
    """
    k = int(motor_index)
    if not 0 <= k < c.n:
        raise DataError(f"motor index {k} out of range for {c.n} motors")
    arr, single = _vectors(c, tau_j, "tau_j")
    out = arr @ c.t[:, k]
    return float(out[0]) if single else out


def motor_velocity_from_joints(c: CouplingMatrix, omega_j):
    """Motor-shaft velocities reconstructed from joint velocities: ``inv(T) @ omega_j``."""
    arr, single = _vectors(c, omega_j, "omega_j")
    out = np.linalg.solve(c.t, arr.T).T
    return out[0] if single else out
