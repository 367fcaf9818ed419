"""Synthetic ground-truth data generators (the verification oracle).

Phase-1 traces prescribe the velocity (the real experiment is externally
driven) and evaluate the torque a sensor at the drive output would read;
phase-2 traces integrate the free shaft under a PWM drive with a minimal
stick clamp at rest. Coupled scenarios run one motor through either generator
while the siblings are held, then map everything to joint space through the
coupling transforms.

All generators are deterministic: a fixed noise seed reproduces the dataset
bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coupling import CouplingMatrix
from .errors import DomainError, SimulationError
from .model import (
    CoupledDataset,
    Dataset,
    FrictionParams,
    InertiaParams,
    MotorParams,
    friction_torque,
    joint_torque_forward,
)

__all__ = [
    "PROFILE_KINDS",
    "ExcitationProfile",
    "NoiseSpec",
    "ActuatorChain",
    "gen_phase1",
    "gen_phase2",
    "gen_coupled",
]

PROFILE_KINDS = ("sinusoid", "triangle", "multisine", "constant")

#: harmonic multiples and fixed phases of the multisine profile
_MULTISINE_HARMONICS = (1, 2, 3)
_MULTISINE_PHASES = (0.0, math.pi / 3.0, 3.0 * math.pi / 5.0)


@dataclass(frozen=True)
class ExcitationProfile:
    """Deterministic excitation waveform with an analytic derivative.

    ``amplitude`` is in deg/s for velocity profiles and PWM units for drive
    profiles. ``constant`` holds the amplitude for the whole duration.
    """

    kind: str
    amplitude: float
    frequency: float = 0.0  # Hz; ignored for "constant"
    duration: float = 60.0  # s
    sample_rate: float = 100.0  # Hz

    def __post_init__(self) -> None:
        if self.kind not in PROFILE_KINDS:
            raise DomainError(f"kind must be one of {PROFILE_KINDS}, got {self.kind!r}")
        if not math.isfinite(self.amplitude):
            raise DomainError("amplitude must be finite")
        if self.duration <= 0:
            raise DomainError(f"duration must be > 0, got {self.duration}")
        if self.sample_rate <= 0:
            raise DomainError(f"sample_rate must be > 0, got {self.sample_rate}")
        if self.kind != "constant":
            if self.frequency <= 0:
                raise DomainError(f"frequency must be > 0, got {self.frequency}")
            highest = self.frequency * (
                _MULTISINE_HARMONICS[-1] if self.kind == "multisine" else 1
            )
            if self.sample_rate <= 2.0 * highest:
                raise DomainError(
                    f"sample_rate {self.sample_rate} Hz cannot resolve {highest} Hz content"
                )

    def times(self) -> np.ndarray:
        n = int(round(self.duration * self.sample_rate))
        return np.arange(n) / self.sample_rate

    def evaluate(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Profile value and analytic time derivative at the given instants."""
        t = np.asarray(t, dtype=float)
        a = self.amplitude
        if self.kind == "constant":
            return np.full(t.shape, a), np.zeros(t.shape)
        w = 2.0 * math.pi * self.frequency
        if self.kind == "sinusoid":
            return a * np.sin(w * t), a * w * np.cos(w * t)
        if self.kind == "multisine":
            value = np.zeros(t.shape)
            rate = np.zeros(t.shape)
            for h, phase in zip(_MULTISINE_HARMONICS, _MULTISINE_PHASES):
                value += a / h * np.sin(h * w * t + phase)
                rate += a * w * np.cos(h * w * t + phase)
            return value, rate
        # triangle: 0 -> +A -> -A -> 0 over one period, slope +-4*A*f
        period = 1.0 / self.frequency
        phase = np.mod(t, period) / period
        value = np.where(
            phase < 0.25,
            4.0 * phase,
            np.where(phase < 0.75, 2.0 - 4.0 * phase, 4.0 * phase - 4.0),
        )
        slope = np.where((phase < 0.25) | (phase >= 0.75), 4.0, -4.0)
        return a * value, a * slope * self.frequency


@dataclass(frozen=True)
class NoiseSpec:
    """Additive Gaussian measurement noise on recorded torque and velocity."""

    torque_std: float = 0.05  # N*m
    velocity_std: float = 0.1  # deg/s
    seed: int = 0

    def __post_init__(self) -> None:
        if self.torque_std < 0 or self.velocity_std < 0:
            raise DomainError("noise standard deviations must be >= 0")

    @classmethod
    def none(cls, seed: int = 0) -> "NoiseSpec":
        return cls(torque_std=0.0, velocity_std=0.0, seed=seed)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


@dataclass(frozen=True)
class ActuatorChain:
    """Ground-truth parameter bundle for one motor transmission chain."""

    friction: FrictionParams
    motor: MotorParams
    inertia: InertiaParams


def _apply_noise(
    rng: np.random.Generator, noise: NoiseSpec, tau: np.ndarray, omega: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    # draw order is fixed (torque, then velocity) so seeds stay reproducible
    if noise.torque_std > 0:
        tau = tau + rng.normal(0.0, noise.torque_std, tau.shape)
    if noise.velocity_std > 0:
        omega = omega + rng.normal(0.0, noise.velocity_std, omega.shape)
    return tau, omega


def gen_phase1(
    friction: FrictionParams,
    inertia: InertiaParams,
    profile: ExcitationProfile,
    noise: NoiseSpec,
    *,
    shaft: str = "joint",
) -> Dataset:
    """Externally driven friction experiment with the motor input at zero.

    The velocity trajectory is prescribed by the profile (with its analytic
    acceleration); the recorded torque is what a sensor at the drive output
    reads while only inertia and friction act:
    ``tau = -i_reflected*omega_dot + friction_torque``. Noise applies to the
    recorded torque and velocity channels only; the plant runs on the clean
    trajectory.
    """
    t = profile.times()
    omega, omega_dot = profile.evaluate(t)
    tau = -inertia.i_reflected * omega_dot + friction_torque(friction, omega)
    tau, omega = _apply_noise(noise.rng(), noise, tau, omega)
    return Dataset(
        t=t,
        pwm=np.zeros(t.shape),
        omega=omega,
        omega_dot=omega_dot,
        tau=tau,
        shaft=shaft,
        sample_rate=profile.sample_rate,
    )


def gen_phase2(
    motor: MotorParams,
    friction: FrictionParams,
    inertia: InertiaParams,
    pwm_profile: ExcitationProfile,
    noise: NoiseSpec,
    *,
    omega_initial: float = 0.0,
    omega_dead: float | None = None,
    shaft: str = "joint",
) -> Dataset:
    """PWM excitation experiment on a free shaft (no external load).

    Integrates ``omega_dot = (k_pwm_star*pwm + tau_0 + friction_torque) / i``
    with fixed-step explicit Euler at the sample rate. At rest the shaft
    sticks while the drive torque stays below the larger breakaway magnitude.
    The recorded ``omega_dot`` is the integrator's own derivative, so the
    recorded channels satisfy the forward model identically at every step.
    """
    if inertia.i_reflected <= 0.0:
        raise SimulationError(
            "reflected inertia must be > 0 to integrate a driven shaft; "
            "use gen_phase1 to prescribe the velocity instead"
        )
    dead = 1e-3 * friction.omega_s if omega_dead is None else float(omega_dead)
    t = pwm_profile.times()
    pwm, _ = pwm_profile.evaluate(t)
    h = 1.0 / pwm_profile.sample_rate
    breakaway = max(friction.sigma_plus, friction.sigma_minus)

    omega = np.empty(t.shape)
    omega_dot = np.empty(t.shape)
    w = float(omega_initial)
    for i in range(t.shape[0]):
        drive = motor.k_pwm_star * pwm[i] + motor.tau_0
        if abs(w) < dead and abs(drive) < breakaway:
            w = 0.0
            a = 0.0
            w_next = 0.0
        else:
            a = (drive + friction_torque(friction, w)) / inertia.i_reflected
            w_next = w + h * a
            # friction cannot push a shaft through rest: a sign change within
            # one step lands at zero and the stick test decides the next step
            if w != 0.0 and w * w_next < 0.0:
                w_next = 0.0
        omega[i] = w
        omega_dot[i] = a
        w = w_next

    tau = joint_torque_forward(motor, friction, inertia, pwm, omega, omega_dot)
    tau, omega = _apply_noise(noise.rng(), noise, tau, omega)
    return Dataset(
        t=t,
        pwm=pwm,
        omega=omega,
        omega_dot=omega_dot,
        tau=tau,
        shaft=shaft,
        sample_rate=pwm_profile.sample_rate,
    )


#: blocked-motor holding torque as a fraction of the chain's breakaway level
_BRAKE_FRACTION = 0.5


def gen_coupled(
    coupling: CouplingMatrix,
    chains: list[ActuatorChain],
    active: int,
    profile: ExcitationProfile,
    noise: NoiseSpec,
    *,
    phase: int = 1,
    include_motor_encoders: bool = False,
) -> CoupledDataset:
    """Coupled-joint experiment with one active motor and blocked siblings.

    The active motor follows the single-chain phase-1 or phase-2 generator.
    Blocked motors are pinned at exactly zero velocity; their shafts carry a
    bounded holding-reaction torque (below breakaway, here a deterministic
    sinusoid) that the joint-space channels faithfully transport, which is
    precisely what the motor-wise projection must cancel. Noise is added in
    joint space; the optional motor-encoder channel stays exact.
    """
    n = coupling.n
    if len(chains) != n:
        raise DomainError(f"need {n} chains for a {n}x{n} coupling, got {len(chains)}")
    k = int(active)
    if not 0 <= k < n:
        raise DomainError(f"active motor {k} out of range for {n} motors")
    if phase not in (1, 2):
        raise DomainError(f"phase must be 1 or 2, got {phase}")

    chain = chains[k]
    if phase == 1:
        single = gen_phase1(chain.friction, chain.inertia, profile, NoiseSpec.none())
    else:
        single = gen_phase2(chain.motor, chain.friction, chain.inertia, profile, NoiseSpec.none())

    t = single.t
    m = t.shape[0]
    omega_m = np.zeros((m, n))
    omega_dot_m = np.zeros((m, n))
    tau_m = np.zeros((m, n))
    pwm = np.zeros((m, n))
    omega_m[:, k] = single.omega
    omega_dot_m[:, k] = single.omega_dot
    tau_m[:, k] = single.tau
    pwm[:, k] = single.pwm

    brake_freq = profile.frequency if profile.kind != "constant" else 0.25
    for j in range(n):
        if j == k:
            continue
        level = _BRAKE_FRACTION * min(chains[j].friction.sigma_plus, chains[j].friction.sigma_minus)
        tau_m[:, j] = level * np.sin(2.0 * math.pi * brake_freq * t + 2.0 * math.pi * (j + 1) / (n + 1))

    omega_j = omega_m @ coupling.t.T
    omega_dot_j = omega_dot_m @ coupling.t.T
    tau_j = np.linalg.solve(coupling.t.T, tau_m.T).T

    rng = noise.rng()
    if noise.torque_std > 0:
        tau_j = tau_j + rng.normal(0.0, noise.torque_std, tau_j.shape)
    if noise.velocity_std > 0:
        omega_j = omega_j + rng.normal(0.0, noise.velocity_std, omega_j.shape)

    return CoupledDataset(
        t=t,
        pwm=pwm,
        omega_j=omega_j,
        tau_j=tau_j,
        omega_m=omega_m if include_motor_encoders else None,
        omega_dot_j=omega_dot_j,
        sample_rate=profile.sample_rate,
    )
