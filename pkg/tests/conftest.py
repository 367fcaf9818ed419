import numpy as np
import pytest

from jointid import (
    ActuatorChain,
    ChainConfig,
    ExcitationProfile,
    FrictionParams,
    InertiaParams,
    MotorParams,
)

# Right-knee-like fixture used by the recovery tests: breakaway magnitudes
# 1.27/1.95 N*m, viscous 0.69 N*m*s/deg; k_c and omega_s chosen so the fitted
# magnitude dips just after breakaway on the positive side.
KNEE = FrictionParams(k_c=0.85, k_v=0.69, sigma_plus=1.27, sigma_minus=1.95, omega_s=0.5)

# Slow-knee variant with the gentler viscous slope quoted alongside the
# breakaway values above.
KNEE_SLOW = FrictionParams(k_c=0.85, k_v=0.31, sigma_plus=1.27, sigma_minus=1.95, omega_s=1.0)

MOTOR = MotorParams(k_pwm_star=0.02, tau_0=0.1, rho=100.0)


@pytest.fixture
def knee_params():
    return KNEE


@pytest.fixture
def slow_knee_params():
    return KNEE_SLOW


@pytest.fixture
def motor_params():
    return MOTOR


@pytest.fixture
def small_inertia():
    return InertiaParams(0.02)


@pytest.fixture
def phase1_profile():
    return ExcitationProfile(
        kind="sinusoid", amplitude=50.0, frequency=0.2, duration=60.0, sample_rate=100.0
    )


@pytest.fixture
def pwm_profile():
    return ExcitationProfile(
        kind="sinusoid", amplitude=150.0, frequency=0.1, duration=60.0, sample_rate=100.0
    )


def random_friction(rng: np.random.Generator) -> FrictionParams:
    k_c = float(rng.uniform(0.0, 2.0))
    return FrictionParams(
        k_c=k_c,
        k_v=float(rng.uniform(0.0, 1.0)),
        sigma_plus=k_c + float(rng.uniform(0.0, 2.0)),
        sigma_minus=k_c + float(rng.uniform(0.0, 2.0)),
        omega_s=float(rng.uniform(0.2, 5.0)),
    )


def example_chains(n: int = 3) -> list[ActuatorChain]:
    return [
        ActuatorChain(
            friction=FrictionParams(
                k_c=0.6 + 0.1 * i,
                k_v=0.2 + 0.05 * i,
                sigma_plus=1.0 + 0.2 * i,
                sigma_minus=1.3 + 0.1 * i,
                omega_s=1.0,
            ),
            motor=MotorParams(k_pwm_star=0.02 + 0.005 * i, tau_0=0.05, rho=100.0),
            inertia=InertiaParams(0.02),
        )
        for i in range(n)
    ]


def max_relative_error(params: FrictionParams, truth: FrictionParams) -> float:
    pairs = [
        (params.k_c, truth.k_c),
        (params.k_v, truth.k_v),
        (params.sigma_plus, truth.sigma_plus),
        (params.sigma_minus, truth.sigma_minus),
    ]
    return max(abs(est - ref) / abs(ref) for est, ref in pairs)


@pytest.fixture
def knee_config(small_inertia):
    return ChainConfig(inertia=small_inertia, omega_s=KNEE.omega_s, model_kind="stribeck")
