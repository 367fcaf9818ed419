import warnings

import numpy as np
import pytest

from jointid import (
    BlockedMotorError,
    ChainConfig,
    CoupledDataset,
    CouplingMatrix,
    DataError,
    Dataset,
    DomainError,
    EmptyDesignError,
    FrictionParams,
    NoiseSpec,
    RankDeficientError,
    friction_torque,
    gen_coupled,
    gen_phase1,
    gen_phase2,
    identify_coupled_motor,
    identify_friction,
    identify_motor,
    identify_pipeline,
    reduce_to_motor,
)
from jointid.errors import ConditioningWarning, CoverageWarning, DataWarning
from conftest import example_chains, max_relative_error


def quiet_identify(data, config):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditioningWarning)
        return identify_friction(data, config)


class TestChainConfig:
    def test_default_deadband_follows_rate_velocity(self):
        assert ChainConfig(omega_s=2.0).effective_omega_dead == pytest.approx(2e-3)
        assert ChainConfig(omega_dead=0.05).effective_omega_dead == 0.05

    def test_validation(self):
        with pytest.raises(DomainError):
            ChainConfig(model_kind="quadratic")
        with pytest.raises(DomainError):
            ChainConfig(rho=0.0)
        with pytest.raises(DomainError):
            ChainConfig(constraint_side="middle")


class TestIdentifyFriction:
    def test_rejects_powered_data(self, knee_params, small_inertia, phase1_profile):
        data = gen_phase1(knee_params, small_inertia, phase1_profile, NoiseSpec.none())
        powered = Dataset(
            t=data.t,
            pwm=np.full(len(data), 3.0),
            omega=data.omega,
            omega_dot=data.omega_dot,
            tau=data.tau,
        )
        with pytest.raises(DataError, match="pwm"):
            identify_friction(powered, ChainConfig(inertia=small_inertia))

    def test_all_stick_data_rejected(self, small_inertia):
        data = Dataset(
            t=np.arange(4.0),
            pwm=np.zeros(4),
            omega=np.zeros(4),
            omega_dot=np.zeros(4),
            tau=np.ones(4),
        )
        with pytest.raises(EmptyDesignError):
            identify_friction(data, ChainConfig(inertia=small_inertia))

    def test_noisy_knee_recovery(self, knee_params, knee_config, small_inertia):
        profile_kwargs = dict(kind="sinusoid", amplitude=50.0, frequency=0.2)
        from jointid import ExcitationProfile

        profile = ExcitationProfile(duration=100.0, sample_rate=100.0, **profile_kwargs)
        data = gen_phase1(
            knee_params, small_inertia, profile, NoiseSpec(torque_std=0.05, velocity_std=0.0, seed=3)
        )
        fit = quiet_identify(data, knee_config)
        assert max_relative_error(fit.params, knee_params) <= 0.05
        assert fit.physical
        assert fit.fit.condition_number >= 1.0
        assert fit.fit.rank_ok

    def test_cv_on_stribeck_data_fits_worse(self, knee_params, small_inertia, phase1_profile):
        data = gen_phase1(knee_params, small_inertia, phase1_profile, NoiseSpec.none())
        cv_cfg = ChainConfig(
            inertia=small_inertia, omega_s=knee_params.omega_s, model_kind="coulomb-viscous"
        )
        st_cfg = ChainConfig(
            inertia=small_inertia, omega_s=knee_params.omega_s, model_kind="stribeck"
        )
        cv = quiet_identify(data, cv_cfg)
        st = quiet_identify(data, st_cfg)
        assert st.fit.residual_rms < cv.fit.residual_rms

    def test_cv_params_collapse_breakaway(self, small_inertia, phase1_profile):
        p = FrictionParams(k_c=1.0, k_v=0.3, sigma_plus=1.0, sigma_minus=1.0)
        data = gen_phase1(p, small_inertia, phase1_profile, NoiseSpec.none())
        cfg = ChainConfig(inertia=small_inertia, model_kind="coulomb-viscous")
        fit = quiet_identify(data, cfg)
        assert fit.params.sigma_plus == fit.params.k_c
        assert fit.params.sigma_minus == fit.params.k_c


class TestIdentifyMotor:
    def test_noiseless_recovery(
        self, motor_params, slow_knee_params, small_inertia, pwm_profile
    ):
        data = gen_phase2(
            motor_params, slow_knee_params, small_inertia, pwm_profile, NoiseSpec.none()
        )
        cfg = ChainConfig(inertia=small_inertia, rho=motor_params.rho)
        fit = identify_motor(data, slow_knee_params, cfg)
        assert fit.params.k_pwm_star == pytest.approx(motor_params.k_pwm_star, rel=1e-9)
        assert fit.params.tau_0 == pytest.approx(motor_params.tau_0, rel=1e-9)
        assert fit.params.rho == motor_params.rho

    def test_unpowered_data_rank_error(self, knee_params, small_inertia, phase1_profile):
        data = gen_phase1(knee_params, small_inertia, phase1_profile, NoiseSpec.none())
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CoverageWarning)
            with pytest.raises(RankDeficientError):
                identify_motor(data, knee_params, ChainConfig(inertia=small_inertia))

    def test_biased_friction_inflates_residual(
        self, motor_params, slow_knee_params, small_inertia, pwm_profile
    ):
        data = gen_phase2(
            motor_params, slow_knee_params, small_inertia, pwm_profile, NoiseSpec.none()
        )
        cfg = ChainConfig(inertia=small_inertia, rho=motor_params.rho)
        unbiased = identify_motor(data, slow_knee_params, cfg)
        biased_params = FrictionParams(
            k_c=slow_knee_params.k_c + 0.5,
            k_v=slow_knee_params.k_v,
            sigma_plus=slow_knee_params.sigma_plus + 0.5,
            sigma_minus=slow_knee_params.sigma_minus + 0.5,
            omega_s=slow_knee_params.omega_s,
        )
        biased = identify_motor(data, biased_params, cfg)
        assert biased.fit.residual_rms > unbiased.fit.residual_rms


class TestPipeline:
    def test_two_phase_report(
        self, motor_params, slow_knee_params, small_inertia, phase1_profile, pwm_profile
    ):
        phase1 = gen_phase1(slow_knee_params, small_inertia, phase1_profile, NoiseSpec.none())
        phase2 = gen_phase2(
            motor_params, slow_knee_params, small_inertia, pwm_profile, NoiseSpec.none()
        )
        cfg = ChainConfig(inertia=small_inertia, rho=motor_params.rho, model_kind="stribeck")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConditioningWarning)
            report = identify_pipeline(phase1, cfg, phase2)
        assert report.motor is not None
        assert report.motor.params.k_pwm_star == pytest.approx(0.02, rel=1e-6)
        assert max_relative_error(report.friction.params, slow_knee_params) <= 1e-6
        curve = report.fitted_curve
        assert curve.shape == (200, 2)
        assert np.all(np.isfinite(curve))
        # curve samples the signed model over the data's velocity range
        mid = curve[curve.shape[0] // 2]
        assert mid[1] == pytest.approx(friction_torque(report.friction.params, mid[0]))


class TestCoupled:
    def coupling(self):
        return CouplingMatrix([[1.0, 0.5, 0.0], [-0.3, 1.0, 0.2], [0.1, 0.0, 1.0]])

    def test_identity_coupling_matches_single_chain(self, phase1_profile):
        chains = example_chains()
        eye = CouplingMatrix.identity(3)
        k = 1
        coupled = gen_coupled(eye, chains, k, phase1_profile, NoiseSpec.none(), phase=1)
        cfg = ChainConfig(inertia=chains[k].inertia, model_kind="stribeck")
        coupled_fit = identify_coupled_motor(coupled, eye, k, cfg)
        single = Dataset(
            t=coupled.t,
            pwm=coupled.pwm[:, k],
            omega=coupled.omega_j[:, k],
            omega_dot=coupled.omega_dot_j[:, k],
            tau=coupled.tau_j[:, k],
        )
        single_fit = identify_friction(single, cfg)
        assert np.array_equal(coupled_fit.friction.fit.theta, single_fit.fit.theta)

    def test_round_trip_recovery(self, phase1_profile):
        chains = example_chains()
        c = self.coupling()
        for k in (0, 2):
            coupled = gen_coupled(c, chains, k, phase1_profile, NoiseSpec.none(), phase=1)
            cfg = ChainConfig(inertia=chains[k].inertia, model_kind="stribeck")
            report = identify_coupled_motor(coupled, c, k, cfg)
            assert max_relative_error(report.friction.params, chains[k].friction) <= 1e-6
            assert report.blocked_rejected == 0

    def test_projection_reconstructs_shaft_torque(self, phase1_profile):
        chains = example_chains()
        c = self.coupling()
        k = 2
        coupled = gen_coupled(c, chains, k, phase1_profile, NoiseSpec.none(), phase=1)
        reduced, rejected = reduce_to_motor(coupled, c, k)
        oracle = gen_phase1(
            chains[k].friction, chains[k].inertia, phase1_profile, NoiseSpec.none()
        )
        assert rejected == 0
        scale = np.max(np.abs(oracle.tau))
        assert np.max(np.abs(reduced.tau - oracle.tau)) <= 1e-9 * scale
        assert np.max(np.abs(reduced.omega - oracle.omega)) <= 1e-9 * 50.0

    def test_two_phase_coupled(self, pwm_profile, phase1_profile):
        chains = example_chains()
        c = self.coupling()
        k = 0
        phase1 = gen_coupled(c, chains, k, phase1_profile, NoiseSpec.none(), phase=1)
        phase2 = gen_coupled(c, chains, k, pwm_profile, NoiseSpec.none(), phase=2)
        cfg = ChainConfig(inertia=chains[k].inertia, rho=100.0, model_kind="stribeck")
        report = identify_coupled_motor(phase1, c, k, cfg, phase2)
        assert report.motor is not None
        assert report.motor.params.k_pwm_star == pytest.approx(
            chains[k].motor.k_pwm_star, rel=1e-6
        )
        assert report.motor.params.tau_0 == pytest.approx(chains[k].motor.tau_0, rel=1e-6)

    def test_motor_encoder_channel_preferred(self, phase1_profile):
        chains = example_chains()
        c = self.coupling()
        k = 1
        coupled = gen_coupled(
            c, chains, k, phase1_profile, NoiseSpec.none(), phase=1, include_motor_encoders=True
        )
        # corrupt the joint velocities; the encoder channel must win
        corrupted = CoupledDataset(
            t=coupled.t,
            pwm=coupled.pwm,
            omega_j=coupled.omega_j + 500.0,
            tau_j=coupled.tau_j,
            omega_m=coupled.omega_m,
            omega_dot_j=coupled.omega_dot_j,
        )
        reduced, _ = reduce_to_motor(corrupted, c, k)
        assert np.array_equal(reduced.omega, coupled.omega_m[:, k])

    def test_moving_sibling_rejected(self, phase1_profile):
        chains = example_chains()
        c = self.coupling()
        coupled = gen_coupled(c, chains, 2, phase1_profile, NoiseSpec.none(), phase=1)
        # sibling 0 moves during t in [2, 12): violates far beyond the 5% budget
        omega_m = np.zeros((len(coupled), 3))
        omega_m[(coupled.t >= 2.0) & (coupled.t < 12.0), 0] = 0.7
        moving = CoupledDataset(
            t=coupled.t,
            pwm=coupled.pwm,
            omega_j=coupled.omega_j,
            tau_j=coupled.tau_j,
            omega_m=omega_m,
            omega_dot_j=coupled.omega_dot_j,
        )
        cfg = ChainConfig(inertia=chains[2].inertia)
        with pytest.raises(BlockedMotorError, match=r"\[2\.000, 11\.990\] s"):
            identify_coupled_motor(moving, c, 2, cfg)

    def test_minor_violation_dropped_with_warning(self, phase1_profile):
        chains = example_chains()
        c = self.coupling()
        k = 2
        coupled = gen_coupled(c, chains, k, phase1_profile, NoiseSpec.none(), phase=1)
        omega_m = np.zeros((len(coupled), 3))
        omega_m[:, k] = 1.0  # irrelevant: only siblings are checked
        omega_m[5:10, 0] = 0.5
        moving = CoupledDataset(
            t=coupled.t,
            pwm=coupled.pwm,
            omega_j=coupled.omega_j,
            tau_j=coupled.tau_j,
            omega_m=omega_m,
            omega_dot_j=coupled.omega_dot_j,
        )
        with pytest.warns(DataWarning, match="5 samples"):
            reduced, rejected = reduce_to_motor(moving, c, k)
        assert rejected == 5
        assert len(reduced) == len(coupled) - 5

    def test_channel_count_mismatch(self, phase1_profile):
        chains = example_chains()
        coupled = gen_coupled(
            CouplingMatrix.identity(3), chains, 0, phase1_profile, NoiseSpec.none()
        )
        with pytest.raises(DataError):
            reduce_to_motor(coupled, CouplingMatrix.identity(2), 0)
