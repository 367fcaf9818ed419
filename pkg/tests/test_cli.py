import pytest

from jointid.cli import main
from jointid.report import read_report

SINGLE_CONFIG = """\
[chain]
inertia = 0.02
rho = 100.0
omega_s = 0.5
model_kind = "stribeck"

[solve]
cond_warn = 1e9

[simulate]
phase = 1

[simulate.profile]
kind = "sinusoid"
amplitude = 50.0
frequency = 0.2
duration = 60.0
sample_rate = 100.0

[simulate.noise]
torque_std = 0.02
velocity_std = 0.0
seed = 11

[simulate.truth]
k_c = 0.85
k_v = 0.69
sigma_plus = 1.27
sigma_minus = 1.95
k_pwm_star = 0.02
tau_0 = 0.1
"""

PHASE2_CONFIG = SINGLE_CONFIG.replace("phase = 1", "phase = 2").replace(
    'kind = "sinusoid"\namplitude = 50.0\nfrequency = 0.2',
    'kind = "sinusoid"\namplitude = 150.0\nfrequency = 0.1',
)

COUPLED_CONFIG = """\
[chain]
inertia = 0.02
rho = 100.0
omega_s = 1.0
model_kind = "stribeck"

[coupling]
t = [[1.0, 0.5, 0.0], [-0.3, 1.0, 0.2], [0.1, 0.0, 1.0]]

[simulate]
phase = 1
coupled = true
active = 2

[simulate.profile]
kind = "sinusoid"
amplitude = 50.0
frequency = 0.2
duration = 60.0
sample_rate = 100.0

[simulate.noise]
torque_std = 0.0
velocity_std = 0.0
seed = 3

[[simulate.motors]]
k_c = 0.6
k_v = 0.2
sigma_plus = 1.0
sigma_minus = 1.3

[[simulate.motors]]
k_c = 0.7
k_v = 0.25
sigma_plus = 1.2
sigma_minus = 1.4

[[simulate.motors]]
k_c = 0.8
k_v = 0.3
sigma_plus = 1.4
sigma_minus = 1.5
"""


@pytest.fixture
def single_config(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(SINGLE_CONFIG)
    return path


class TestValidateConfig:
    def test_valid(self, single_config, capsys):
        assert main(["validate-config", "--config", str(single_config)]) == 0
        assert "ok" in capsys.readouterr().out

    def test_singular_coupling(self, tmp_path, capsys):
        path = tmp_path / "bad.toml"
        path.write_text("[coupling]\nt = [[1.0, 1.0], [1.0, 1.0]]\n")
        assert main(["validate-config", "--config", str(path)]) == 1
        assert "singular-coupling-matrix:" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        assert main(["validate-config", "--config", str(tmp_path / "none.toml")]) == 1
        assert "config-error:" in capsys.readouterr().err

    def test_malformed_toml(self, tmp_path, capsys):
        path = tmp_path / "broken.toml"
        path.write_text("[chain\ninertia = ???\n")
        assert main(["validate-config", "--config", str(path)]) == 1
        assert "config-error:" in capsys.readouterr().err

    def test_unknown_key(self, tmp_path, capsys):
        path = tmp_path / "typo.toml"
        path.write_text("[chain]\ninertai = 0.5\n")
        assert main(["validate-config", "--config", str(path)]) == 1
        assert "inertai" in capsys.readouterr().err


class TestSimulate:
    def test_deterministic_output(self, single_config, tmp_path):
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        assert main(["simulate", "--config", str(single_config), "--out", str(out1)]) == 0
        assert main(["simulate", "--config", str(single_config), "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_requires_simulate_section(self, tmp_path, capsys):
        path = tmp_path / "nosim.toml"
        path.write_text("[chain]\ninertia = 0.1\n")
        assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "x.csv")]) == 1
        assert "config-error:" in capsys.readouterr().err


class TestIdentify:
    def test_end_to_end_single(self, single_config, tmp_path):
        data = tmp_path / "phase1.csv"
        report = tmp_path / "report.toml"
        assert main(["simulate", "--config", str(single_config), "--out", str(data)]) == 0
        assert (
            main(
                [
                    "identify",
                    "--config",
                    str(single_config),
                    "--data",
                    str(data),
                    "--report",
                    str(report),
                ]
            )
            == 0
        )
        doc = read_report(report)
        friction = doc["friction"]
        assert friction["k_c"] == pytest.approx(0.85, rel=0.05)
        assert friction["k_v"] == pytest.approx(0.69, rel=0.05)
        assert friction["sigma_plus"] == pytest.approx(1.27, rel=0.05)
        assert friction["sigma_minus"] == pytest.approx(1.95, rel=0.05)
        assert friction["physical"] is True
        fit = doc["friction"]["fit"]
        assert fit["condition_number"] >= 1.0
        assert fit["sample_count"] + fit["excluded_count"] == 6000
        curve = tmp_path / "report_curve.csv"
        lines = curve.read_text().splitlines()
        assert lines[0] == "omega,tau_model,tau_measured"
        assert len(lines) == 6001

    def test_two_phase_reports_motor(self, tmp_path):
        cfg1 = tmp_path / "p1.toml"
        cfg1.write_text(SINGLE_CONFIG)
        cfg2 = tmp_path / "p2.toml"
        cfg2.write_text(PHASE2_CONFIG)
        d1, d2 = tmp_path / "d1.csv", tmp_path / "d2.csv"
        report = tmp_path / "full.toml"
        assert main(["simulate", "--config", str(cfg1), "--out", str(d1)]) == 0
        assert main(["simulate", "--config", str(cfg2), "--out", str(d2)]) == 0
        assert (
            main(
                [
                    "identify",
                    "--config",
                    str(cfg1),
                    "--data",
                    str(d1),
                    "--phase2",
                    str(d2),
                    "--report",
                    str(report),
                ]
            )
            == 0
        )
        doc = read_report(report)
        assert doc["motor"]["k_pwm_star"] == pytest.approx(0.02, rel=0.02)
        assert doc["motor"]["tau_0"] == pytest.approx(0.1, rel=0.05)
        assert doc["motor"]["rho"] == 100.0

    def test_determinism_end_to_end(self, single_config, tmp_path):
        # same seed, two full pipeline runs: byte-identical artifacts
        outputs = []
        for tag in ("x", "y"):
            data = tmp_path / f"{tag}.csv"
            report = tmp_path / f"{tag}.toml"
            curve = tmp_path / f"{tag}_curve.csv"
            assert main(["simulate", "--config", str(single_config), "--out", str(data)]) == 0
            assert (
                main(
                    [
                        "identify",
                        "--config",
                        str(single_config),
                        "--data",
                        str(data),
                        "--report",
                        str(report),
                        "--curve",
                        str(curve),
                    ]
                )
                == 0
            )
            outputs.append((data.read_bytes(), report.read_bytes(), curve.read_bytes()))
        assert outputs[0] == outputs[1]

    def test_wrong_schema_reported(self, single_config, tmp_path, capsys):
        coupled_cfg = tmp_path / "coupled.toml"
        coupled_cfg.write_text(COUPLED_CONFIG)
        data = tmp_path / "coupled.csv"
        assert main(["simulate", "--config", str(coupled_cfg), "--out", str(data)]) == 0
        assert (
            main(["identify", "--config", str(single_config), "--data", str(data)]) == 1
        )
        assert "data-error:" in capsys.readouterr().err


class TestIdentifyCoupled:
    def test_end_to_end(self, tmp_path):
        cfg = tmp_path / "coupled.toml"
        cfg.write_text(COUPLED_CONFIG)
        data = tmp_path / "coupled.csv"
        out_dir = tmp_path / "reports"
        assert main(["simulate", "--config", str(cfg), "--out", str(data)]) == 0
        assert (
            main(
                [
                    "identify-coupled",
                    "--config",
                    str(cfg),
                    "--data",
                    str(data),
                    "--motor",
                    "2",
                    "--out-dir",
                    str(out_dir),
                ]
            )
            == 0
        )
        doc = read_report(out_dir / "report_motor2.toml")
        assert doc["friction"]["k_c"] == pytest.approx(0.8, rel=0.02)
        assert doc["friction"]["sigma_minus"] == pytest.approx(1.5, rel=0.02)
        assert (out_dir / "curve_motor2.csv").exists()


class TestReportCommand:
    def test_rerender(self, single_config, tmp_path, capsys):
        data = tmp_path / "d.csv"
        report = tmp_path / "r.toml"
        main(["simulate", "--config", str(single_config), "--out", str(data)])
        main(["identify", "--config", str(single_config), "--data", str(data), "--report", str(report)])
        capsys.readouterr()
        assert main(["report", str(report)]) == 0
        out = capsys.readouterr().out
        assert "sigma_plus" in out and "condition_number" in out

    def test_not_a_report(self, tmp_path, capsys):
        path = tmp_path / "other.toml"
        path.write_text("[something]\nx = 1\n")
        assert main(["report", str(path)]) == 1
        assert "data-error:" in capsys.readouterr().err
