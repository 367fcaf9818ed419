"""Command-line surface: simulate, identify, identify-coupled, report, validate-config.

Failures exit nonzero and print ``<category>: <message>`` on stderr, where the
category is a fixed slug per error family (see :mod:`jointid.errors`).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .config import RunConfig, load_config
from .datafiles import load_dataset, save_coupled_dataset, save_dataset
from .errors import ConfigError, DataError, JointIdError
from .identify import (
    IdentificationReport,
    identify_coupled_motor,
    identify_pipeline,
    reduce_to_motor,
)
from .model import CoupledDataset, Dataset, friction_torque
from .report import format_report_text, read_report, write_fitted_curve, write_report
from .simulate import gen_coupled, gen_phase1, gen_phase2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jointid",
        description="Identify motor and friction parameters of electric joint actuators.",
    )
    parser.add_argument("--version", action="version", version=f"jointid {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic dataset from the config")
    p.add_argument("--config", required=True, help="TOML run configuration")
    p.add_argument("--out", help="output CSV path (default: io.dataset from config)")

    p = sub.add_parser("identify", help="run the identification pipeline on a dataset")
    p.add_argument("--config", required=True)
    p.add_argument("--data", help="phase-1 CSV (default: io.dataset from config)")
    p.add_argument("--phase2", help="optional phase-2 CSV (default: io.phase2)")
    p.add_argument("--report", help="report output path (default: io.report or report.toml)")
    p.add_argument("--curve", help="fitted-curve CSV path (default: <report>_curve.csv)")

    p = sub.add_parser("identify-coupled", help="motor-wise identification of coupled joints")
    p.add_argument("--config", required=True)
    p.add_argument("--data", help="phase-1 coupled CSV (default: io.dataset)")
    p.add_argument("--phase2", help="optional phase-2 coupled CSV (default: io.phase2)")
    p.add_argument(
        "--motor",
        type=int,
        required=True,
        help="index of the active (non-blocked) motor this experiment excites",
    )
    p.add_argument("--out-dir", help="directory for per-motor reports (default: io.out_dir or .)")

    p = sub.add_parser("report", help="re-render a stored report")
    p.add_argument("path", help="report TOML file")

    p = sub.add_parser("validate-config", help="check a configuration file")
    p.add_argument("--config", required=True)

    return parser


def _resolved(option: str | None, cfg: RunConfig, key: str, default: str | None = None) -> str:
    value = option or cfg.io.get(key) or default
    if not value:
        raise ConfigError(f"no path given for {key}; pass an option or set io.{key}")
    return str(value)


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if cfg.simulate is None:
        raise ConfigError("config has no [simulate] section")
    sim = cfg.simulate
    out = _resolved(args.out, cfg, "dataset")
    if sim.coupled:
        data = gen_coupled(
            cfg.coupling, list(sim.truths), sim.active, sim.profile, sim.noise, phase=sim.phase
        )
        save_coupled_dataset(data, out)
    else:
        truth = sim.truths[0]
        if sim.phase == 1:
            data = gen_phase1(truth.friction, truth.inertia, sim.profile, sim.noise)
        else:
            data = gen_phase2(truth.motor, truth.friction, truth.inertia, sim.profile, sim.noise)
        save_dataset(data, out)
    print(f"wrote {len(data)} samples to {out}")
    return 0


def _expect_single(data, path) -> Dataset:
    if not isinstance(data, Dataset):
        raise DataError(f"{path} holds a coupled dataset; use identify-coupled")
    return data


def _expect_coupled(data, path) -> CoupledDataset:
    if not isinstance(data, CoupledDataset):
        raise DataError(f"{path} holds a single-shaft dataset; use identify")
    return data


def _write_outputs(
    report: IdentificationReport,
    phase1: Dataset,
    chain,
    report_path: str,
    curve_path: str,
) -> None:
    write_report(report_path, report, model_kind=chain.model_kind)
    measured = phase1.tau + chain.inertia.i_reflected * phase1.omega_dot
    modelled = friction_torque(report.friction.params, phase1.omega)
    write_fitted_curve(curve_path, phase1.omega, modelled, measured)


def _cmd_identify(args) -> int:
    cfg = load_config(args.config)
    data_path = _resolved(args.data, cfg, "dataset")
    phase1 = _expect_single(load_dataset(data_path, schema="single"), data_path)
    phase2 = None
    phase2_path = args.phase2 or cfg.io.get("phase2")
    if phase2_path:
        phase2 = _expect_single(load_dataset(phase2_path, schema="single"), phase2_path)
    chain = cfg.chain(0)
    report = identify_pipeline(phase1, chain, phase2)
    report_path = _resolved(args.report, cfg, "report", "report.toml")
    curve_path = args.curve or cfg.io.get("curve") or _default_curve_path(report_path)
    _write_outputs(report, phase1, chain, report_path, curve_path)
    print(f"wrote {report_path} and {curve_path}")
    return 0


def _default_curve_path(report_path: str) -> str:
    p = Path(report_path)
    return str(p.with_name(p.stem + "_curve.csv"))


def _cmd_identify_coupled(args) -> int:
    cfg = load_config(args.config)
    if cfg.coupling is None:
        raise ConfigError("identify-coupled requires a [coupling] section")
    data_path = _resolved(args.data, cfg, "dataset")
    phase1 = _expect_coupled(load_dataset(data_path, schema="coupled"), data_path)
    phase2 = None
    phase2_path = args.phase2 or cfg.io.get("phase2")
    if phase2_path:
        phase2 = _expect_coupled(load_dataset(phase2_path, schema="coupled"), phase2_path)
    out_dir = Path(args.out_dir or cfg.io.get("out_dir") or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    k = args.motor
    chain = cfg.chain(k)
    report = identify_coupled_motor(
        phase1,
        cfg.coupling,
        k,
        chain,
        phase2,
        omega_block=cfg.solve.omega_block,
        max_reject_fraction=cfg.solve.block_reject_fraction,
    )
    reduced, _ = reduce_to_motor(
        phase1,
        cfg.coupling,
        k,
        omega_block=cfg.solve.omega_block,
        max_reject_fraction=cfg.solve.block_reject_fraction,
    )
    report_path = out_dir / f"report_motor{k}.toml"
    curve_path = out_dir / f"curve_motor{k}.csv"
    _write_outputs(report, reduced, chain, str(report_path), str(curve_path))
    print(f"motor {k}: wrote {report_path} and {curve_path}")
    return 0


def _cmd_report(args) -> int:
    doc = read_report(args.path)
    print(format_report_text(doc))
    return 0


def _cmd_validate_config(args) -> int:
    cfg = load_config(args.config)
    coupled = "" if cfg.coupling is None else f", coupling {cfg.coupling.n}x{cfg.coupling.n}"
    print(f"ok: {cfg.n_motors} chain(s){coupled}")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "identify": _cmd_identify,
    "identify-coupled": _cmd_identify_coupled,
    "report": _cmd_report,
    "validate-config": _cmd_validate_config,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except JointIdError as exc:
        print(f"{exc.category}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io-error: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
