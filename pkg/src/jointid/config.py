"""Run configuration: a TOML file with nested sections.

Sections
--------
``[chain]``     given quantities and model selection (``inertia`` and ``rho``
                may be scalars or per-motor lists for coupled runs)
``[solve]``     solver tolerances and blocked-motor policy
``[coupling]``  optional coupling matrix ``t`` as a list of rows
``[simulate]``  optional generator block with ``profile``, ``noise`` and the
                ground-truth parameter tables (``truth`` for a single shaft,
                ``[[simulate.motors]]`` per motor when coupled)
``[io]``        optional default input/output paths for the CLI
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .coupling import CouplingMatrix
from .errors import ConfigError, JointIdError
from .identify import ChainConfig, MODEL_KINDS
from .model import FrictionParams, InertiaParams, MotorParams
from .simulate import ActuatorChain, ExcitationProfile, NoiseSpec

__all__ = ["SolveOptions", "SimulateConfig", "RunConfig", "load_config"]


@dataclass(frozen=True)
class SolveOptions:
    cond_warn: float = 1e6
    omega_block: float = 0.1  # deg/s tolerance for "blocked" sibling motors
    block_reject_fraction: float = 0.05

    def __post_init__(self) -> None:
        if self.cond_warn <= 0 or self.omega_block < 0:
            raise ConfigError("solve options must be positive")
        if not 0 <= self.block_reject_fraction <= 1:
            raise ConfigError("block_reject_fraction must be in [0, 1]")


@dataclass(frozen=True)
class SimulateConfig:
    profile: ExcitationProfile
    noise: NoiseSpec
    truths: tuple[ActuatorChain, ...]
    phase: int = 1
    coupled: bool = False
    active: int = 0


@dataclass(frozen=True)
class RunConfig:
    chains: tuple[ChainConfig, ...]
    coupling: CouplingMatrix | None = None
    simulate: SimulateConfig | None = None
    solve: SolveOptions = field(default_factory=SolveOptions)
    io: dict = field(default_factory=dict)

    @property
    def n_motors(self) -> int:
        return len(self.chains)

    def chain(self, motor_index: int = 0) -> ChainConfig:
        if not 0 <= motor_index < len(self.chains):
            raise ConfigError(f"no chain configuration for motor {motor_index}")
        return self.chains[motor_index]


def _per_motor(value, n: int, name: str) -> list[float]:
    if isinstance(value, (int, float)):
        return [float(value)] * n
    values = [float(v) for v in value]
    if len(values) != n:
        raise ConfigError(f"chain.{name} needs 1 or {n} values, got {len(values)}")
    return values


def _table(doc: dict, name: str) -> dict:
    section = doc.get(name, {})
    if not isinstance(section, dict):
        raise ConfigError(f"[{name}] must be a table")
    return dict(section)


def _reject_unknown(section: dict, known: set[str], where: str) -> None:
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"unknown keys in [{where}]: {sorted(unknown)}")


def _friction_from(table: dict, omega_s: float, where: str) -> FrictionParams:
    try:
        return FrictionParams(
            k_c=float(table["k_c"]),
            k_v=float(table["k_v"]),
            sigma_plus=float(table["sigma_plus"]),
            sigma_minus=float(table["sigma_minus"]),
            omega_s=omega_s,
        )
    except KeyError as exc:
        raise ConfigError(f"[{where}] is missing key {exc.args[0]!r}") from None


def _motor_from(table: dict, rho: float) -> MotorParams:
    return MotorParams(
        k_pwm_star=float(table.get("k_pwm_star", 0.0)),
        tau_0=float(table.get("tau_0", 0.0)),
        rho=rho,
    )


def load_config(path) -> RunConfig:
    """Parse and validate a run configuration file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with path.open("rb") as handle:
            doc = tomllib.load(handle)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None

    known_top = {"chain", "solve", "coupling", "simulate", "io"}
    _reject_unknown(doc, known_top, "top level")

    coupling = None
    coupling_tab = _table(doc, "coupling")
    if coupling_tab:
        _reject_unknown(coupling_tab, {"t"}, "coupling")
        if "t" not in coupling_tab:
            raise ConfigError("[coupling] requires key t (list of rows)")
        coupling = CouplingMatrix(coupling_tab["t"])
    n_motors = coupling.n if coupling is not None else 1

    chain_tab = _table(doc, "chain")
    _reject_unknown(
        chain_tab,
        {"inertia", "rho", "omega_s", "omega_dead", "model_kind", "constraint_side"},
        "chain",
    )
    omega_s = float(chain_tab.get("omega_s", 1.0))
    omega_dead = chain_tab.get("omega_dead")
    model_kind = str(chain_tab.get("model_kind", "stribeck"))
    if model_kind not in MODEL_KINDS:
        raise ConfigError(f"chain.model_kind must be one of {MODEL_KINDS}")
    constraint_side = str(chain_tab.get("constraint_side", "right"))
    inertias = _per_motor(chain_tab.get("inertia", 0.0), n_motors, "inertia")
    rhos = _per_motor(chain_tab.get("rho", 1.0), n_motors, "rho")

    solve_tab = _table(doc, "solve")
    _reject_unknown(
        solve_tab, {"cond_warn", "omega_block", "block_reject_fraction"}, "solve"
    )
    solve = SolveOptions(
        cond_warn=float(solve_tab.get("cond_warn", 1e6)),
        omega_block=float(solve_tab.get("omega_block", 0.1)),
        block_reject_fraction=float(solve_tab.get("block_reject_fraction", 0.05)),
    )

    try:
        chains = tuple(
            ChainConfig(
                inertia=InertiaParams(inertias[i]),
                rho=rhos[i],
                omega_s=omega_s,
                omega_dead=None if omega_dead is None else float(omega_dead),
                model_kind=model_kind,
                constraint_side=constraint_side,
                cond_warn=solve.cond_warn,
            )
            for i in range(n_motors)
        )
    except JointIdError as exc:
        raise ConfigError(f"[chain]: {exc}") from None

    simulate = None
    sim_tab = _table(doc, "simulate")
    if sim_tab:
        _reject_unknown(
            sim_tab,
            {"phase", "coupled", "active", "profile", "noise", "truth", "motors"},
            "simulate",
        )
        prof_tab = dict(sim_tab.get("profile", {}))
        _reject_unknown(
            prof_tab,
            {"kind", "amplitude", "frequency", "duration", "sample_rate"},
            "simulate.profile",
        )
        try:
            profile = ExcitationProfile(
                kind=str(prof_tab.get("kind", "sinusoid")),
                amplitude=float(prof_tab.get("amplitude", 50.0)),
                frequency=float(prof_tab.get("frequency", 0.2)),
                duration=float(prof_tab.get("duration", 60.0)),
                sample_rate=float(prof_tab.get("sample_rate", 100.0)),
            )
        except JointIdError as exc:
            raise ConfigError(f"[simulate.profile]: {exc}") from None
        noise_tab = dict(sim_tab.get("noise", {}))
        _reject_unknown(noise_tab, {"torque_std", "velocity_std", "seed"}, "simulate.noise")
        noise = NoiseSpec(
            torque_std=float(noise_tab.get("torque_std", 0.05)),
            velocity_std=float(noise_tab.get("velocity_std", 0.1)),
            seed=int(noise_tab.get("seed", 0)),
        )
        coupled = bool(sim_tab.get("coupled", False))
        phase = int(sim_tab.get("phase", 1))
        if phase not in (1, 2):
            raise ConfigError("simulate.phase must be 1 or 2")
        active = int(sim_tab.get("active", 0))
        if coupled:
            if coupling is None:
                raise ConfigError("simulate.coupled requires a [coupling] section")
            motor_tabs = sim_tab.get("motors")
            if not motor_tabs or len(motor_tabs) != n_motors:
                raise ConfigError(
                    f"coupled simulation needs {n_motors} [[simulate.motors]] tables"
                )
            if not 0 <= active < n_motors:
                raise ConfigError(f"simulate.active {active} out of range")
            truths = tuple(
                ActuatorChain(
                    friction=_friction_from(tab, omega_s, "simulate.motors"),
                    motor=_motor_from(tab, rhos[i]),
                    inertia=InertiaParams(inertias[i]),
                )
                for i, tab in enumerate(motor_tabs)
            )
        else:
            truth_tab = sim_tab.get("truth")
            if not truth_tab:
                raise ConfigError("simulation needs a [simulate.truth] table")
            if phase == 2 and "k_pwm_star" not in truth_tab:
                raise ConfigError("phase-2 simulation needs simulate.truth.k_pwm_star")
            truths = (
                ActuatorChain(
                    friction=_friction_from(truth_tab, omega_s, "simulate.truth"),
                    motor=_motor_from(truth_tab, rhos[0]),
                    inertia=InertiaParams(inertias[0]),
                ),
            )
        simulate = SimulateConfig(
            profile=profile,
            noise=noise,
            truths=truths,
            phase=phase,
            coupled=coupled,
            active=active,
        )

    io_tab = _table(doc, "io")
    _reject_unknown(
        io_tab, {"dataset", "phase2", "report", "curve", "out_dir"}, "io"
    )

    return RunConfig(
        chains=chains, coupling=coupling, simulate=simulate, solve=solve, io=io_tab
    )
