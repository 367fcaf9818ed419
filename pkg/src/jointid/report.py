"""Identification report serialization.

Reports are written as TOML documents so they stay both machine-parseable and
readable. Floats use shortest round-trip precision: rerunning the same
pipeline with the same seed reproduces the file byte for byte. The parameter
block keys (``k_c``, ``k_v``, ``sigma_plus``, ``sigma_minus``, ``k_pwm_star``,
``tau_0``) are part of the tool's external contract.
"""

from __future__ import annotations

from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .datafiles import atomic_write_text
from .errors import DataError
from .identify import IdentificationReport
from .regression import FitResult

__all__ = [
    "render_report",
    "write_report",
    "read_report",
    "format_report_text",
    "write_fitted_curve",
]


def _value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, int):
        return repr(v)
    return '"' + str(v).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _fit_lines(name: str, fit: FitResult) -> list[str]:
    return [
        f"[{name}.fit]",
        f"residual_rms = {_value(fit.residual_rms)}",
        f"condition_number = {_value(fit.condition_number)}",
        f"rank_ok = {_value(fit.rank_ok)}",
        f"sample_count = {_value(fit.sample_count)}",
        f"excluded_count = {_value(fit.excluded_count)}",
        "",
    ]


def render_report(report: IdentificationReport, *, model_kind: str) -> str:
    """Serialize a report to TOML text."""
    p = report.friction.params
    lines = [
        "[friction]",
        f"model_kind = {_value(model_kind)}",
        f"k_c = {_value(p.k_c)}",
        f"k_v = {_value(p.k_v)}",
        f"sigma_plus = {_value(p.sigma_plus)}",
        f"sigma_minus = {_value(p.sigma_minus)}",
        f"omega_s = {_value(p.omega_s)}",
        f"physical = {_value(report.friction.physical)}",
        "",
    ]
    lines += _fit_lines("friction", report.friction.fit)
    if report.motor is not None:
        m = report.motor.params
        lines += [
            "[motor]",
            f"k_pwm_star = {_value(m.k_pwm_star)}",
            f"tau_0 = {_value(m.tau_0)}",
            f"rho = {_value(m.rho)}",
            "",
        ]
        lines += _fit_lines("motor", report.motor.fit)
    if report.blocked_rejected:
        lines += [
            "[coupled]",
            f"blocked_rejected = {_value(report.blocked_rejected)}",
            "",
        ]
    return "\n".join(lines)


def write_report(path, report: IdentificationReport, *, model_kind: str) -> None:
    atomic_write_text(path, render_report(report, model_kind=model_kind))


def read_report(path) -> dict:
    """Parse a stored report back into nested dictionaries."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"report file not found: {path}")
    try:
        with path.open("rb") as handle:
            doc = tomllib.load(handle)
    except tomllib.TOMLDecodeError as exc:
        raise DataError(f"{path}: {exc}") from None
    if "friction" not in doc:
        raise DataError(f"{path}: not an identification report (no [friction] table)")
    return doc


def format_report_text(doc: dict) -> str:
    """Human-readable rendering of a parsed report."""
    out = []
    friction = doc["friction"]
    out.append(f"friction model: {friction.get('model_kind', '?')}")
    for key in ("k_c", "k_v", "sigma_plus", "sigma_minus", "omega_s"):
        if key in friction:
            out.append(f"  {key:<12} = {friction[key]:.6g}")
    out.append(f"  physical     = {friction.get('physical')}")
    for section in ("friction", "motor"):
        fit = doc.get(section, {}).get("fit")
        if not fit:
            continue
        out.append(f"{section} fit diagnostics:")
        out.append(f"  residual_rms     = {fit['residual_rms']:.6g} N*m")
        out.append(f"  condition_number = {fit['condition_number']:.6g}")
        out.append(
            f"  samples          = {fit['sample_count']} used, "
            f"{fit['excluded_count']} excluded"
        )
        out.append(f"  rank_ok          = {fit['rank_ok']}")
    motor = doc.get("motor")
    if motor:
        out.append("motor model:")
        for key in ("k_pwm_star", "tau_0", "rho"):
            if key in motor and key != "fit":
                out.append(f"  {key:<12} = {motor[key]:.6g}")
    coupled = doc.get("coupled")
    if coupled:
        out.append(f"blocked-motor samples rejected: {coupled.get('blocked_rejected')}")
    return "\n".join(out)


def write_fitted_curve(path, omega, tau_model, tau_measured) -> None:
    """Write the (omega, tau_model, tau_measured) plotting contract CSV."""
    lines = ["omega,tau_model,tau_measured"]
    for w, tm, ts in zip(omega, tau_model, tau_measured):
        lines.append(f"{float(w)!r},{float(tm)!r},{float(ts)!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")
