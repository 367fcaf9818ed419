"""CSV dataset formats and atomic file writing.

Single-shaft files carry one sample per row under the header
``t,pwm,omega,omega_dot,tau`` (``omega_dot`` optional: it is rederived by
finite differences on load). Coupled files carry
``t,pwm_0..,omega_j_0..,tau_j_0..`` plus optional ``omega_m_0..`` motor
encoder channels; accelerations are never persisted for coupled data.

Units are fixed by the schema: s, PWM units, deg/s, deg/s^2, N*m. All floats
are written with shortest round-trip precision, so identical datasets produce
byte-identical files.
"""

from __future__ import annotations

import csv
import os
import re
import tempfile
import warnings
from pathlib import Path

import numpy as np

from .errors import DataError, DataWarning
from .model import CoupledDataset, Dataset
from .regression import derive_acceleration

__all__ = [
    "SINGLE_COLUMNS",
    "load_dataset",
    "save_dataset",
    "save_coupled_dataset",
    "atomic_write_text",
]

SINGLE_COLUMNS = ("t", "pwm", "omega", "omega_dot", "tau")


def _fmt(value: float) -> str:
    return repr(float(value))


def atomic_write_text(path, text: str) -> None:
    """Write a file via a temporary sibling and rename, never partially."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_dataset(data: Dataset, path) -> None:
    """Write a single-shaft dataset under the canonical header."""
    lines = [",".join(SINGLE_COLUMNS)]
    for i in range(len(data)):
        lines.append(
            ",".join(
                _fmt(col[i])
                for col in (data.t, data.pwm, data.omega, data.omega_dot, data.tau)
            )
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def _coupled_header(n: int, with_motor: bool) -> list[str]:
    names = ["t"]
    names += [f"pwm_{i}" for i in range(n)]
    names += [f"omega_j_{i}" for i in range(n)]
    names += [f"tau_j_{i}" for i in range(n)]
    if with_motor:
        names += [f"omega_m_{i}" for i in range(n)]
    return names


def save_coupled_dataset(data: CoupledDataset, path) -> None:
    """Write a coupled dataset; accelerations are not part of the format."""
    n = data.n
    with_motor = data.omega_m is not None
    blocks = [data.t[:, np.newaxis], data.pwm, data.omega_j, data.tau_j]
    if with_motor:
        blocks.append(data.omega_m)
    table = np.hstack(blocks)
    lines = [",".join(_coupled_header(n, with_motor))]
    for row in table:
        lines.append(",".join(_fmt(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def _indexed_group(header: list[str], prefix: str) -> list[int] | None:
    """Column positions of prefix_0..prefix_{n-1}, validated contiguous."""
    pattern = re.compile(rf"^{re.escape(prefix)}_(\d+)$")
    found: dict[int, int] = {}
    for pos, name in enumerate(header):
        match = pattern.match(name)
        if match:
            found[int(match.group(1))] = pos
    if not found:
        return None
    if sorted(found) != list(range(len(found))):
        raise DataError(f"channel indices for {prefix}_* must be contiguous from 0")
    return [found[i] for i in range(len(found))]


def _read_rows(path) -> tuple[list[str], np.ndarray, np.ndarray, int]:
    """Parse header and numeric body; non-finite rows are dropped and counted."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        header = [name.strip() for name in header]
        rows: list[list[float]] = []
        linenos: list[int] = []
        dropped = 0
        for lineno, raw in enumerate(reader, start=2):
            if not raw or (len(raw) == 1 and not raw[0].strip()):
                continue
            if len(raw) != len(header):
                raise DataError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(raw)}"
                )
            try:
                values = [float(v) for v in raw]
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
            if all(np.isfinite(values)):
                rows.append(values)
                linenos.append(lineno)
            else:
                dropped += 1
    if dropped:
        warnings.warn(
            f"{path}: dropped {dropped} rows with non-finite values",
            DataWarning,
            stacklevel=3,
        )
    if not rows:
        raise DataError(f"{path} contains no usable samples")
    return header, np.asarray(rows, dtype=float), np.asarray(linenos), dropped


def _check_monotone(path, t: np.ndarray, linenos: np.ndarray) -> None:
    steps = np.diff(t)
    if np.any(steps <= 0):
        bad = int(linenos[int(np.flatnonzero(steps <= 0)[0]) + 1])
        raise DataError(f"{path}: timestamps out of order at row {bad}")


def _estimate_rate(t: np.ndarray) -> float | None:
    if t.shape[0] < 2:
        return None
    return float(1.0 / np.median(np.diff(t)))


def load_dataset(path, schema: str = "auto") -> Dataset | CoupledDataset:
    """Load a dataset file, validating the header against the schema.

    ``schema`` is ``"single"``, ``"coupled"`` or ``"auto"`` (decide from the
    header). Rows with non-finite values are dropped and counted; a missing
    ``omega_dot`` column is rederived by finite differences and flagged.
    """
    if schema not in ("auto", "single", "coupled"):
        raise DataError(f"unknown schema {schema!r}")
    header, table, linenos, dropped = _read_rows(path)

    looks_coupled = _indexed_group(header, "omega_j") is not None
    kind = schema if schema != "auto" else ("coupled" if looks_coupled else "single")

    if kind == "single":
        required = {"t", "pwm", "omega", "tau"}
        missing = required - set(header)
        if missing:
            raise DataError(f"{path}: missing columns {sorted(missing)}")
        extras = set(header) - set(SINGLE_COLUMNS)
        if extras:
            raise DataError(f"{path}: unexpected columns {sorted(extras)}")
        col = {name: table[:, header.index(name)] for name in header}
        _check_monotone(path, col["t"], linenos)
        derived = "omega_dot" not in header
        omega_dot = (
            derive_acceleration(col["t"], col["omega"]) if derived else col["omega_dot"]
        )
        return Dataset(
            t=col["t"],
            pwm=col["pwm"],
            omega=col["omega"],
            omega_dot=omega_dot,
            tau=col["tau"],
            sample_rate=_estimate_rate(col["t"]),
            derived_acceleration=derived,
            dropped_rows=dropped,
        )

    if "t" not in header:
        raise DataError(f"{path}: missing column t")
    groups = {name: _indexed_group(header, name) for name in ("pwm", "omega_j", "tau_j")}
    missing = [name for name, cols in groups.items() if cols is None]
    if missing:
        raise DataError(f"{path}: missing channel groups {missing}")
    n = len(groups["omega_j"])
    for name, cols in groups.items():
        if len(cols) != n:
            raise DataError(f"{path}: {name}_* has {len(cols)} channels, expected {n}")
    motor_cols = _indexed_group(header, "omega_m")
    if motor_cols is not None and len(motor_cols) != n:
        raise DataError(f"{path}: omega_m_* has {len(motor_cols)} channels, expected {n}")
    t = table[:, header.index("t")]
    _check_monotone(path, t, linenos)
    return CoupledDataset(
        t=t,
        pwm=table[:, groups["pwm"]],
        omega_j=table[:, groups["omega_j"]],
        tau_j=table[:, groups["tau_j"]],
        omega_m=None if motor_cols is None else table[:, motor_cols],
        sample_rate=_estimate_rate(t),
        dropped_rows=dropped,
    )
