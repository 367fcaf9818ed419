"""Design-matrix construction and linear least-squares solving.

The identification problems all reduce to over-constrained linear systems
``X theta = y``. For the friction fits the target is the measured torque
corrected for the inertial term,

    y_i = tau_i + i_reflected * omega_dot_i

and the solution vector stores the negated physical coefficients, e.g.
``theta = (-k_c, -k_v)`` for the Coulomb/viscous model, so that ``X @ theta``
evaluates the signed friction torque directly. Fit results expose the
positive physical parameters; the per-design sign map handles the flip.

Solvers use an orthogonal (SVD) factorization rather than forming the
normal-equation pseudo-inverse, but the condition number of ``X.T @ X`` is
still computed and reported because that is the quantity the conditioning
argument is about.

Samples inside the stick deadband (``|omega| <= omega_dead``, and always
``omega == 0``) never enter a design: the static friction models are not
defined at zero relative velocity.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConditioningWarning,
    ConstraintError,
    CoverageWarning,
    DomainError,
    EmptyDesignError,
    RankDeficientError,
)
from .model import Dataset, FrictionParams, InertiaParams, friction_torque

__all__ = [
    "DesignSystem",
    "FitResult",
    "build_cv_design",
    "build_stribeck_design",
    "build_pwm_design",
    "stribeck_regressors",
    "solve_lsq",
    "solve_constrained_lsq",
    "condition_number",
    "zero_slope_constraint",
    "derive_acceleration",
    "COND_WARN_DEFAULT",
]

#: alarm threshold for cond(X.T @ X); heuristic, reported fits are not rejected
COND_WARN_DEFAULT = 1e6

CV_LABELS = ("k_c", "k_v")
STRIBECK_LABELS = ("k_c", "k_v", "sigma_plus", "sigma_minus")
PWM_LABELS = ("tau_0", "k_pwm_star")


@dataclass(frozen=True)
class DesignSystem:
    """Regressor matrix, target vector and parameter bookkeeping for one fit."""

    x: np.ndarray  # (m, p)
    y: np.ndarray  # (m,)
    labels: tuple[str, ...]  # physical parameter names, canonical order
    theta_sign: np.ndarray | None = None  # physical = theta_sign * raw
    excluded_count: int = 0

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
            raise DomainError(f"inconsistent design shapes {x.shape} / {y.shape}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DomainError("design contains non-finite entries")
        if len(self.labels) != x.shape[1]:
            raise DomainError("one label per design column required")
        sign = self.theta_sign
        sign = np.ones(x.shape[1]) if sign is None else np.asarray(sign, dtype=float)
        if sign.shape != (x.shape[1],) or not np.all(np.isin(sign, (-1.0, 1.0))):
            raise DomainError("theta_sign must be a vector of +/-1 per column")
        for name, arr in (("x", x), ("y", y), ("theta_sign", sign)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def sample_count(self) -> int:
        return int(self.y.shape[0])


@dataclass(frozen=True)
class FitResult:
    """Estimated physical parameters with residual and conditioning diagnostics."""

    theta: np.ndarray  # physical parameters, order given by labels
    labels: tuple[str, ...]
    residual_rms: float  # N*m
    condition_number: float  # cond(X.T @ X)
    rank_ok: bool
    sample_count: int
    excluded_count: int

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta, dtype=float)
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "labels", tuple(self.labels))

    def __getitem__(self, label: str) -> float:
        return float(self.theta[self.labels.index(label)])


def _retained_mask(omega: np.ndarray, omega_dead: float) -> np.ndarray:
    if omega_dead < 0:
        raise DomainError(f"omega_dead must be >= 0, got {omega_dead}")
    return np.abs(omega) > omega_dead


def _friction_target(data: Dataset, inertia: InertiaParams, keep: np.ndarray) -> np.ndarray:
    return data.tau[keep] + inertia.i_reflected * data.omega_dot[keep]


def _warn_sign_coverage(omega: np.ndarray, what: str) -> None:
    if not (np.any(omega > 0) and np.any(omega < 0)):
        warnings.warn(
            f"{what} spans only one sign; the fit is extrapolating on the other side",
            CoverageWarning,
            stacklevel=3,
        )


def build_cv_design(
    data: Dataset, inertia: InertiaParams, *, omega_dead: float = 0.0
) -> DesignSystem:
    """Coulomb/viscous design: rows ``[sign(omega), omega]``.

    The raw solution pairs with ``(-k_c, -k_v)``; the fit result reports the
    positive coefficients.
    """
    keep = _retained_mask(data.omega, omega_dead)
    if not np.any(keep):
        raise EmptyDesignError("all samples fall inside the stick deadband")
    omega = data.omega[keep]
    _warn_sign_coverage(omega, "velocity excitation")
    x = np.column_stack([np.sign(omega), omega])
    return DesignSystem(
        x=x,
        y=_friction_target(data, inertia, keep),
        labels=CV_LABELS,
        theta_sign=np.array([-1.0, -1.0]),
        excluded_count=int(np.count_nonzero(~keep)),
    )


def stribeck_regressors(omega, omega_s) -> np.ndarray:
    """Regressor columns of the breakaway friction model, one row per velocity.

    .. code-block:: text

        col 0 (-k_c):         sign(w) * (1 - exp(-|w|/omega_s))
        col 1 (-k_v):         w
        col 2 (-sigma_plus):  exp(-w/omega_s)   for w > 0, else 0
        col 3 (-sigma_minus): -exp(+w/omega_s)  for w < 0, else 0

    Dotted with the negated physical parameters this reproduces the signed
    friction torque exactly at every nonzero velocity. ``omega_s`` may be a
    scalar or broadcast against ``omega``.
    """
    w = np.asarray(omega, dtype=float)
    ws = np.asarray(omega_s, dtype=float)
    if np.any(ws <= 0):
        raise DomainError("omega_s must be > 0")
    decay = np.exp(-np.abs(w) / ws)
    pos = w > 0
    neg = w < 0
    return np.column_stack(
        [
            np.sign(w) * (1.0 - decay),
            w,
            np.where(pos, decay, 0.0),
            np.where(neg, -decay, 0.0),
        ]
    )


def build_stribeck_design(
    data: Dataset,
    inertia: InertiaParams,
    omega_s: float,
    *,
    omega_dead: float = 0.0,
) -> DesignSystem:
    """Breakaway (Stribeck) friction design with columns from ``stribeck_regressors``."""
    keep = _retained_mask(data.omega, omega_dead)
    if not np.any(keep):
        raise EmptyDesignError("all samples fall inside the stick deadband")
    omega = data.omega[keep]
    _warn_sign_coverage(omega, "velocity excitation")
    return DesignSystem(
        x=stribeck_regressors(omega, omega_s),
        y=_friction_target(data, inertia, keep),
        labels=STRIBECK_LABELS,
        theta_sign=np.array([-1.0, -1.0, -1.0, -1.0]),
        excluded_count=int(np.count_nonzero(~keep)),
    )


def build_pwm_design(
    data: Dataset,
    friction: FrictionParams,
    inertia: InertiaParams,
    *,
    omega_dead: float = 0.0,
) -> DesignSystem:
    """Motor-model design: rows ``[1, pwm]`` against friction-corrected torque.

    Subtracting the full signed friction model from the inertia-corrected
    torque leaves ``tau_0 + k_pwm_star * pwm``, so the raw solution is already
    the physical ``(tau_0, k_pwm_star)`` pair.
    """
    keep = _retained_mask(data.omega, omega_dead)
    if not np.any(keep):
        raise EmptyDesignError("all samples fall inside the stick deadband")
    pwm = data.pwm[keep]
    if not (np.any(pwm > 0) and np.any(pwm < 0)):
        warnings.warn(
            "PWM excitation spans only one sign; offset and gain may correlate",
            CoverageWarning,
            stacklevel=2,
        )
    y = _friction_target(data, inertia, keep) - friction_torque(friction, data.omega[keep])
    x = np.column_stack([np.ones(pwm.shape[0]), pwm])
    return DesignSystem(
        x=x,
        y=y,
        labels=PWM_LABELS,
        theta_sign=np.array([1.0, 1.0]),
        excluded_count=int(np.count_nonzero(~keep)),
    )


def _rank_tolerance(singular_values: np.ndarray, m: int, p: int) -> float:
    return float(singular_values[0]) * max(m, p) * np.finfo(float).eps


def _dependent_columns(vt: np.ndarray, rank: int, labels: tuple[str, ...]) -> list[str]:
    null_space = vt[rank:]
    if null_space.size == 0:
        return []
    weight = np.max(np.abs(null_space), axis=0)
    involved = weight >= max(0.1 * float(weight.max()), 1e-12)
    return [labels[i] for i in np.flatnonzero(involved)]


def condition_number(x) -> float:
    """2-norm condition number of ``X.T @ X`` (the squared ratio of X's singular values).

    Returns ``inf`` for a singular matrix instead of raising.
    """
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise EmptyDesignError("cannot condition an empty matrix")
    sv = np.linalg.svd(x, compute_uv=False)
    tol = _rank_tolerance(sv, *x.shape) if sv[0] > 0 else 0.0
    if sv[0] == 0.0 or sv[-1] <= tol:
        return float("inf")
    return float((sv[0] / sv[-1]) ** 2)


def solve_lsq(system: DesignSystem, *, cond_warn: float = COND_WARN_DEFAULT) -> FitResult:
    """Minimize ``||X theta - y||`` by SVD and report physical parameters.

    Numerically equivalent to the normal-equation pseudo-inverse solution but
    without squaring the conditioning. Raises :class:`RankDeficientError`
    naming the dependent columns when X loses column rank at tolerance.
    """
    x, y = system.x, system.y
    m, p = x.shape
    if m < p:
        raise RankDeficientError(f"{m} samples cannot determine {p} parameters")
    u, sv, vt = np.linalg.svd(x, full_matrices=False)
    tol = _rank_tolerance(sv, m, p)
    rank = int(np.count_nonzero(sv > tol))
    if rank < p:
        cols = _dependent_columns(vt, rank, system.labels)
        raise RankDeficientError(
            f"design is rank deficient (rank {rank} of {p}); "
            f"dependent columns: {', '.join(cols)}"
        )
    cond = float((sv[0] / sv[-1]) ** 2)
    if cond > cond_warn:
        warnings.warn(
            f"cond(X.T X) = {cond:.3e} exceeds {cond_warn:.1e}",
            ConditioningWarning,
            stacklevel=2,
        )
    theta_raw = vt.T @ ((u.T @ y) / sv)
    residual = x @ theta_raw - y
    return FitResult(
        theta=system.theta_sign * theta_raw,
        labels=system.labels,
        residual_rms=float(np.sqrt(np.mean(residual**2))),
        condition_number=cond,
        rank_ok=True,
        sample_count=system.sample_count,
        excluded_count=system.excluded_count,
    )


#: constrained solutions must satisfy the constraints to this absolute level
CONSTRAINT_TOL = 1e-10


def solve_constrained_lsq(
    system: DesignSystem,
    a,
    b,
    *,
    cond_warn: float = COND_WARN_DEFAULT,
) -> FitResult:
    """Minimize ``||X theta - y||`` subject to ``A theta_physical = b``.

    Constraints are expressed over the physical parameters (the order given
    by ``system.labels``) and eliminated through the null space of ``A``; the
    returned parameters satisfy them to ``CONSTRAINT_TOL`` absolute. An empty
    constraint set reduces to :func:`solve_lsq`.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    x, y = system.x, system.y
    m, p = x.shape
    if a.size == 0:
        return solve_lsq(system, cond_warn=cond_warn)
    q = a.shape[0]
    if a.shape[1] != p or b.shape != (q,):
        raise ConstraintError(f"constraint shapes {a.shape}/{b.shape} do not match p={p}")
    if q >= p:
        raise ConstraintError(f"{q} constraints leave no freedom for {p} parameters")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ConstraintError("constraints contain non-finite entries")

    # constraints are posed over physical parameters; flip into raw-theta space
    a_raw = a * system.theta_sign[np.newaxis, :]
    ua, sa, vat = np.linalg.svd(a_raw, full_matrices=True)
    tol_a = _rank_tolerance(sa, q, p) if sa[0] > 0 else 0.0
    rank_a = int(np.count_nonzero(sa > tol_a))
    theta_part = vat[:rank_a].T @ ((ua[:, :rank_a].T @ b) / sa[:rank_a])
    if rank_a < q:
        gap = float(np.max(np.abs(a_raw @ theta_part - b)))
        kind = "infeasible" if gap > CONSTRAINT_TOL else "redundant"
        raise ConstraintError(f"constraint system is {kind} (rank {rank_a} of {q})")

    z = vat[rank_a:].T  # (p, p - q) null-space basis of A
    xz = x @ z
    if m < xz.shape[1]:
        raise RankDeficientError("not enough samples for the constrained fit")
    uz, sz, vzt = np.linalg.svd(xz, full_matrices=False)
    tol_z = _rank_tolerance(sz, *xz.shape) if sz[0] > 0 else 0.0
    if sz.size and (sz[0] == 0.0 or sz[-1] <= tol_z):
        raise RankDeficientError("stacked [X; A] system is rank deficient")
    w = vzt.T @ ((uz.T @ (y - x @ theta_part)) / sz)
    theta_raw = theta_part + z @ w

    gap = float(np.max(np.abs(a_raw @ theta_raw - b)))
    if gap > CONSTRAINT_TOL:
        raise ConstraintError(f"constraint residual {gap:.3e} exceeds {CONSTRAINT_TOL:g}")

    cond = condition_number(x)
    if cond > cond_warn:
        warnings.warn(
            f"cond(X.T X) = {cond:.3e} exceeds {cond_warn:.1e}",
            ConditioningWarning,
            stacklevel=2,
        )
    residual = x @ theta_raw - y
    return FitResult(
        theta=system.theta_sign * theta_raw,
        labels=system.labels,
        residual_rms=float(np.sqrt(np.mean(residual**2))),
        condition_number=cond,
        rank_ok=True,
        sample_count=system.sample_count,
        excluded_count=system.excluded_count,
    )


def zero_slope_constraint(omega_s: float, side: str = "right") -> tuple[np.ndarray, np.ndarray]:
    """Constraint rows forcing a flat friction magnitude at breakaway.

    The magnitude of the breakaway model approaching rest from above is
    ``k_c + (sigma_plus - k_c)*exp(-w/omega_s) + k_v*w`` whose right
    derivative at zero vanishes iff ``k_c/omega_s + k_v - sigma_plus/omega_s = 0``;
    symmetrically for the left side with ``sigma_minus``. Rows act on the
    physical parameter order ``(k_c, k_v, sigma_plus, sigma_minus)``.

    ``side`` is ``"right"``, ``"left"`` or ``"both"``.
    """
    if omega_s <= 0:
        raise DomainError(f"omega_s must be > 0, got {omega_s}")
    right = [1.0 / omega_s, 1.0, -1.0 / omega_s, 0.0]
    left = [1.0 / omega_s, 1.0, 0.0, -1.0 / omega_s]
    rows = {"right": [right], "left": [left], "both": [right, left]}.get(side)
    if rows is None:
        raise DomainError(f"side must be right, left or both, got {side!r}")
    a = np.array(rows)
    return a, np.zeros(a.shape[0])


def _moving_average(values: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average; windows shrink symmetrically at the edges."""
    if window <= 1:
        return values
    n = values.shape[0]
    idx = np.arange(n)
    half = np.minimum(np.minimum(window // 2, idx), n - 1 - idx)
    padded = np.concatenate([np.zeros(1), np.cumsum(values)])
    lo = idx - half
    hi = idx + half + 1
    return (padded[hi] - padded[lo]) / (hi - lo)


def derive_acceleration(t, omega, *, smooth_window: int = 5) -> np.ndarray:
    """Angular acceleration by central finite differences of the velocity.

    The velocity is pre-smoothed with a centered moving average
    (``smooth_window`` samples, odd) before differencing; endpoints use
    one-sided differences.
    """
    t = np.asarray(t, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if t.shape != omega.shape or t.ndim != 1:
        raise DomainError("t and omega must be equal-length vectors")
    if smooth_window < 1 or smooth_window % 2 == 0:
        raise DomainError(f"smooth_window must be odd and >= 1, got {smooth_window}")
    n = t.shape[0]
    if n < 2:
        raise DomainError("need at least two samples to differentiate")
    smoothed = _moving_average(omega, smooth_window)
    out = np.empty(n)
    out[1:-1] = (smoothed[2:] - smoothed[:-2]) / (t[2:] - t[:-2])
    out[0] = (smoothed[1] - smoothed[0]) / (t[1] - t[0])
    out[-1] = (smoothed[-1] - smoothed[-2]) / (t[-1] - t[-2])
    return out
