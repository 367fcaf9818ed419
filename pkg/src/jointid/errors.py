"""Exception and warning types shared across the package.

Every error carries a short ``category`` slug that the command-line surface
prints on stderr so callers can dispatch on failures without parsing prose.
"""


class JointIdError(Exception):
    """Base class for all errors raised by this package."""

    category = "error"


class DomainError(JointIdError, ValueError):
    """Invalid physical parameter or non-finite numeric input."""

    category = "domain-error"


class DataError(JointIdError, ValueError):
    """Dataset violates a structural invariant (time order, schema, ...)."""

    category = "data-error"


class DesignError(JointIdError, ValueError):
    """Regression system cannot be built or solved as posed."""

    category = "design-error"


class EmptyDesignError(DesignError):
    """No samples survived exclusion; nothing to fit."""

    category = "empty-design"


class RankDeficientError(DesignError):
    """Design matrix is rank deficient at tolerance."""

    category = "rank-error"


class ConstraintError(DesignError):
    """Equality constraints are infeasible, redundant, or unsatisfied."""

    category = "constraint-error"


class SingularMatrixError(JointIdError, ValueError):
    """Coupling matrix is singular or numerically near-singular."""

    category = "singular-coupling-matrix"


class BlockedMotorError(DataError):
    """Supposedly blocked sibling motors moved in too many samples."""

    category = "blocked-motor-violation"


class SimulationError(JointIdError, ValueError):
    """Generator cannot produce data for the requested scenario."""

    category = "simulation-error"


class ConfigError(JointIdError, ValueError):
    """Run configuration file is malformed or inconsistent."""

    category = "config-error"


class CoverageWarning(UserWarning):
    """Excitation does not span the recommended signal range."""


class ConditioningWarning(UserWarning):
    """Normal-equation condition number exceeds the alarm threshold."""


class DataWarning(UserWarning):
    """Rows were dropped or rejected while ingesting a dataset."""
