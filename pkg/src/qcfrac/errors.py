"""Exception hierarchy for q-series and continued-fraction evaluation.

Every numerical degeneracy (vanishing denominator factor, divergent
series, lost minimality) is raised loudly instead of letting NaN/Inf
propagate into identity checks.
"""


class QSeriesError(Exception):
    """Base class for all evaluation errors in this package."""


class BalanceViolated(QSeriesError):
    """Parameter product fails the balance constraint beyond tolerance."""


class ZeroDenominator(QSeriesError):
    """A denominator Pochhammer factor vanishes before termination."""


class Divergent(QSeriesError):
    """A nonterminating series or product fails its convergence condition."""


class MaxTermsExceeded(QSeriesError):
    """Truncation tolerance not reached within the term budget."""


class DegenerateParameters(QSeriesError):
    """Parameters sit on a measure-zero degeneracy (vanishing pivot factor)."""


class MinimalityLost(QSeriesError):
    """Cancellation destroyed the minimal-solution combination.

    Signals that the working precision is insufficient at this point.
    """


class ZeroPivot(QSeriesError):
    """A continued-fraction convergent denominator vanishes exactly."""

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"zero pivot at continued-fraction index {index}")


class NonConvergent(QSeriesError):
    """Continued-fraction convergents oscillate at maximum depth."""


class ConfigError(QSeriesError):
    """Malformed check specification or CLI configuration."""


class EmptyRegion(QSeriesError):
    """Parameter sampler exhausted its rejection budget."""
