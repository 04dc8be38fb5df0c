"""Exception hierarchy shared across the package.

Everything derives from :class:`KnockoffError` so callers (and the CLI)
can distinguish numerical/infeasibility failures from ordinary bugs.
"""


class KnockoffError(Exception):
    """Base class for all package-specific errors."""


class RankDeficientError(KnockoffError):
    """A matrix that must have full column rank does not."""


class NotPositiveDefiniteError(KnockoffError):
    """A matrix required to be positive definite is not."""


class NumericalFailureError(KnockoffError):
    """An eigen/SVD/iterative routine failed to converge."""


class SdpFailureError(KnockoffError):
    """The semidefinite solve for the s-vector did not converge."""


class InfeasibleConstraintError(KnockoffError):
    """The requested s-vector bounds admit no feasible point."""


class InfeasibleSError(KnockoffError):
    """The supplied s-vector violates the knockoff feasibility condition."""


class InsufficientRowsError(KnockoffError):
    """The design has too few rows for the requested construction."""


class SingularGramError(KnockoffError):
    """A Gram block needed by a statistic is singular.

    ``block`` names the offending block.
    """

    def __init__(self, block: str, message: str | None = None):
        self.block = block
        super().__init__(message or f"singular Gram block: {block}")


class InvalidWeightError(KnockoffError):
    """A statistic weight vector has a nonpositive entry."""


class NoComplementError(KnockoffError):
    """Noise estimation requested but the model has no orthogonal complement (n <= 2p)."""


class PathFailureError(KnockoffError):
    """Coordinate descent failed to converge at some grid point.

    ``lambda_index`` is the index into the penalty grid.
    """

    def __init__(self, lambda_index: int, message: str | None = None):
        self.lambda_index = lambda_index
        super().__init__(message or f"coordinate descent did not converge at grid index {lambda_index}")


class EmptyInputError(KnockoffError):
    """An aggregation was requested over an empty collection."""


class RankDeficientGroupError(RankDeficientError):
    """A feature group is rank deficient.  ``group`` is its index."""

    def __init__(self, group: int, message: str | None = None):
        self.group = group
        super().__init__(message or f"group {group} is rank deficient")


class InvalidSpecError(KnockoffError):
    """A design/signal specification is out of its valid parameter region."""


class ZeroSAtSignalError(KnockoffError):
    """A signal index landed on a zero s entry; the caller should redraw the design."""
