"""Exception types shared across the package.

The CLI maps these onto process exit codes (see cli.py): invalid
arguments -> 2, data/parse problems -> 3, numeric failures -> 4,
stalled construction -> 5.
"""


class InvalidArgumentError(ValueError):
    """A caller violated an operation's precondition."""


class DataError(ValueError):
    """A data file or dataset is malformed or unusable."""


class DegenerateTargetError(DataError):
    """Target sequence has zero variance; NRMSE is undefined."""


class NumericFailure(RuntimeError):
    """An iterative numeric routine did not converge.

    Carries the best estimate so callers can decide whether to proceed.
    """

    def __init__(self, message, best_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate


class ConstructionStalled(RuntimeError):
    """No candidate passed the supervisory test after exhausting anneals."""
