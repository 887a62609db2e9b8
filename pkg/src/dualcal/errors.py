"""Exception types shared across the toolkit."""


class CalibrationError(Exception):
    """Base class for all toolkit-specific failures."""


class StructureError(CalibrationError):
    """Input matrix/vector does not have the required structure."""


class NearPiRotationError(CalibrationError):
    """Rotation angle too close to pi for a stable logarithm."""


class RankDeficientError(CalibrationError):
    """Linear system is rank deficient (undamped solve only)."""

    def __init__(self, rank, needed):
        self.rank = rank
        self.needed = needed
        super().__init__(f"system is rank deficient: numeric rank {rank} < {needed}")


class EigenConvergenceError(CalibrationError):
    """Symmetric eigensolver failed to converge."""

    def __init__(self, iterations):
        self.iterations = iterations
        super().__init__(f"eigendecomposition did not converge after {iterations} iterations")


class InfeasibleSamplingError(CalibrationError):
    """Rejection sampling could not satisfy the validity rules."""


class DegenerateSolutionError(CalibrationError):
    """SDP solution has no usable dominant eigenpair."""


class ValidationError(CalibrationError):
    """A file or field failed schema validation."""
