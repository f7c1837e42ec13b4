"""Exception hierarchy shared across the package."""


class SwarmsaError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigurationError(SwarmsaError):
    """Bad or inconsistent configuration; message names the offending key."""

    exit_code = 2


class InvalidPoseError(SwarmsaError):
    """A drone pose violates rendering preconditions (e.g. below canopy)."""

    exit_code = 3


class DimensionError(SwarmsaError):
    """Mismatched raster/vector dimensions between pipeline stages."""

    exit_code = 3


class ProjectionError(SwarmsaError):
    """Degenerate focal-plane geometry (ray parallel to plane)."""

    exit_code = 3


class PackingTableError(SwarmsaError):
    """Requested drone count outside the supported circle-packing table."""

    exit_code = 3


class ConstraintError(SwarmsaError):
    """Minimum-separation enforcement failed to converge."""

    exit_code = 3


class RunAbortedError(SwarmsaError):
    """A module error occurred mid-run; carries the iteration index."""

    exit_code = 4

    def __init__(self, iteration, cause):
        super().__init__(f"iteration {iteration}: {cause}")
        self.iteration = iteration
        self.cause = cause
