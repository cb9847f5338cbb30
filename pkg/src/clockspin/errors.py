"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """Input violates a documented precondition (CLI exit code 2)."""


class ResourceLimitError(RuntimeError):
    """Problem size exceeds a hard resource cap (CLI exit code 3)."""


class DegenerateLatticeError(InvalidArgumentError):
    """Lattice construction produced no sites."""


class OutOfSupportError(InvalidArgumentError):
    """Evaluation point lies outside the region where the field is defined."""


class IncompletePlaquetteError(InvalidArgumentError):
    """A plaquette is missing one or more corner sites."""


class InvalidLoopError(InvalidArgumentError):
    """Site loop is not closed or has non-adjacent consecutive sites."""


class ChargeResidueError(RuntimeError):
    """Winding sum failed to land on an integer multiple of 2*pi.

    Signals a phase-extraction bug rather than data noise, hence not an
    InvalidArgumentError.
    """
