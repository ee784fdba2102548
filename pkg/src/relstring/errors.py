"""Exception taxonomy shared by all relstring modules."""


class RelstringError(Exception):
    """Base class for all package errors."""


class StructuralError(RelstringError):
    """Mismatched periods, dimensions, or malformed containers."""


class GaugeViolationError(RelstringError):
    """Data claimed to be in orthogonal gauge fails a gauge identity."""


class NotTimelikeError(RelstringError):
    """A velocity field reaches or exceeds the speed of light."""


class ClosureError(RelstringError):
    """Tangent data does not integrate to a closed curve."""


class RegularityError(RelstringError):
    """Operation requires an immersed (nowhere-degenerate) curve."""


class GeneratorError(RelstringError):
    """Random-data generator exhausted its retry budget."""


class AtSingularityError(RelstringError):
    """A pointwise quantity is undefined at a singular point."""


class UndefinedQError(RelstringError):
    """Reparametrization invariant Q is undefined where gamma_s = 0."""


class CharacteristicCrossingError(RelstringError):
    """Gauge characteristics crossed; the grid is under-resolved."""


class InternalConsistencyError(RelstringError):
    """A guaranteed property failed numerically (resolution failure)."""


class InvalidEventError(RelstringError):
    """A claimed singular event does not satisfy its defining equation."""


class PreconditionError(RelstringError):
    """Operation called on an event or data of the wrong kind."""


class UnclassifiedDegenerateError(RelstringError):
    """All local-model coefficients vanish below threshold."""


class StepSizeError(RelstringError):
    """Finite-difference evolution went unstable."""


class GeometryError(RelstringError):
    """Degenerate or infeasible geometric specification."""
