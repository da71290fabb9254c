"""Exception hierarchy shared by all modules."""


class HamsimError(Exception):
    """Base class for all errors raised by hamsim."""


class DimensionError(HamsimError, ValueError):
    """Operands act on different numbers of qubits or have incompatible shapes."""


class CapacityError(HamsimError):
    """The requested computation exceeds the dense/enumeration size guard."""


class DegenerateInputError(HamsimError, ValueError):
    """Input is structurally valid but degenerate (e.g. all-zero coefficients)."""


class ChannelIntegrityError(HamsimError):
    """A state or channel violates positivity / trace preservation beyond tolerance."""


class NonInvertibleError(HamsimError):
    """A noise channel has a vanishing Pauli-transfer eigenvalue."""


class InfeasibleSegmentationError(HamsimError, ValueError):
    """SNI segmentation leaves a segment with error probability >= 1/2."""

    def __init__(self, message, minimal_segments=None):
        super().__init__(message)
        self.minimal_segments = minimal_segments


class SpecError(HamsimError, ValueError):
    """An experiment spec file failed to parse or validate."""

    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.line = line
        self.field = field
