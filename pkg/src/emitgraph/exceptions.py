"""Exception hierarchy shared by all emitgraph modules."""


class EmitGraphError(Exception):
    """Base class for every error raised by this package."""


class InvalidSizeError(EmitGraphError, ValueError):
    pass


class QubitIndexError(EmitGraphError, IndexError):
    pass


class UnsupportedGateError(EmitGraphError, ValueError):
    pass


class ParameterError(EmitGraphError, ValueError):
    """A probability or threshold lies outside its admissible range."""


class CapacityError(EmitGraphError, ValueError):
    """A request exceeds a configured size cap (dense backend, exhaustive search)."""


class DegenerateMeasurementError(EmitGraphError, ValueError):
    pass


class ConversionMismatchError(EmitGraphError, ValueError):
    """A reconstructed state does not reproduce its source state."""


class CircuitError(EmitGraphError, ValueError):
    """Invalid circuit edit: bad location, register mismatch, or cycle."""


class QasmParseError(EmitGraphError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)


class NoiseModelError(EmitGraphError, ValueError):
    pass


class BackendUnsupportedError(EmitGraphError, ValueError):
    """The selected backend cannot represent the requested channel or operation."""


class ValidationError(EmitGraphError, ValueError):
    """A circuit violates the physical emitter/photon constraints."""


class PipelineError(EmitGraphError, RuntimeError):
    """Error raised inside a multi-stage solver pipeline, tagged with the stage."""

    def __init__(self, stage, message):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


class MetricUnavailableError(EmitGraphError, ValueError):
    """The requested metric cannot be computed for the given state backend."""
