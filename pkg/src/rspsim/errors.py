"""Exception types shared across the package."""


class SimulationError(Exception):
    """Base class for every error raised by rspsim."""


class ShapeError(SimulationError):
    """Operands have incompatible dimensions."""


class InvalidState(SimulationError):
    """A vector or parameter set violates a normalization or domain constraint."""


class CapacityExceeded(SimulationError):
    """Requested register or matrix would exceed the configured size cap."""


class NonUnitaryGate(SimulationError):
    """A gate failed a unitarity check in strict mode."""


class DegenerateState(SimulationError):
    """Measurement attempted on a register with no probability mass."""


class IndexOutOfRange(SimulationError):
    """Basis index outside its subsystem dimension."""


class MismatchedOutcomeSpace(SimulationError):
    """Two branch distributions do not share the same outcome space."""


class Unsupported(SimulationError):
    """Requested protocol mode or dimension combination is not available."""
