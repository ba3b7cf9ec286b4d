"""Exception types raised by the simulator."""


class PdlSimError(Exception):
    """Base class for all simulator errors."""


class InvalidParameter(PdlSimError, ValueError):
    """A physical parameter is outside its valid range."""


class CutoffExceeded(PdlSimError, ValueError):
    """An occupation number does not fit under the mode's Fock cutoff."""


class DegenerateState(PdlSimError, ValueError):
    """An amplitude vector has zero norm and cannot be normalized."""


class ModeExists(PdlSimError, KeyError):
    """A mode label is already present in the registry."""


class UnknownMode(PdlSimError, KeyError):
    """A mode label is not present in the registry."""


class ZeroProbabilityEvent(PdlSimError, ArithmeticError):
    """Conditioning on an event whose probability is numerically zero."""


class DivergentThermalMean(PdlSimError, ArithmeticError):
    """Dark counts with unit efficiency make the thermal mean occupation infinite."""


class InvalidState(PdlSimError, ValueError):
    """A density operator violates Hermiticity, positivity or trace bounds."""
