"""Exception hierarchy shared across the package."""

from __future__ import annotations


class NashreduceError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(NashreduceError):
    """A file or JSON document could not be parsed or failed validation."""


class ParameterError(NashreduceError):
    """A numeric or structural parameter is outside its allowed range."""


class DegenerateGame(NashreduceError):
    """The game is too degenerate for the requested operation."""


class DimensionMismatch(NashreduceError):
    """Vector or matrix dimensions do not agree."""


class SizeBudgetExceeded(NashreduceError):
    """The requested construction would exceed the configured size budget."""


class DuplicateOutput(NashreduceError):
    """Two gadgets were asked to drive the same output player."""


class CycleDetected(NashreduceError):
    """Gadget wiring is cyclic, so no evaluation order exists."""


class CapExceeded(NashreduceError):
    """An enumeration exceeded its configured cap before finishing."""


class ZeroBlockMass(NashreduceError):
    """A follower block carries zero probability, so it cannot be renormalized."""

    def __init__(self, block: int):
        self.block = block
        super().__init__(f"block {block} has zero probability mass; cannot renormalize")


class NoEquilibriumFound(NashreduceError):
    """An exact solver exhausted its search space without finding an equilibrium."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        self.diagnostics = dict(diagnostics or {})
        super().__init__(message)
