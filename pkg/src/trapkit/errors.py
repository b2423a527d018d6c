"""Exception types shared across the package."""


class TrapkitError(Exception):
    """Base class for all package errors."""


class CapExceeded(TrapkitError):
    """An exhaustive computation would exceed its configured size cap."""


class StateTooLarge(CapExceeded):
    """A dense statevector would exceed the qubit cap."""


class NotClifford(TrapkitError):
    """A pattern or preparation falls outside the stabiliser formalism."""


class ProtocolOrderViolation(TrapkitError):
    """A protocol machine received a message out of order."""


class UnknownVertex(TrapkitError):
    """A message referred to a vertex that is not in the graph."""


class NotIndependent(TrapkitError):
    """A vertex set that must be independent contains an edge."""


class EmptySet(TrapkitError):
    """An operation that needs a non-empty vertex set got an empty one."""


class InvalidSign(TrapkitError):
    """A signed Pauli word squares to -I and has no +1 eigenstate."""


class DoesNotFit(TrapkitError):
    """A computation does not fit into the free region of a canvas."""


class NotBlindCompatible(TrapkitError):
    """Canvases or schemes do not share graph, outputs and order."""


class BadParams(TrapkitError):
    """Compiler parameters violate their invariants."""


class Inadmissible(TrapkitError):
    """Bound parameters violate a strict admissibility inequality."""

    def __init__(self, inequality: str):
        super().__init__(f"inadmissible parameters: {inequality} does not hold")
        self.inequality = inequality


class EmptyErrors(TrapkitError):
    """An LP relation was requested with no errors."""


class EmbeddingFailed(TrapkitError):
    """A computation could not be embedded into the sampled canvas."""
