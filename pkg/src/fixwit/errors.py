"""Exception types shared across the engine."""


class FixwitError(Exception):
    """Base class for engine errors."""


class CarrierMismatchError(FixwitError):
    """A value does not belong to the carrier of the lattice it was used with."""


class StructuralError(FixwitError):
    """A value, basis element or syntactic object violates its well-formedness rules."""


class IntegrityError(FixwitError):
    """An internal consistency check failed (e.g. a supposedly monotone map decreased)."""


class TurnError(FixwitError):
    """A game move was submitted by the player whose turn it is not."""


class NoWitnessError(FixwitError):
    """An auxiliary witness-construction step has no solution; the message names the gap."""


class SynthesisError(FixwitError):
    """Strategy synthesis is impossible (typically: degree/co-degree unknown)."""


class IncompleteStrategyError(FixwitError):
    """A strategy map lacks an entry for a reachable basis element."""
