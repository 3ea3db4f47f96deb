class ChainQSTError(Exception):
    """Base class for all package errors."""


class ValidationError(ChainQSTError, ValueError):
    """Input violates a documented invariant or precondition.

    ``path`` locates the offending field (``"qubits[1].t1"``) when known.
    """

    def __init__(self, message, path=None):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if path else message)


class ResonanceError(ValidationError):
    """A link violates the parametric resonance condition."""

    def __init__(self, link, mismatch_mhz, tolerance_mhz):
        self.link = link
        self.mismatch_mhz = mismatch_mhz
        super().__init__(
            f"link {link} off resonance by {mismatch_mhz:.6g} MHz "
            f"(tolerance {tolerance_mhz:.3g} MHz)"
        )


class InfeasibleTargetError(ValidationError):
    """A coupling target exceeds what the Bessel map can deliver."""

    def __init__(self, target, maximum, link=None):
        self.target = target
        self.maximum = maximum
        self.link = link
        where = f"link {link}: " if link is not None else ""
        super().__init__(
            f"{where}target |g'| = {target:.6g} MHz exceeds maximum achievable "
            f"{maximum:.6g} MHz (headroom {target / maximum:.4f})"
        )


class NumericalError(ChainQSTError, ArithmeticError):
    """A numerical procedure failed (step underflow, singular matrix, ...)."""


class FitError(NumericalError):
    """A curve fit could not be performed or did not converge."""
