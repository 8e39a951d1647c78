"""Exception types shared across the package."""


class NonHermitianInput(ValueError):
    """A matrix expected to be Hermitian is not, within tolerance."""


class NoConvergence(RuntimeError):
    """An iterative routine exceeded its iteration cap."""


class NotNormalized(ValueError):
    """A pure state does not have unit norm."""


class InvalidParams(ValueError):
    """Machine parameters violate a bound or normalization invariant."""


class TrialsOverflow(ValueError):
    """Requested trial count exceeds the 64-bit counter width."""


class ParseError(ValueError):
    """Malformed parameter file. Carries the offending line number and key."""

    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class NormalizationError(ValueError):
    """An amplitude block in a parameter file is not unit norm."""


class NoFeasiblePoint(RuntimeError):
    """No restart reached feasibility. ``result`` holds the best infeasible run."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
