"""Exception types raised across the package."""


class DegenerateDistribution(ValueError):
    """Quantization left no probability mass on any behavior."""


class BehaviorOutsideBin(ValueError):
    """The observed behavior is not in the bin reproduced by the decoder.

    Signals desynchronization, a wrong key, or tampering.
    """


class DomainError(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class InvariantViolation(ValueError):
    def __init__(self, invariant: str, detail: str = "", line: int | None = None):
        self.invariant = invariant
        self.line = line
        msg = f"invariant '{invariant}' violated"
        if detail:
            msg += f": {detail}"
        if line is not None:
            msg = f"line {line}: {msg}"
        super().__init__(msg)
