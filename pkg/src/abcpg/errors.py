"""Exception types raised by the sampler components."""


class ParameterError(ValueError):
    """A parameter lies outside its admissible domain."""


class DegenerateWeightsError(RuntimeError):
    """Every particle received zero weight (total ABC rejection).

    Only reachable with the uniform kernel: it means epsilon is too small
    for the scale of the data.
    """

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"all particle weights are zero at step t={step}")


class TruncationError(RuntimeError):
    """Rejection sampling of the truncated NIG ran out of attempts."""

    def __init__(self, attempts, mu, lam, a, b):
        self.attempts = attempts
        super().__init__(
            f"no draw with |phi| < 1 after {attempts} attempts "
            f"(mu={list(mu)}, lambda={[list(r) for r in lam]}, a={a}, b={b})"
        )


class ParseError(ValueError):
    """Malformed input file; ``line`` is 1-based and counts the header."""

    def __init__(self, path, line, message):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}")
