"""Exception types shared across the package."""


class HammrlError(Exception):
    """Base class for package-specific errors."""


class InvalidInputError(HammrlError, ValueError):
    """An argument or input file violates a documented precondition."""


class CapacityError(HammrlError):
    """A request exceeds a configured dense-computation limit."""


class NumericalDegeneracyError(HammrlError):
    """A deconvolution denominator collapsed to zero.

    Carries the offending outcome string so callers can report which node
    became unreachable (possible only when the self term is disabled or a
    distance cutoff isolates part of the support).
    """

    def __init__(self, node: str, iteration: int):
        super().__init__(
            f"zero denominator for node {node!r} at iteration {iteration}; "
            "the node is isolated under the current point-spread settings"
        )
        self.node = node
        self.iteration = iteration
