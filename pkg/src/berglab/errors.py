"""Error types shared across the package."""


class DomainError(ValueError):
    """Raised when an input violates a documented precondition.

    The CLI maps this to exit code 1, so library code should prefer it
    over bare ValueError for anything a user can trigger from outside.
    """


class InvarianceError(DomainError):
    """Raised when a matrix fails the block-invariance check.

    Carries the measured off-block mass so callers can report how badly
    the hypothesis was violated instead of silently projecting.
    """

    def __init__(self, message: str, off_block_mass: float = float("nan")):
        super().__init__(message)
        self.off_block_mass = off_block_mass
