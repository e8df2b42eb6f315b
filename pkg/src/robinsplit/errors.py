"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Raised when a mesh, scheme, or experiment configuration is invalid."""


class SingularSystemError(RuntimeError):
    """Raised when a linear system cannot be factorized.

    Attributes
    ----------
    pivot_index : int or None
        Index of the first failing pivot (or of a structurally empty
        row/column) when it could be determined, else None.
    """

    def __init__(self, message, pivot_index=None):
        if pivot_index is not None:
            message = f"{message} (pivot index {pivot_index})"
        super().__init__(message)
        self.pivot_index = pivot_index
