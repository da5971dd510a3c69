"""Exception types for pyresgen."""


class ValidationError(ValueError):
    """Raised when a configuration, grid file or modelling assumption is invalid.

    The message always names the offending field or check.
    """


class DesignError(RuntimeError):
    """Raised when a synthesis step cannot produce a valid design.

    Examples are a Riccati iteration that does not converge or an unknown
    input observer whose structural assumptions fail.
    """
