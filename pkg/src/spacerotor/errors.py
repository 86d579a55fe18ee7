"""Exception types shared across the package."""


class NotSkewError(ValueError):
    """Matrix passed to ``vee`` is not skew-symmetric."""


class DegenerateError(ValueError):
    """Matrix cannot be projected onto SO(3)."""


class NonFiniteError(FloatingPointError):
    """A field, probe or integration step produced NaN or inf.

    ``step`` carries the integration step index when the failure happened
    inside an integrator, otherwise it is None.
    """

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ConfigError(ValueError):
    """Invalid scenario or suite configuration.

    ``field`` is the dotted path of the offending entry.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
