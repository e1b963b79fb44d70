"""Exception types shared across the codec."""


class InvalidConfig(ValueError):
    """A parameter value violates its contract (non-positive sigma, bad ratio, degenerate grid, ...)."""


class InvalidInput(ValueError):
    """Input data violates a structural precondition (shape mismatch, empty batch, ...)."""


class FormatError(ValueError):
    """A serialized document failed validation.

    ``field`` names the offending part of the format ("magic", "length",
    "nan", "lambda", ...); it is always present in the message.
    """

    def __init__(self, field: str, detail: str = ""):
        self.field = field
        message = field if not detail else f"{field}: {detail}"
        super().__init__(message)


class AmbiguousSecondMax(Exception):
    """Every pixel has the same activation, so no second maximum exists."""


class BorderMax(Exception):
    """The maximal pixel sits on the heatmap border, so no 3x3 neighborhood exists."""
