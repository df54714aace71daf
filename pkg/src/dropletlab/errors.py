"""Exception hierarchy shared by all dropletlab modules."""


class DropletLabError(Exception):
    """Base class for every error raised by dropletlab."""


class InvalidInputError(DropletLabError, ValueError):
    """A parameter or argument violates its documented domain."""


class DivergentIntegralError(InvalidInputError):
    """The requested kernel integral does not converge (exponent >= dimension)."""


class MethodUnsupportedError(DropletLabError):
    """The requested integration method cannot handle this geometry."""


class DegenerateConfigurationError(DropletLabError):
    """Two points coincide, or a movable point sits on the anchor at the origin.

    ``indices`` lists the offending pairs using the 0..N labelling, 0 being the anchor.
    """

    def __init__(self, indices, message=None):
        self.indices = [tuple(int(k) for k in pair) for pair in indices]
        super().__init__(message or f"degenerate configuration, coincident pairs {self.indices}")


class InvalidConfigurationError(DropletLabError):
    """Droplets overlap where the energy model requires them to be disjoint."""

    def __init__(self, message, Z=None):
        self.Z = Z
        super().__init__(message)


class OptimizationFailedError(DropletLabError):
    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class BracketError(DropletLabError):
    """A root search interval does not bracket a sign change."""


class StencilError(DropletLabError):
    """A finite-difference stencil touched a point where the function is undefined."""
