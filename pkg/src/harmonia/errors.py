"""Exception hierarchy.

``InputError`` maps to CLI exit code 2; ``CheckFailure`` to exit code 1.
"""


class HarmoniaError(Exception):
    """Base class for all package errors."""


class InputError(HarmoniaError, ValueError):
    """Malformed input: unknown vertex, bad parameter, parse failure."""


class NoBoundaryError(InputError):
    """A connected component of the interior has an empty relative boundary."""


class GeometryError(InputError):
    """A lattice construction cannot be carried out at the requested resolution."""


class NonConvergenceError(HarmoniaError):
    """An iteration hit its cap before reaching tolerance.

    The last iteration state is attached as ``state``.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class ConsistencyError(HarmoniaError):
    """Two computations that must agree by construction did not."""


class CheckFailure(HarmoniaError):
    """A verification check failed; raised by the CLI layer only."""
