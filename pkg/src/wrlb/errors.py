"""Exception types shared across the package.

Every operation that can fail for a reason the caller might want to
handle raises one of these instead of a bare ValueError, so the CLI can
map them onto exit codes uniformly.
"""


class WrlbError(Exception):
    """Base class for all package-specific failures."""


class GridTooSmall(WrlbError):
    """A physical-space grid is too coarse for an alias-free operation."""


class BadOrder(WrlbError):
    """A derivative multi-index violates the order constraints of an op."""


class BadShape(WrlbError):
    """Field shapes, mode radii, or parameter combinations are inconsistent."""


class InsufficientSamples(WrlbError):
    """An ensemble estimate was requested with too few samples."""


class DegenerateSet(WrlbError):
    """An importance-sampling target set captured almost no samples."""


class Diverged(WrlbError):
    """An iterative solver increased its objective beyond recovery."""
