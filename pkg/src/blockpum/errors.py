"""Exception and warning types shared across the package."""


class BlockPumError(Exception):
    """Base class for all blockpum errors."""


class DegenerateInput(BlockPumError):
    """Input points are affinely dependent (collinear/coplanar), no hull exists."""


class EmptyReduction(BlockPumError):
    """No point survived the reduction to the domain."""


class PointOutsideBox(BlockPumError):
    """A point lies outside the bounding box beyond tolerance."""


class SupportExceedsNeighborhood(BlockPumError):
    """Kernel support is wider than a block, so the 3^M neighborhood cannot
    guarantee complete range-search results."""


class InsufficientCoverage(BlockPumError):
    """Some evaluation point belongs to no subdomain that contains data."""


class NoActiveSubdomain(BlockPumError):
    """A query point lies in no subdomain of the covering."""


class SingularLocalSystem(BlockPumError):
    """A local interpolation matrix could not be factorized."""


class LengthMismatch(BlockPumError):
    """Paired sequences have different lengths."""


class DegenerateRatio(BlockPumError):
    """Convergence-rate inputs make the rate undefined."""


class SameBasin(BlockPumError):
    """Both bracket endpoints flow to the same equilibrium."""


class EmptySubdomainPruned(UserWarning):
    """A subdomain containing no data sites was dropped from the covering."""
