"""Exception taxonomy.

Every error raised by the package derives from AuctionLPError so callers
can catch one base.  The CLI maps these onto exit codes.
"""


class AuctionLPError(Exception):
    pass


class NonUnitMass(AuctionLPError):
    """A buyer's probability masses do not sum to exactly 1."""


class NegativeValue(AuctionLPError):
    """A value coordinate or probability mass is negative."""


class DuplicateSupportVector(AuctionLPError):
    """Two identical value vectors inside one buyer's support."""


class ZeroMassNonzeroType(AuctionLPError):
    """Strict validation: a nonzero value vector carries zero mass."""


class MissingZeroType(AuctionLPError):
    """A buyer's support lacks the all-zeros vector and augmentation is off."""


class DimensionMismatch(AuctionLPError):
    """Array shapes inconsistent with the declared buyer/item counts."""


class LabelMismatch(AuctionLPError):
    """An LP certificate's labels do not match the expected builder scheme."""


class NotOptimal(AuctionLPError):
    """A dual solution claimed optimal fails the strong-duality check."""


class NotRegular(AuctionLPError):
    """A dual solution fails one of the regularity conditions."""


class NotAgentIndependent(AuctionLPError):
    """Dual multipliers are inconsistent across opponent-value slices."""


class ScaleLimit(AuctionLPError):
    """Requested computation exceeds the configured desk-scale caps."""


class InfeasibleInput(AuctionLPError):
    """A mechanism or dual solution violates a feasibility constraint."""
