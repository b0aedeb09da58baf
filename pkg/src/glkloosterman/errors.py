"""Exception types shared across the package."""


class KloostermanError(Exception):
    """Base class for all errors raised by glkloosterman."""


class PrecisionLoss(KloostermanError):
    """A p-adic test could not be decided at the working precision."""


class ScaleOverflow(KloostermanError):
    """A character argument has a denominator beyond the cyclotomic order."""


class NotInBigCell(KloostermanError):
    """A pivot minor vanished exactly during Bruhat extraction."""


class NotInvertible(KloostermanError):
    pass


class Infeasible(KloostermanError):
    """An enumeration exceeded its candidate budget."""


class FactorizationMismatch(KloostermanError):
    """The direct and product evaluations of S_w disagree (implementation bug)."""


class BlockMismatch(KloostermanError):
    pass


class DetNotUnit(KloostermanError):
    pass


class DegenerateDenominator(KloostermanError):
    """A closed-form denominator is zero (or indistinguishable from zero)."""


class ConfigError(KloostermanError):
    pass
