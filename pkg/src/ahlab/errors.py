"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`AhlabError`,
so callers (the CLI in particular) can map them to exit codes.
"""


class AhlabError(Exception):
    pass


class ConfigError(AhlabError, ValueError):
    """Configuration failed schema or value validation."""


class NonPositiveGeometry(ConfigError):
    pass


class CouplingOutOfRange(ConfigError):
    pass


class PacketOverlapsArray(ConfigError):
    pass


class SiteIndexOutOfRange(AhlabError, IndexError):
    pass


class DisentanglementSingular(AhlabError, ArithmeticError):
    pass


class WrongPacketVariant(AhlabError, TypeError):
    pass


class OrderTooHigh(AhlabError, ValueError):
    pass


class StepTooLarge(AhlabError, ArithmeticError):
    """Richardson-extrapolated finite difference failed its self-consistency check."""


class BorderUndefinedForPacket(AhlabError, ValueError):
    pass


class OutsideValidityWindow(AhlabError, ValueError):
    """A closed-form limit formula was evaluated outside the region where it holds."""


class ValidityWarning(UserWarning):
    """Scale-separation assumptions (packet small against x1 and L) are weakly met."""
