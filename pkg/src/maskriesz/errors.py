"""Exception types raised across the package."""


class MaskRieszError(Exception):
    """Base class for every error raised by maskriesz."""


class InvalidInput(MaskRieszError, ValueError):
    pass


class InvalidInterval(InvalidInput):
    pass


class InvalidConfiguration(MaskRieszError, ValueError):
    pass


class IncompatibleGrids(InvalidConfiguration):
    pass


class Incompatible(MaskRieszError, ValueError):
    pass


class ShapeError(MaskRieszError, ValueError):
    pass


class SingularMatrix(MaskRieszError, ArithmeticError):
    pass


class SizeLimit(MaskRieszError, ValueError):
    pass


class InvalidOffsets(InvalidConfiguration):
    pass


class InvalidMask(InvalidConfiguration):
    pass


class UnsupportedConfiguration(MaskRieszError, ValueError):
    pass


class InvalidBound(MaskRieszError, ValueError):
    pass


class NotFound(MaskRieszError, KeyError):
    pass


class InternalError(MaskRieszError, RuntimeError):
    pass


class VerificationError(MaskRieszError):
    """The certificate could not be read or uses an unknown schema."""
