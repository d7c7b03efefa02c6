"""Exception types raised by the library."""


class RealMapsError(Exception):
    """Base class for library errors."""


class DimensionError(RealMapsError, ValueError):
    """Shapes or factor dimensions are incompatible."""


class NotHermitianError(RealMapsError, ValueError):
    pass


class RankExceededError(RealMapsError, ValueError):
    pass


class AlreadyComplexError(RealMapsError, ValueError):
    pass


class NotIPTError(RealMapsError, ValueError):
    """Raised when an operation requires a completely positive IPT map."""


class UnknownEntryError(RealMapsError, KeyError):
    pass


class ParamRangeError(RealMapsError, ValueError):
    pass
