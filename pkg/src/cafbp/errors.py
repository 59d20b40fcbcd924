"""Exception types shared across the package."""


class CafbpError(Exception):
    """Base class for all recoverable errors raised by this package."""


class MalformedHeader(CafbpError):
    """A stream header is missing required fields or is otherwise invalid."""


class UnsupportedColorSpace(CafbpError):
    """The input declares a color space other than 8-bit 4:2:0 or mono."""


class TruncatedFrame(CafbpError):
    """The input ends in the middle of a frame payload."""


class SizeMismatch(CafbpError):
    """Two operands (or a stream and its declared geometry) disagree in size."""


class DimensionMismatch(CafbpError):
    """Two planes or vectors that must share dimensions do not."""


class ThresholdOrderInvalid(CafbpError):
    """Variance thresholds must be strictly increasing."""


class BlockTooSmall(CafbpError):
    """The block (or plane) is smaller than the operation requires."""


class UnsupportedSize(CafbpError):
    """A block or plane size outside the supported range."""


class NotPowerOfTwo(CafbpError):
    """A length that must be a power of two is not."""


class ShapeMismatch(CafbpError):
    """A network has the wrong shape for the requested operation."""


class EmptyTrainingSet(CafbpError):
    """Training was requested with no training pairs."""


class TruncatedStream(CafbpError):
    """A bitstream ended before the expected data was read."""


class ReservedRunCollision(CafbpError):
    """A zero run would collide with the reserved end-of-block code."""


class EmptySequence(CafbpError):
    """An operation that needs at least one frame received none."""


class IoFailure(CafbpError):
    """Reading or writing a file failed."""
