"""Exception types shared across the package."""


class KzpError(Exception):
    """Base class for all library errors."""


class NotPrime(KzpError):
    """A modulus that must be prime is composite (or < 2)."""


class ZeroInverse(KzpError, ZeroDivisionError):
    """Inversion of the zero field element."""


class FieldMismatch(KzpError):
    """Operands live in different fields."""


class IndexOutOfRange(KzpError, IndexError):
    """A variable or basis index is outside its valid range."""


class PrecisionExceeded(KzpError):
    """A jet operation needs more precision than the series carries."""


class RationalH(KzpError):
    """Operation requires the connection parameter to lie in the prime field."""


class IrrationalH(KzpError):
    """Operation requires the connection parameter outside the prime field."""


class PointNotInS(KzpError):
    """Evaluation point has two equal coordinates."""


class NotEtale(KzpError):
    """The critical fiber over the point is not reduced (colliding roots)."""


class DegenerateCase(KzpError):
    """Rank-one structure does not apply; route to the zero-matrix check."""


class LinkageError(KzpError):
    """No admissible auxiliary curve exponent below the scan bound."""


class TruncationTooSmall(KzpError):
    """Formal solving needs truncation order at least p."""


class PDividesN(KzpError):
    """Operation assumes the characteristic does not divide the matrix size."""


class LengthMismatch(KzpError):
    """Vectors of different lengths were paired."""


class ResourceGuard(KzpError):
    """Predicted memory/op count of an exact solve exceeds the configured cap."""
