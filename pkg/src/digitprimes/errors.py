"""Exception hierarchy shared by all digitprimes modules."""


class DigitprimesError(Exception):
    """Base class for all package errors."""


class ParameterError(DigitprimesError, ValueError):
    """Invalid argument: out-of-range modulus, bad digit position, etc."""


class RangeError(ParameterError):
    """Index or evaluation point outside the table it is asked against."""


class AliasingError(ParameterError):
    """Grid too small for an exact discrete integral (M <= N)."""


class ResourceError(DigitprimesError, RuntimeError):
    """Request exceeds the configured desk-scale memory/enumeration budget."""


class CacheError(DigitprimesError, RuntimeError):
    """Table cache file is missing, truncated, or fails its checksum."""


class ConsistencyError(DigitprimesError, RuntimeError):
    """Two independent evaluation routes disagree: a bug trap, never expected."""


class TermOverflowError(DigitprimesError, RuntimeError):
    """Sparse expansion exceeded its term cap; raise the pruning tolerance."""
