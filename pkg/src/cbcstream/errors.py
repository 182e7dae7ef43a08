"""Exception types raised across the package.

Validation failures subclass ``ValueError`` so callers that only care about
"bad input" can catch one thing; lookup misses subclass ``LookupError``.
"""


class CbcError(Exception):
    """Base class for every error raised by cbcstream."""


class InputError(CbcError, ValueError):
    """Malformed or inconsistent input."""


# rdmodel
class NotMonotone(InputError):
    pass


class MissingZeroRate(InputError):
    pass


class NegativeValue(InputError):
    pass


class NegativeRate(InputError):
    pass


# codes
class EmptyPayload(InputError):
    pass


class FrameTooShort(InputError):
    pass


class LengthMismatch(InputError):
    pass


class UnknownCode(InputError, LookupError):
    pass


class MissingEntry(CbcError, LookupError):
    """A P_e value needed for some code suffix was never measured or ingested."""


# framing
class Infeasible(CbcError):
    """No chunk-count vector fits the transmission budget."""


class SourceTooShort(InputError):
    pass


# analysis
class IndexOutOfRange(InputError, IndexError):
    pass


class TooManyChunks(InputError):
    pass


# optimizer
class CapExceeded(CbcError):
    """The search space is larger than the configured candidate cap."""


class NoFeasiblePolicy(CbcError):
    """No candidate satisfies the problem's constraints."""


class ZeroBaselineStdDev(CbcError, ZeroDivisionError):
    pass


# sim
class UnrealizableCode(CbcError):
    """A table-only code was asked to run through the bit-true codec."""
