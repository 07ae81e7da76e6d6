class BloomError(ValueError):
    """Root of every error raised by the filter toolkit."""


class GeometryError(BloomError):
    """Invalid (m, k, block_bits) combination for the requested layout."""


class ParamsMismatchError(BloomError):
    """Two filters with different parameters or seeds were combined."""


class VariantError(BloomError):
    """Operation not defined for this filter variant."""


class BitBudgetError(BloomError):
    """WideSplit needs more hash bits than one wide hash provides."""


class AnalysisInputError(BloomError):
    pass


class InfeasibleError(BloomError):
    """Requested crafted element cannot exist under the given scheme/layout."""


class AttemptBudgetExceeded(BloomError):
    def __init__(self, message: str, attempts: int, expected_attempts: float) -> None:
        super().__init__(message)
        self.attempts = attempts
        self.expected_attempts = expected_attempts


# --- filter file format ---------------------------------------------------


class FilterFormatError(BloomError):
    pass


class BadMagicError(FilterFormatError):
    pass


class UnsupportedVersionError(FilterFormatError):
    pass


class LengthMismatchError(FilterFormatError):
    pass


class ChecksumError(FilterFormatError):
    pass
