"""Exception types raised across the package."""


class ShadowLabError(Exception):
    pass


class DimensionMismatch(ShadowLabError, ValueError):
    pass


class NumericalBreakdown(ShadowLabError):
    """Pivot magnitudes collapsed below the pivot tolerance."""


class DegeneratePivot(ShadowLabError):
    pass


class TooLarge(ShadowLabError, ValueError):
    pass


class NotNormalized(ShadowLabError, ValueError):
    pass


class EmptySlice(ShadowLabError):
    pass


class CenterNotInterior(ShadowLabError, ValueError):
    pass


class DepthExceeded(ShadowLabError):
    pass


class OriginOutside(ShadowLabError):
    pass


class PreconditionViolated(ShadowLabError, ValueError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class InvalidK(ShadowLabError, ValueError):
    pass


class UnboundedShadow(ShadowLabError):
    pass


class ParseError(ShadowLabError, ValueError):
    pass


class ConfigError(ShadowLabError, ValueError):
    pass
