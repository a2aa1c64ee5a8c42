"""Exception hierarchy shared by all curvemetrics modules."""


class CurveMetricsError(Exception):
    """Base class for every error raised by this package."""


class GridTooSmall(CurveMetricsError):
    pass


class NotImmersed(CurveMetricsError):
    """The sampled curve has (numerically) vanishing speed somewhere."""


class GridMismatch(CurveMetricsError):
    pass


class NotADiffeo(CurveMetricsError):
    """Sampled reparametrization is not monotone or does not wind exactly once."""


class InvalidCoefficients(CurveMetricsError):
    pass


class NonPositiveCoefficient(CurveMetricsError):
    pass


class NotConstantSpeed(CurveMetricsError):
    pass


class NotSymmetricPositive(CurveMetricsError):
    pass


class InvalidRecipe(CurveMetricsError):
    pass


class FileFormatError(CurveMetricsError):
    """An input file could not be parsed into the expected structure."""
