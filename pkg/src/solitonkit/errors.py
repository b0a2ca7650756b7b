"""Exception types raised by the toolkit."""


class GeometryError(Exception):
    """Base class for every error raised by solitonkit."""


class DomainError(GeometryError, ValueError):
    """Point lies outside the open coordinate domain of a chart."""


class NotPositiveDefiniteError(GeometryError, ValueError):
    """Metric failed the Cholesky test at the requested point."""


class DerivativeOrderError(GeometryError):
    """The chart or potential cannot supply derivatives of the requested order."""


class DimensionError(GeometryError, ValueError):
    """The quantity is undefined in this dimension."""


class ZeroVectorError(GeometryError, ValueError):
    pass


class CriticalPointError(GeometryError):
    """The potential gradient vanishes (to threshold) at the point."""


class NotASolitonError(GeometryError):
    """An identity that presupposes the soliton equation was requested on a non-soliton."""


class NonzeroRhoError(GeometryError, ValueError):
    """A steady-only operation was applied to a shrinking or expanding soliton."""


class ProfileError(GeometryError, ValueError):
    """Invalid warped profile data (nonpositive warping, bad grid, short tail, ...)."""


class IntegrationError(GeometryError):
    """The ODE integrator failed or left the admissible region."""


class FibrationError(GeometryError):
    """Operation needs a declared fibration (warped/product/rotational chart)."""


class CatalogError(GeometryError, KeyError):
    pass


class EmptySampleError(GeometryError, ValueError):
    pass
