"""Exception types raised across the package."""


class FastspecError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(FastspecError):
    """Operand shapes are incompatible."""


class ValidationError(FastspecError):
    """A value violates a structural invariant (bad index, bad field, non-finite entry)."""


class ParseError(FastspecError):
    """A file or serialized blob could not be parsed; message carries line/field context."""


class NotSymmetric(FastspecError):
    """A symmetric matrix was required but the input is not symmetric."""


class MissingSpectrum(FastspecError):
    """spectrum_rule='original' requires caller-supplied eigenvalues."""


class NonInvertibleScale(FastspecError):
    """A scaling transform has |a| below the invertibility floor."""


class SingularNormalMatrix(FastspecError):
    """The spectrum least-squares system is too ill-conditioned to solve."""


class ZeroPolynomial(FastspecError):
    """All polynomial coefficients vanish; roots are undefined."""


class ZeroScale(FastspecError):
    """A scaling cost was requested at |a| below the invertibility floor."""


class TooLarge(FastspecError):
    """Brute-force oracle called beyond its size cap."""


class IndexOutOfRange(FastspecError):
    """A vertex or matrix index lies outside the declared range."""
