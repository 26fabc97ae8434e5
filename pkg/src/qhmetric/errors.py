"""Exception types raised by the toolkit.

Every domain-level failure derives from :class:`MetricToolkitError` so
callers (and the CLI) can distinguish modelling problems from plain bugs.
"""


class MetricToolkitError(Exception):
    """Base class for all toolkit failures."""


class DimensionMismatch(MetricToolkitError):
    """Operands have incompatible shapes."""


class NotHermitian(MetricToolkitError):
    """A matrix required to be Hermitian is not, beyond tolerance."""


class NotSymmetric(MetricToolkitError):
    """A real matrix required to be symmetric is not, beyond tolerance."""


class NotAntisymmetric(MetricToolkitError):
    """A real matrix required to be antisymmetric is not, beyond tolerance."""


class NotPositiveDefinite(MetricToolkitError):
    """A candidate metric fails strict positivity."""


class EigensolverFailure(MetricToolkitError):
    """The dense eigensolver did not converge or produced an unusable basis."""


class ComplexSpectrum(MetricToolkitError):
    """An observable has eigenvalues with non-negligible imaginary parts."""


class DegenerateSpectrum(MetricToolkitError):
    """An observable has (numerically) coinciding eigenvalues."""


class SingularOmega(MetricToolkitError):
    """A similarity-transform factor is singular or nearly so."""


class SingularDiagonalSystem(MetricToolkitError):
    """The diagonal-frame conditions do not determine the second coefficient set."""


class DegenerateElimination(MetricToolkitError):
    """The two-level off-diagonal subsystem cannot be eliminated."""


class DimensionTooSmall(MetricToolkitError):
    """A truncated-oscillator construction needs a larger dimension."""
