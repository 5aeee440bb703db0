"""Exception types raised across the package.

Degeneracy is always an error here, never a NaN: any quantity whose
denominator or pivot falls below the configured epsilon raises one of
these instead of propagating infinities.
"""


class NoetherFramesError(Exception):
    """Base class for all package errors."""


class NearZeroDivision(NoetherFramesError, ZeroDivisionError):
    """Division by a scalar of magnitude below the configured epsilon."""


class SingularMatrix(NoetherFramesError):
    """Matrix inverse requested with |det| below the configured epsilon."""


class BranchPoint(NoetherFramesError):
    """Square root evaluated at zero with a nonzero dual tangent."""


class KindMismatch(NoetherFramesError, TypeError):
    """Group element or point data does not match the requested action."""


class ProjectivePole(NoetherFramesError):
    """Moebius action evaluated at a pole (|c x + d| below epsilon)."""


class DimensionMismatch(NoetherFramesError, ValueError):
    """Vector or matrix data of the wrong length for the requested action."""


class SiteError(NoetherFramesError):
    """Base for errors that point at a lattice site."""

    def __init__(self, site, message=""):
        self.site = site
        text = message or self.__class__.__name__
        super().__init__(f"{text} at site {site}")


class DegenerateWindow(SiteError):
    """A point window fails the nondegeneracy condition of the action."""


class NegativeRadicand(SiteError):
    """Real-mode frame square root asked for a nonpositive radicand."""


class DegenerateInvariants(SiteError):
    """Operator or frame coefficient hit a vanishing invariant denominator."""


class WindowOutOfRange(SiteError):
    """A site outside the stored range of a path or invariant sequence."""


class SupportViolation(NoetherFramesError):
    """Boundary form requested for an operator with negative shifts."""


class DegenerateConstants(NoetherFramesError):
    """Conservation constants violate a reconstruction hypothesis."""


class ZeroV2(SiteError):
    """SL(2)-type reconstruction hit a vanishing second constant V^2."""


class ZeroV45(SiteError):
    """Equi-affine reconstruction hit a vanishing V^4 or V^5 constant."""


class ZeroDenominator(SiteError):
    """Reconstructed point denominator vanished."""


class SingularJacobian(SiteError):
    """Newton step could not be solved."""


class NewtonDivergence(SiteError):
    """Forward Euler-Lagrange step failed to converge."""


class NonConvergence(NoetherFramesError):
    """Path optimizer exhausted its iteration budget."""


class DocumentFormatError(NoetherFramesError, ValueError):
    """A JSON document has the wrong shape; the message names the field."""
