"""Exception hierarchy shared by every grayforge module."""


class GrayforgeError(Exception):
    """Base class for all errors raised by grayforge."""


class DomainError(GrayforgeError, ValueError):
    """An argument lies outside the domain of a closed-form expression."""


class CaseMismatch(GrayforgeError, ValueError):
    """Parameters or constants are inconsistent with the declared case."""


class NoRoot(GrayforgeError):
    """A boundary-condition search found no admissible root."""


class InadmissibleC(NoRoot):
    """The product-case abscissa x(c) is not positive for the requested c."""


class SingularSystem(GrayforgeError):
    """A linear system needed for the boundary constants is singular."""


class PositivityViolation(GrayforgeError):
    """The solution z is not strictly positive between its two zeros."""


class NonFiniteLength(GrayforgeError):
    """An endpoint zero of z is not simple, so the arc length diverges."""


class ResidualFailure(GrayforgeError):
    """A condition that must hold by construction failed its residual check."""


class EndpointUndefined(GrayforgeError, ValueError):
    """A curvature quantity was requested at an axis where it is singular."""


class ChartBoundary(GrayforgeError, ValueError):
    """A point lies outside the regular range of the coordinate chart."""


class ChartExit(GrayforgeError):
    """A geodesic left the coordinate chart before reaching its horizon."""
