"""Exception hierarchy.

The CLI maps each branch to an exit code: input problems exit 2, numerical
failures exit 3, physics-domain failures exit 4.
"""


class MesonLoopError(Exception):
    """Base class for all package errors."""

    exit_code = 1
    kind = "error"


class ValidationError(MesonLoopError, ValueError):
    """Malformed input: bad parameters, knots, or config fields."""

    exit_code = 2
    kind = "validation"

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ContractError(MesonLoopError, ValueError):
    """A documented precondition of an operation does not hold."""

    exit_code = 2
    kind = "contract"


class NumericalError(MesonLoopError, ArithmeticError):
    exit_code = 3
    kind = "numerical"


class QuadratureError(NumericalError):
    kind = "quadrature"


class ConsistencyError(NumericalError):
    """A recomputed invariant disagrees with the stored value."""

    kind = "consistency"


class InstabilityError(NumericalError):
    kind = "instability"


class DomainEscapeError(NumericalError):
    """The wavefunction reached the edge of the simulation box."""

    kind = "domain_escape"


class NonIdentifiableError(NumericalError):
    kind = "non_identifiable"


class PhysicsDomainError(MesonLoopError):
    exit_code = 4
    kind = "physics_domain"


class CollisionError(PhysicsDomainError):
    """The moving quark reached or crossed the static one."""

    kind = "collision"


class ConstructionError(PhysicsDomainError):
    """No path pair satisfies the requested constraints."""

    kind = "construction"
