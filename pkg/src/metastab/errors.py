"""Exception and warning types raised across the package."""


class MetastabError(Exception):
    """Base class for all package errors."""


class NonPositiveCoefficient(MetastabError, ValueError):
    pass


class NonFinite(MetastabError, ValueError):
    pass


class DivisionByZeroOrder(MetastabError, ZeroDivisionError):
    pass


class ZeroOrderComparison(MetastabError, ValueError):
    pass


class EvaluationOverflow(MetastabError, OverflowError):
    """An order evaluated at a concrete eps exceeds the double range."""


class EmptyRow(MetastabError, ValueError):
    """A state has no non-Zero outgoing rate."""

    def __init__(self, state):
        self.state = state
        super().__init__(f"state {state} has no outgoing rate")


class SingularSystem(MetastabError, ArithmeticError):
    pass


class UnreachableAbsorbingSet(MetastabError):
    """Mass started at ``start`` can be trapped away from the absorbing set.

    ``context`` carries whatever the caller attached for diagnosis (for
    instance the stopped chain that failed).
    """

    def __init__(self, start, trapped, context=None):
        self.start = start
        self.trapped = sorted(trapped)
        self.context = context
        super().__init__(
            f"from state {start}, states {self.trapped} cannot reach the absorbing set"
        )


class CriticalTimeScale(MetastabError):
    """The time scale is commensurate with some inverse transition rate.

    ``entries`` is a list of ``(rank, cluster, T)`` with ``T`` the offending
    :class:`~metastab.asymptotics.AsymptoticOrder`.
    """

    def __init__(self, entries):
        self.entries = list(entries)
        desc = ", ".join(f"(rank {r}, cluster {k}, T={T})" for r, k, T in self.entries)
        super().__init__(f"time scale is commensurate with {desc}")


class NotInCluster(MetastabError, ValueError):
    pass


class ScalingOverflow(MetastabError, OverflowError):
    pass


class ParseError(MetastabError, ValueError):
    def __init__(self, field, message=""):
        self.field = field
        super().__init__(f"{field}: {message}" if message else str(field))


class ChainValidationError(MetastabError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class LadderRangeError(MetastabError, ValueError):
    pass


class UnderflowWarning(UserWarning):
    """A non-Zero rate evaluated to 0.0 at the requested eps."""


class JumpCapSaturated(UserWarning):
    """More than 1% of simulated paths hit the jump cap."""
