"""Exception types raised by teichflow.

Errors that signal bad input derive from ``ValueError``; the CLI maps those
to exit code 1 and everything else to exit code 2.
"""


class SearchBoundExceeded(RuntimeError):
    """A Farey search grew past its configured vertex bound."""


class TwistUndefined(ValueError):
    """Twisting around a curve was requested for a curve disjoint from it."""


class BalanceUndefined(ValueError):
    """The curve is horizontal or vertical, so its balance time is infinite."""


class EmbeddingError(ValueError):
    """A slit does not embed in one of the pieces it is glued into."""


class GapViolation(ValueError):
    """A thick-thin decomposition is ambiguous for the given thresholds."""


class TopologyMismatch(ValueError):
    """Two markings or surfaces do not have the same topological type."""


class Unbracketed(RuntimeError):
    """The time range is too short to bracket an isolation interval."""


class NotThick(ValueError):
    """An endpoint that was required to be thick is not."""
