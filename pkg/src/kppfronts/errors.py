"""Exception types shared across the package.

Malformed inputs and violated preconditions raise plain ValueError; the
classes below cover failures of the numerical machinery itself.
"""


class KppfrontsError(Exception):
    """Base class for numerical failures reported by kppfronts."""


class AssumptionError(KppfrontsError):
    """An operation's structural preconditions on (D, M, C) do not hold.

    Carries the names of the failing assumption-report items.
    """

    def __init__(self, message, failing=()):
        super().__init__(message)
        self.failing = tuple(failing)


class EigenvalueError(KppfrontsError):
    """Eigenvalue iteration failed to converge or verify.

    Carries the iteration count when the iteration is ours (power method);
    LAPACK-backed failures carry the backend's report instead.
    """

    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class IntegrationError(KppfrontsError):
    """Time integration failed (blow-up, NaN, or positivity loss).

    Attributes
    ----------
    time : float
        Simulation time at which the failure was detected.
    reason : str
        One of "non-finite", "instability", "blow-up".
    """

    def __init__(self, message, time=None, reason=None):
        super().__init__(message)
        self.time = time
        self.reason = reason


class DomainTooShortError(KppfrontsError):
    """The tracked front reached the right boundary before t_end."""

    def __init__(self, message, time=None, position=None):
        super().__init__(message)
        self.time = time
        self.position = position


class NoProfileError(KppfrontsError):
    """Wave boundary-value solve diverged or left the positive cone."""
