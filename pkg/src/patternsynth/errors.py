"""Shared exception types."""


class UsageError(ValueError):
    """A caller violated an operation's precondition."""


class DivergenceError(RuntimeError):
    """The integrator produced non-finite values (parameter blow-up)."""

    def __init__(self, time: float):
        super().__init__(f"simulation diverged at t={time:.6g}")
        self.time = time


class GenerationError(RuntimeError):
    """Dataset generation exhausted its attempt budget."""


class SessionStateError(UsageError):
    """A session operation was invoked in the wrong state."""
