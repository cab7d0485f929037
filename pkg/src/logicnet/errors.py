"""Exception types shared across the package."""


class DomainError(ValueError):
    """A precondition on arguments was violated (bad index, universe mismatch, arity)."""


class ConfigError(ValueError):
    """A config or data file is malformed, inconsistent, or has an unknown version."""


class BudgetExceededError(RuntimeError):
    """A combinatorial search hit its subset budget before finishing.

    Carries how many subsets were examined and how many were left.
    """

    def __init__(self, message, examined, remaining):
        super().__init__(message)
        self.examined = examined
        self.remaining = remaining


class CompilationError(RuntimeError):
    """A node value fell outside the declared bit width during compilation."""
