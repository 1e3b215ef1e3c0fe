"""Exception types shared across the package.

Config problems map to CLI exit code 2, numerical failures to exit code 3.
"""


class ConfigError(ValueError):
    """A configuration file or config object violates the documented schema."""


class NumericallySingularError(ArithmeticError):
    """A linear system is singular or too ill-conditioned to solve reliably.

    Carries the condition-number estimate that triggered the failure.
    """

    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class PlacementInfeasibleError(NumericallySingularError):
    """The chosen redundant-subcarrier placement makes the tail-zeroing
    system singular; pick a different index set."""


class NearSingularChannelError(ArithmeticError):
    """A channel frequency response is (numerically) zero on an active
    subcarrier, so zero-forcing equalization is undefined."""
