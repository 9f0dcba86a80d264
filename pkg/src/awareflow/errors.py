"""Exception hierarchy shared across the pipeline.

Exit codes used by the CLI map onto these classes; see cli.EXIT_CODES.
"""


class AwareflowError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(AwareflowError):
    """Invalid or infeasible configuration."""


class ParseError(AwareflowError):
    """A record failed schema validation while reading a file."""

    def __init__(self, path, line_no, message):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{self.path}:{line_no}: {message}")


class IntegrityError(AwareflowError):
    """Cross-record invariant violated (dangling keys, duplicates, ...)."""

    def __init__(self, message, violations=None):
        self.violations = list(violations or [])
        super().__init__(message)


class MissingArtifactError(AwareflowError):
    """A downstream stage was invoked before its upstream artifact exists."""

    def __init__(self, artifact, needed_command):
        self.artifact = str(artifact)
        self.needed_command = needed_command
        super().__init__(
            f"missing artifact {self.artifact!r}: run `{needed_command}` first"
        )


class CohortError(AwareflowError):
    """A cohort-based statistic was requested for an empty cohort."""


class AnalyticsError(AwareflowError):
    """Ill-posed analytics request (length mismatch, constant vector, ...)."""


class PatternSyntaxError(AwareflowError):
    """Query pattern failed to compile."""

    def __init__(self, pattern, position, message):
        self.pattern = pattern
        self.position = position
        super().__init__(f"pattern {pattern!r}, position {position}: {message}")


class DegenerateOutcomeError(AwareflowError):
    """Regression outcome vector is constant."""


class NumericalError(AwareflowError):
    """Numerical failure that persisted after fallbacks."""
