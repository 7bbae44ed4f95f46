"""Exception hierarchy shared across the package."""


class SyntraError(Exception):
    """Base class for all package-specific errors."""


class EmptyProgramPool(SyntraError):
    """No candidate program survived the training-example filter."""


class NoInformativeInput(SyntraError):
    """Every unresolved column is unanimous although multiple hypotheses
    remain; impossible for distinct hypotheses, so this signals a bug."""


class SizeGuardError(SyntraError):
    """An exhaustive comparator was called beyond its test-scale limits."""


class ReplayMismatch(SyntraError):
    """A replayed query diverged from the recorded transcript."""


class InteractiveSessionClosed(SyntraError):
    """The interactive labeler's input stream hit EOF mid-run."""


class TransportError(SyntraError):
    """A remote call failed after exhausting retries."""


class RunnerUnavailable(SyntraError):
    """The external guest-program runner is missing or broke protocol.

    Distinct from guest-program failure, which is an ordinary error output.
    """


class ConfigError(SyntraError):
    """Invalid run configuration (bad flag, unknown key, missing path)."""


class SchemaError(SyntraError):
    """A task record violated the task-file schema."""

    def __init__(self, message: str, task_id: str | None = None, field_path: str | None = None):
        self.task_id = task_id
        self.field_path = field_path
        prefix = ""
        if task_id is not None:
            prefix += f"task {task_id!r}: "
        if field_path is not None:
            prefix += f"{field_path}: "
        super().__init__(prefix + message)
