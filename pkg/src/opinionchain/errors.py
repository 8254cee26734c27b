"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument violates a documented precondition (shape, range, length)."""


class ConfigurationError(ValueError):
    """A configuration is internally inconsistent or refers to missing pieces."""


class FileFormatError(ValueError):
    """A corpus, lexicon, embedding, or archive file is malformed.

    ``problems`` collects every offending record as ``(path, line, message)``
    so a single failure reports all malformed records at once.
    """

    def __init__(self, message, problems=None):
        super().__init__(message)
        self.problems = list(problems or [])

    def __str__(self):
        base = super().__str__()
        if not self.problems:
            return base
        lines = [base]
        for path, line, msg in self.problems:
            lines.append(f"  {path}:{line}: {msg}")
        return "\n".join(lines)


class EnumerationBudgetError(RuntimeError):
    """An exhaustive enumeration would exceed its guarded budget."""


class TrainingDivergedError(RuntimeError):
    """The objective became non-finite during optimization."""
