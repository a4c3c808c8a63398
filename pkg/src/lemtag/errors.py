"""Exception hierarchy, grouped by the exit-code class the CLI maps them to."""


class LemtagError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 4


class InputError(LemtagError):
    """Malformed user-supplied data (corpora, reference lists, rule files)."""

    exit_code = 2


class ConfigError(LemtagError):
    """Invalid configuration (flags, key=value files, grid overrides)."""

    exit_code = 3


class ParseError(InputError):
    pass


class ReferenceListError(InputError):
    pass


class MorphError(InputError):
    pass


class RuleError(InputError):
    pass


class SplitError(ConfigError):
    pass


class TrainingDiverged(LemtagError):
    pass


class ModelFormatError(LemtagError):
    pass


class TaskMismatchError(LemtagError):
    pass
