"""Exception hierarchy shared by every module.

The CLI maps these onto process exit codes, so each class carries the code
it should produce.
"""


class BotGanError(Exception):
    exit_code = 1


class ConfigError(BotGanError, ValueError):
    """Invalid configuration or command-line usage."""

    exit_code = 1


class ShapeError(BotGanError, ValueError):
    """Array dimensions do not agree with what an operation expects."""

    exit_code = 2


class DomainError(BotGanError, ValueError):
    """Input is well formed but outside the operation's domain."""

    exit_code = 2


class FormatError(BotGanError, ValueError):
    """A binary file (dataset or checkpoint) is malformed."""

    exit_code = 2


class ParseError(BotGanError, ValueError):
    """A text input (CSV) could not be parsed."""

    exit_code = 2


class ManifestError(BotGanError, ValueError):
    """A CSV import manifest does not match the file it describes."""

    exit_code = 2


class NumericError(BotGanError, ArithmeticError):
    """Non-finite values appeared where finite ones are required."""

    exit_code = 3
