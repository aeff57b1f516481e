"""Exception hierarchy.

Everything raised for bad user input derives from ``DisscoreError`` so the
command line can map it to exit status 1.
"""


class DisscoreError(Exception):
    """Base class for recoverable input problems."""


class ParseError(DisscoreError):
    """A file could not be parsed; carries the path and 1-based line."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)


class AlignmentError(ParseError):
    pass


class FormatError(ParseError):
    pass


class DuplicateEntryError(FormatError):
    pass


class MappingError(DisscoreError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class TrainingError(DisscoreError):
    pass


class InputError(DisscoreError):
    pass


class LabelError(InputError, LookupError):
    pass


class UndefinedStatisticError(DisscoreError, ValueError):
    pass
