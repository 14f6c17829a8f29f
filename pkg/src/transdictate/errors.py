"""Exception hierarchy shared by every module."""


class TransDictError(Exception):
    """Base class for all package errors."""


class InputError(TransDictError, ValueError):
    """Malformed input, violated precondition, or bad configuration."""


class ParseError(InputError):
    """A file could not be parsed; ``line`` is 1-based when known."""

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)
        self.path = path
        self.line = line


class UnknownWordError(InputError):
    def __init__(self, words):
        self.words = sorted(set(words))
        super().__init__("word(s) not in lexicon: " + " ".join(self.words))


class InvariantError(TransDictError, RuntimeError):
    """An internal consistency check failed."""
