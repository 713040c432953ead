"""Exception types shared by every representation."""


class K2Error(Exception):
    pass


class MalformedEncoding(K2Error, ValueError):
    """A byte stream ended inside a variable-length integer."""


class ParseError(K2Error, ValueError):
    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class NavigationError(K2Error):
    """Tried to descend from a node that has no children."""


class CorruptionError(K2Error):
    """Stored arrays are inconsistent with each other."""


class DimensionError(K2Error, ValueError):
    pass


class StructureError(K2Error):
    """A position does not hold the structure an operation requires."""
