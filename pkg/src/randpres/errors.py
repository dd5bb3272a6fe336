"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Malformed argument: bad letter, wrong rank, bad weights, etc."""


class StructureError(InvalidInputError):
    """A multiplication table that does not define a group."""


class PreconditionError(ValueError):
    """An operation was called on an object it is not defined for."""


class CapacityError(RuntimeError):
    """A configured size cap would be exceeded."""


class ParseError(InvalidInputError):
    def __init__(self, message, lineno=None, source=None):
        self.lineno = lineno
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)
