"""Exception hierarchy shared by the library and the CLI."""


class TLCError(Exception):
    """Base class for all errors raised by tlcbounds."""


class InvalidArgumentError(TLCError, ValueError):
    pass


class ResourceLimitError(TLCError):
    pass


class NotRepresentableError(TLCError, ValueError):
    pass


class NotSubRootError(TLCError, ValueError):
    pass


class InvalidMatrixError(TLCError, ValueError):
    pass


class InvalidKernelError(InvalidMatrixError):
    pass


class InvalidClassError(TLCError, ValueError):
    pass


class NumericError(TLCError, ArithmeticError):
    pass


class ConfigError(TLCError):
    pass


class InputError(TLCError):
    pass
