"""Diagnostics raised by the compiler phases and the oracle.

Compile-time errors carry a (line, col) location. The names TypeError and
NameError intentionally mirror the language-level errors they report; use
qualified access (errors.TypeError) to avoid shadowing the builtins.
"""


class VpycError(Exception):
    """Base class for all vpyc diagnostics."""

    def __init__(self, line, col, message):
        self.line = line
        self.col = col
        self.message = message
        super().__init__(f"{line}:{col}: {message}")


class LexError(VpycError):
    pass


class ParseError(VpycError):
    def __init__(self, line, col, message, expected=()):
        self.expected = tuple(expected)
        super().__init__(line, col, message)


class SubsetError(VpycError):
    """Recognized Python construct outside the supported subset."""


class AstFormatError(Exception):
    def __init__(self, line, message):
        self.line = line
        self.message = message
        super().__init__(f"oast:{line}: {message}")


class TypeError(VpycError):  # noqa: A001 - language-level type error
    pass


class NameError(VpycError):  # noqa: A001 - language-level name error
    def __init__(self, line, col, name):
        self.name = name
        super().__init__(line, col, f"name '{name}' is not defined")


class NonlocalError(VpycError):
    pass


class IteratorMutationError(VpycError):
    def __init__(self, line, col, name):
        self.name = name
        super().__init__(line, col, f"for-range iterator '{name}' is immutable")


class InternalError(Exception):
    """Compiler bug guard: untyped/unslotted node reached the backend."""


class UnsupportedBackend(Exception):
    def __init__(self, backend):
        self.backend = backend
        super().__init__(f"backend '{backend}' is not implemented")


class ToolchainError(Exception):
    def __init__(self, message, output=""):
        self.output = output
        super().__init__(message + ("\n" + output if output else ""))


class Trap(Exception):
    """Runtime trap raised by the oracle; maps to a nonzero exit."""

    exit_code = 70

    def __init__(self, line, col, message):
        self.line = line
        self.col = col
        self.message = message
        super().__init__(message)


class TrapDivByZero(Trap):
    def __init__(self, line, col):
        super().__init__(line, col, "divide by zero")


class TrapIndexOutOfRange(Trap):
    def __init__(self, line, col, idx, length):
        self.idx = idx
        self.length = length
        super().__init__(line, col, f"index {idx} out of range (len {length})")


class TrapHeapExhausted(Trap):
    def __init__(self, line, col, requested):
        self.requested = requested
        super().__init__(line, col, f"heap exhausted allocating {requested} bytes")
