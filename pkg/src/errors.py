class ContextError(ValueError):
    """Operands live in different variable contexts, orderings or fields."""


class DomainError(ValueError):
    """An operation was applied outside its mathematical domain."""


class InputError(ValueError):
    """Input data violates the documented shape (duplicates, zero sets, ...)."""


class PreconditionError(ValueError):
    """A predicate or evaluator was called on an input it is not defined for."""


class VerificationError(RuntimeError):
    """The Buchberger oracle disagrees with an involutive computation."""


class ParseError(ValueError):
    def __init__(self, message, line=0, column=0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column
