"""Exception hierarchy shared by all modules."""


class PseudospecError(Exception):
    """Base class for errors raised by this package."""


class ExprSyntaxError(PseudospecError, SyntaxError):
    """Malformed generating-function source.

    ``offset`` is the 1-based byte offset of the offending token.
    """

    def __init__(self, message: str, source: str, offset: int):
        SyntaxError.__init__(self, f"{message} at offset {offset}")
        self.msg = message
        self.text = source
        self.offset = offset


class UnknownFunction(ExprSyntaxError):
    pass


class DomainError(PseudospecError, ArithmeticError):
    """A function was evaluated outside its domain (ln(0), 1/0, ...)."""


class ConstructionError(PseudospecError):
    """Base for failures of the first-order-operator construction."""


class InconsistentSpec(ConstructionError, ValueError):
    pass


class SingularSuperpotential(ConstructionError):
    pass


class NonSimpleZero(ConstructionError):
    pass


class PotentialSingular(ConstructionError):
    pass


class QuadratureError(ConstructionError):
    pass


class GridError(PseudospecError, ValueError):
    pass


class DimensionMismatch(PseudospecError, ValueError):
    pass


class ZeroVector(PseudospecError, ValueError):
    pass


class NoConvergence(PseudospecError):
    def __init__(self, message: str, block: tuple[int, int]):
        super().__init__(message)
        self.block = block


class NonFinite(PseudospecError, ValueError):
    pass
