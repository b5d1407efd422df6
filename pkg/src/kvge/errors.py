"""Exception hierarchy shared across the package."""


class KvgeError(Exception):
    """Base class for all errors raised by this package."""


class ExprSyntaxError(KvgeError):
    """Malformed expression source; carries the character offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownIdentifierError(KvgeError):
    """Identifier is neither an allowed variable, constant, nor function."""

    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier '{name}' (at offset {offset})")
        self.name = name
        self.offset = offset


class EvalDomainError(KvgeError):
    """Evaluation left the real domain (ln of nonpositive, 0^negative, ...)."""

    def __init__(self, message: str, subexpr: str):
        super().__init__(f"{message} in subexpression '{subexpr}'")
        self.subexpr = subexpr


class UnboundVariableError(KvgeError):
    """A variable in the expression has no binding."""


class QuadratureError(KvgeError):
    """Adaptive quadrature did not reach the requested tolerance."""


class HypothesisError(KvgeError):
    """A structural hypothesis of the existence theory fails for the input."""


class ValidationError(KvgeError):
    """Invalid configuration or problem data; names the offending key."""


class EmptyBoxError(KvgeError):
    """Extremal search over an empty box (lower bound above upper bound)."""


class DivergenceError(KvgeError):
    """Inner fixed-point iteration failed to converge at the damping floor."""

    def __init__(self, message: str, last_residual: float):
        super().__init__(f"{message} (last residual {last_residual:.3e})")
        self.last_residual = last_residual
