"""Exceptions raised by the operad calculus.

Every error derives from ``OperadError`` and from the builtin it refines, so callers
can catch either one.
"""

from typing import Optional


class OperadError(Exception):
    """Base class for all domain errors"""


class ArityMismatchError(OperadError, ValueError):
    """Operands live on different variable sets"""


class IndexOutOfRangeError(OperadError, IndexError):
    """A variable index is not a live label of the operand"""


class PoleOnDiagonalError(OperadError, ValueError):
    """Substitution z_i = z_j attempted across a pole"""


class UndefinedOrderError(OperadError, ValueError):
    """Pole order requested for the zero function"""


class InconsistentResidueError(OperadError, ArithmeticError):
    """A line coefficient came out non-constant; indicates an arithmetic bug"""


class TruncationInstabilityError(OperadError, ArithmeticError):
    """A truncated expansion changed when the truncation order was raised"""


class ExprSyntaxError(OperadError, ValueError):
    """Malformed expression text"""

    def __init__(self, message: str, position: Optional[int] = None):
        self.position = position
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class NonDiagonalDenominatorError(OperadError, ValueError):
    """A negative power was applied to something other than z_i - z_j"""


class VariableRangeError(OperadError, ValueError):
    """An expression mentions a variable index larger than the arity"""


class FormatError(OperadError, ValueError):
    """Malformed graph, forest, module or table text"""


class UnvalidatedOperationError(OperadError, ValueError):
    """A classical operation failed validation and cannot be inverted"""


class ProjectionError(OperadError, ValueError):
    """Chiral output has components above the predicted degree"""


class UnknownSuiteError(OperadError, KeyError):
    """No verification suite with the requested name"""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown suite"


class DimensionCheckError(OperadError, ArithmeticError):
    """A solution space has a shape the classical count rules out"""
