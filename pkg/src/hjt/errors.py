"""Exception hierarchy.

Numerical failures derive from :class:`NumericalError` so the CLI can map
them to a single exit code.
"""


class HJTError(Exception):
    pass


class NumericalError(HJTError):
    pass


class GuardViolation(NumericalError):
    def __init__(self, point, what="point"):
        self.point = tuple(float(c) for c in point)
        super().__init__(f"{what} outside the guarded domain: {self.point}")


class GuardViolationAtStep(NumericalError):
    def __init__(self, step, trajectory=None):
        self.step = step
        self.trajectory = trajectory
        super().__init__(f"trajectory left the guarded domain at step {step}")


class NonFinite(NumericalError):
    pass


class DimensionMismatch(HJTError, ValueError):
    pass


class NumericallySingular(NumericalError):
    pass


class SingularHessian(NumericallySingular):
    pass


class SingularOmega(NumericallySingular):
    pass


class SingularInertia(NumericallySingular):
    pass


class InconsistentSingularSystem(NumericalError):
    pass


class EmptyGrid(HJTError, ValueError):
    pass


class NewtonDiverged(NumericalError):
    pass


class DegenerateFiberJacobian(NumericalError):
    pass


class NullVector(NumericalError):
    pass


class NotInAlgebra(HJTError, ValueError):
    pass


class ZeroPoint(NumericalError):
    pass


class ExpressionError(HJTError):
    pass


class ExprSyntaxError(ExpressionError):
    def __init__(self, message, line, col):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"{message} at line {line}, col {col}")


class UnknownIdentifier(ExpressionError):
    def __init__(self, name, line=1, col=1):
        self.name = name
        self.line = line
        self.col = col
        super().__init__(f"unknown identifier {name!r} at line {line}, col {col}")
