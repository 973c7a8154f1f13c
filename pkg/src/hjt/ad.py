"""Forward-mode automatic differentiation.

Two number types carry derivative information through ordinary Python
arithmetic:

* :class:`Dual` holds a value and its gradient (first order).
* :class:`HyperDual` additionally holds the Hessian (second order).

Both propagate a whole gradient vector at once, so a single evaluation of a
function on seeded inputs yields every partial derivative. User functions
must use the elementary functions of this module (``sqrt``, ``sin``, ...)
instead of ``math`` so they stay generic over floats and jets.
"""

from __future__ import annotations

import math

import numpy as np


class Dual:
    """Value plus gradient, ``a + g·ε``."""

    __slots__ = ("val", "grad")
    __array_priority__ = 1000

    def __init__(self, val, grad):
        self.val = float(val)
        self.grad = grad

    # construction helpers
    def _lift(self, c):
        return Dual(c, np.zeros_like(self.grad))

    def _apply(self, f0, f1, f2):
        return Dual(f0, f1 * self.grad)

    def __add__(self, o):
        if isinstance(o, Dual):
            return Dual(self.val + o.val, self.grad + o.grad)
        return Dual(self.val + o, self.grad)

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, Dual):
            return Dual(self.val - o.val, self.grad - o.grad)
        return Dual(self.val - o, self.grad)

    def __rsub__(self, o):
        return Dual(o - self.val, -self.grad)

    def __mul__(self, o):
        if isinstance(o, Dual):
            return Dual(self.val * o.val, self.grad * o.val + o.grad * self.val)
        return Dual(self.val * o, self.grad * o)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, Dual):
            return self * o._reciprocal()
        return Dual(self.val / o, self.grad / o)

    def __rtruediv__(self, o):
        return self._reciprocal() * o

    def _reciprocal(self):
        v = self.val
        if v == 0.0:
            raise ZeroDivisionError("division by a jet with zero value")
        return self._apply(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))

    def __neg__(self):
        return Dual(-self.val, -self.grad)

    def __pos__(self):
        return self

    def __pow__(self, k):
        if isinstance(k, (Dual, HyperDual)):
            return exp(k * log(self))
        return _power(self, k)

    def __rpow__(self, c):
        return exp(self * math.log(c))

    def __abs__(self):
        return -self if self.val < 0 else self

    # comparisons act on the value only (guards, branch selection)
    def __lt__(self, o):
        return self.val < _value(o)

    def __le__(self, o):
        return self.val <= _value(o)

    def __gt__(self, o):
        return self.val > _value(o)

    def __ge__(self, o):
        return self.val >= _value(o)

    def __float__(self):
        return self.val

    def __repr__(self):
        return f"{type(self).__name__}({self.val!r}, {self.grad!r})"


class HyperDual(Dual):
    """Value, gradient and Hessian carried together."""

    __slots__ = ("hess",)

    def __init__(self, val, grad, hess):
        self.val = float(val)
        self.grad = grad
        self.hess = hess

    def _lift(self, c):
        return HyperDual(c, np.zeros_like(self.grad), np.zeros_like(self.hess))

    def _apply(self, f0, f1, f2):
        g = self.grad
        return HyperDual(f0, f1 * g, f1 * self.hess + f2 * np.outer(g, g))

    def __add__(self, o):
        if isinstance(o, HyperDual):
            return HyperDual(self.val + o.val, self.grad + o.grad, self.hess + o.hess)
        return HyperDual(self.val + o, self.grad, self.hess)

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, HyperDual):
            return HyperDual(self.val - o.val, self.grad - o.grad, self.hess - o.hess)
        return HyperDual(self.val - o, self.grad, self.hess)

    def __rsub__(self, o):
        return HyperDual(o - self.val, -self.grad, -self.hess)

    def __mul__(self, o):
        if isinstance(o, HyperDual):
            cross = np.outer(self.grad, o.grad)
            return HyperDual(
                self.val * o.val,
                self.grad * o.val + o.grad * self.val,
                self.hess * o.val + o.hess * self.val + cross + cross.T,
            )
        return HyperDual(self.val * o, self.grad * o, self.hess * o)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, HyperDual):
            return self * o._reciprocal()
        return HyperDual(self.val / o, self.grad / o, self.hess / o)

    def __neg__(self):
        return HyperDual(-self.val, -self.grad, -self.hess)

    def __repr__(self):
        return f"HyperDual({self.val!r}, {self.grad!r}, {self.hess!r})"


Jet = (Dual, HyperDual)


def _value(x):
    return x.val if isinstance(x, Dual) else x


def value(x) -> float:
    """Strip derivative information."""
    return float(_value(x))


def _power(x, k):
    v = x.val
    if k == 0:
        return x._lift(1.0)
    if k == 1:
        return x
    if k == 2:
        return x._apply(v * v, 2.0 * v, 2.0)
    if float(k).is_integer() and k > 2:
        return x._apply(v**k, k * v ** (k - 1), k * (k - 1) * v ** (k - 2))
    if v == 0.0:
        raise ZeroDivisionError("non-integer power of a jet at zero")
    return x._apply(v**k, k * v ** (k - 1), k * (k - 1) * v ** (k - 2))


def _unary(x, fn, d1, d2):
    if isinstance(x, Dual):
        v = x.val
        return x._apply(fn(v), d1(v), d2(v))
    return fn(x)


def sqrt(x):
    if isinstance(x, Dual):
        s = math.sqrt(x.val)
        if s == 0.0:
            raise ZeroDivisionError("sqrt of a jet at zero is not differentiable")
        return x._apply(s, 0.5 / s, -0.25 / (s * x.val))
    return math.sqrt(x)


def sin(x):
    return _unary(x, math.sin, math.cos, lambda v: -math.sin(v))


def cos(x):
    return _unary(x, math.cos, lambda v: -math.sin(v), lambda v: -math.cos(v))


def exp(x):
    return _unary(x, math.exp, math.exp, math.exp)


def log(x):
    return _unary(x, math.log, lambda v: 1.0 / v, lambda v: -1.0 / (v * v))


def absolute(x):
    return abs(x)


def seed_first(x) -> list[Dual]:
    """Independent first-order variables at the point ``x``."""
    x = np.asarray(x, dtype=float)
    eye = np.eye(len(x))
    return [Dual(x[i], eye[i]) for i in range(len(x))]


def seed_second(x) -> list[HyperDual]:
    """Independent second-order variables at the point ``x``."""
    x = np.asarray(x, dtype=float)
    m = len(x)
    eye = np.eye(m)
    zero = np.zeros((m, m))
    return [HyperDual(x[i], eye[i], zero) for i in range(m)]


def gradient_of(y, m: int) -> np.ndarray:
    """Gradient part of an output, constants mapping to zero."""
    if isinstance(y, Dual):
        return np.array(y.grad, dtype=float)
    return np.zeros(m)


def hessian_of(y, m: int) -> np.ndarray:
    if isinstance(y, HyperDual):
        return np.array(y.hess, dtype=float)
    return np.zeros((m, m))
