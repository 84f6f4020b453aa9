"""Scalar tower used throughout the engine.

Structural data (structure constants, dual-form signs, gamma matrices) stays in
exact arithmetic: ``int``/``Fraction`` for real quantities and :class:`GaussianRational`
for complex ones.  Field coefficients may instead be ``float``/``complex``; mixed
expressions demote to floating point at the first inexact operand.

Two wrappers extend the plain scalars:

* :class:`Dual` -- a nilpotent first-order perturbation ``a + b*tau`` (``tau**2 = 0``),
  used to take exact directional derivatives through any evaluation path.
* :class:`Jet` -- a value together with its first derivatives along the coframe
  directions; this is the coefficient type of differentiated fields.  ``grad=None``
  marks a coefficient whose derivatives were never supplied.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Mapping

Exact = (int, Fraction)


class GaussianRational:
    """Exact complex number with Fraction real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    def __repr__(self):
        return f"GaussianRational({self.re!r}, {self.im!r})"

    def __complex__(self):
        return complex(self.re) + 1j * complex(self.im)

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, Exact):
            return self.im == 0 and self.re == other
        if isinstance(other, (float, complex)):
            return complex(self) == complex(other)
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __add__(self, other):
        if isinstance(other, GaussianRational):
            return GaussianRational(self.re + other.re, self.im + other.im)
        if isinstance(other, Exact):
            return GaussianRational(self.re + other, self.im)
        if isinstance(other, (float, complex)):
            return complex(self) + other
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, GaussianRational):
            return GaussianRational(
                self.re * other.re - self.im * other.im,
                self.re * other.im + self.im * other.re,
            )
        if isinstance(other, Exact):
            return GaussianRational(self.re * other, self.im * other)
        if isinstance(other, (float, complex)):
            return complex(self) * other
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Exact):
            return GaussianRational(self.re / other, self.im / other)
        if isinstance(other, GaussianRational):
            n = other.re * other.re + other.im * other.im
            if n == 0:
                raise ZeroDivisionError("division by zero GaussianRational")
            return self * GaussianRational(other.re / n, -other.im / n)
        if isinstance(other, (float, complex)):
            return complex(self) / other
        return NotImplemented

    def __rtruediv__(self, other):
        n = self.re * self.re + self.im * self.im
        if n == 0:
            raise ZeroDivisionError("division by zero GaussianRational")
        inv = GaussianRational(self.re / n, -self.im / n)
        return inv * other

    def conjugate(self):
        return GaussianRational(self.re, -self.im)


I = GaussianRational(0, 1)


class Dual:
    """First-order perturbation ``a + b*tau`` with ``tau**2 == 0``.

    Arithmetic with plain scalars lifts them to ``Dual(x, 0)``; the ``eps``
    slot carries the exact derivative through products, quotients and
    conjugations.
    """

    __slots__ = ("a", "b")

    def __init__(self, a, b=0):
        self.a = a
        self.b = b

    def __repr__(self):
        return f"Dual({self.a!r}, {self.b!r})"

    def __eq__(self, other):
        if isinstance(other, Dual):
            return scalar_eq(self.a, other.a) and scalar_eq(self.b, other.b)
        return scalar_eq(self.a, other) and is_zero(self.b)

    def __bool__(self):
        return not (is_zero(self.a) and is_zero(self.b))

    def __neg__(self):
        return Dual(-self.a, -self.b)

    def __add__(self, other):
        if isinstance(other, Jet):
            return NotImplemented  # jets wrap duals, not the other way round
        if isinstance(other, Dual):
            return Dual(self.a + other.a, self.b + other.b)
        return Dual(self.a + other, self.b)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return NotImplemented
        if isinstance(other, Dual):
            return Dual(self.a * other.a, self.a * other.b + self.b * other.a)
        return Dual(self.a * other, self.b * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return NotImplemented
        if isinstance(other, Dual):
            oa = _as_ratio(other.a)
            inv = Dual(1 / oa, -other.b / (oa * oa))
            return self * inv
        other = _as_ratio(other)
        return Dual(self.a / other, self.b / other)

    def __rtruediv__(self, other):
        a = _as_ratio(self.a)
        inv = Dual(1 / a, -self.b / (a * a))
        return inv * other

    def conjugate(self):
        return Dual(conj(self.a), conj(self.b))


class MissingJet(Exception):
    """Raised when a derivative of a coefficient is needed but was not supplied."""


class Jet:
    """Scalar with first derivatives along coframe directions.

    ``grad`` maps a direction index to the derivative value; absent keys are
    zero.  ``grad=None`` records that derivative data is unavailable, which is
    an error only once something actually differentiates the coefficient.
    """

    __slots__ = ("value", "grad")

    def __init__(self, value, grad: Mapping[int, Any] | None = ()):
        self.value = value
        if grad is None:
            self.grad = None
        else:
            self.grad = {k: v for k, v in dict(grad).items() if not is_zero(v)}

    def __repr__(self):
        return f"Jet({self.value!r}, {self.grad!r})"

    def partial(self, direction: int):
        if self.grad is None:
            raise MissingJet(f"coefficient {self.value!r} has no derivative data")
        return self.grad.get(direction, 0)

    def __eq__(self, other):
        if isinstance(other, Jet):
            return scalar_eq(self.value, other.value) and self._grad_eq(other.grad)
        return scalar_eq(self.value, other) and self._grad_eq({})

    def _grad_eq(self, other_grad):
        if self.grad is None or other_grad is None:
            return self.grad is None and other_grad is None
        keys = set(self.grad) | set(other_grad)
        return all(scalar_eq(self.grad.get(k, 0), other_grad.get(k, 0)) for k in keys)

    def __bool__(self):
        if not is_zero(self.value):
            return True
        if self.grad is None:
            return True  # unknown derivatives: cannot prove zero
        return any(not is_zero(v) for v in self.grad.values())

    def __neg__(self):
        g = None if self.grad is None else {k: -v for k, v in self.grad.items()}
        return Jet(-self.value, g)

    def __add__(self, other):
        if isinstance(other, Jet):
            if self.grad is None or other.grad is None:
                g = None
            else:
                g = dict(self.grad)
                for k, v in other.grad.items():
                    g[k] = g.get(k, 0) + v
            return Jet(self.value + other.value, g)
        return Jet(self.value + other, self.grad)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            if is_zero(self.value) and self.grad == {}:
                return Jet(0)
            if is_zero(other.value) and other.grad == {}:
                return Jet(0)
            if self.grad is None or other.grad is None:
                g = None
            else:
                g = {k: v * other.value for k, v in self.grad.items()}
                for k, v in other.grad.items():
                    g[k] = g.get(k, 0) + self.value * v
            return Jet(self.value * other.value, g)
        if is_zero(other):
            return Jet(0)
        g = None if self.grad is None else {k: v * other for k, v in self.grad.items()}
        return Jet(self.value * other, g)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other._reciprocal()
        return self * (1 / _as_ratio(other))

    def __rtruediv__(self, other):
        return self._reciprocal() * other

    def _reciprocal(self):
        v = 1 / _as_ratio(self.value)
        g = None if self.grad is None else {k: -w * v * v for k, w in self.grad.items()}
        return Jet(v, g)

    def conjugate(self):
        g = None if self.grad is None else {k: conj(v) for k, v in self.grad.items()}
        return Jet(conj(self.value), g)


def _as_ratio(x):
    # exact division for ints: 1/2 must stay exact
    if isinstance(x, int):
        return Fraction(x)
    return x


def conj(x):
    """Complex conjugate across the whole tower."""
    if isinstance(x, (int, Fraction, float)):
        return x
    return x.conjugate()


def is_zero(x) -> bool:
    """Exact zero test (floats compare against literal 0.0)."""
    if isinstance(x, (Jet, Dual, GaussianRational)):
        return not bool(x)
    return x == 0


def scalar_eq(x, y) -> bool:
    if isinstance(x, Jet) or isinstance(y, Jet):
        if not isinstance(x, Jet):
            x, y = y, x
        return x == y
    if isinstance(x, Dual) or isinstance(y, Dual):
        if not isinstance(x, Dual):
            x, y = y, x
        return x == y
    return is_zero(x - y)


def is_exact(x) -> bool:
    """True when x carries no floating-point contamination."""
    if isinstance(x, Exact):
        return True
    if isinstance(x, GaussianRational):
        return True
    if isinstance(x, Dual):
        return is_exact(x.a) and is_exact(x.b)
    if isinstance(x, Jet):
        if not is_exact(x.value):
            return False
        return x.grad is not None and all(is_exact(v) for v in x.grad.values())
    return False


def to_complex(x) -> complex:
    """Numeric value, dropping Dual/Jet derivative slots."""
    if isinstance(x, Jet):
        return to_complex(x.value)
    if isinstance(x, Dual):
        return to_complex(x.a)
    return complex(x)


def dual_part(x):
    """The tau-coefficient of x (0 for plain scalars)."""
    if isinstance(x, Jet):
        return dual_part(x.value)
    if isinstance(x, Dual):
        return x.b
    return 0


def magnitude(x) -> float:
    """max-abs over real/imaginary parts, recursing into derivative slots."""
    if isinstance(x, Jet):
        m = magnitude(x.value)
        if x.grad:
            m = max(m, max(magnitude(v) for v in x.grad.values()))
        return m
    if isinstance(x, Dual):
        return max(magnitude(x.a), magnitude(x.b))
    z = to_complex(x)
    return max(abs(z.real), abs(z.imag))
