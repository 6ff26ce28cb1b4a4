"""Leading-order arithmetic on functions of the form ``alpha * eps**beta * exp(-gamma/eps)``.

Every rate, time and invariant weight handled by the package is one of these
orders.  The set is closed under addition (keeping only the dominant term),
multiplication and reciprocals, and any two non-zero elements are comparable
as ``eps -> 0``: either one is negligible against the other or their ratio
tends to a positive constant.
"""

from __future__ import annotations

import enum
import functools
import math
import numbers
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .errors import (
    DivisionByZeroOrder,
    EvaluationOverflow,
    NonFinite,
    NonPositiveCoefficient,
    ZeroOrderComparison,
)

__all__ = [
    "AsymptoticOrder",
    "ZERO",
    "ONE",
    "Relation",
    "ScaleComparison",
    "make",
    "evaluate",
    "log_evaluate",
    "add",
    "total",
    "mul",
    "recip",
    "scale",
    "ratio_limit",
    "compare_scale",
]

_LOG_MAX = math.log(1.7976931348623157e308)


@dataclass(frozen=True)
class AsymptoticOrder:
    """Positive function ``alpha * eps**beta * exp(-gamma/eps)`` or the Zero order.

    Zero is the instance with ``alpha == 0`` (and ``beta == gamma == 0``).
    Use :func:`make` to build validated non-zero orders.
    """

    alpha: float
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not isinstance(v, numbers.Real) or isinstance(v, bool) or not math.isfinite(v):
                raise NonFinite(f"{name}={v!r} is not a finite real")
            object.__setattr__(self, name, float(v) + 0.0)  # drop -0.0
        if self.alpha < 0:
            raise NonPositiveCoefficient(f"alpha={self.alpha} must be positive")
        if self.alpha == 0 and (self.beta != 0 or self.gamma != 0):
            raise NonPositiveCoefficient("alpha=0 is reserved for the Zero order")

    @property
    def is_zero(self) -> bool:
        return self.alpha == 0.0

    def _key(self):
        # larger key == larger order as eps -> 0
        return (-self.gamma, -self.beta)

    def __add__(self, other):
        if not isinstance(other, AsymptoticOrder):
            return NotImplemented
        return add(self, other)

    def __mul__(self, other):
        if isinstance(other, AsymptoticOrder):
            return mul(self, other)
        if isinstance(other, numbers.Real):
            return scale(self, other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, AsymptoticOrder):
            return mul(self, recip(other))
        if isinstance(other, numbers.Real):
            return scale(self, 1.0 / other)
        return NotImplemented

    def __call__(self, eps: float) -> float:
        return evaluate(self, eps)

    def __str__(self):
        if self.is_zero:
            return "0"
        parts = [f"{self.alpha:g}"]
        if self.beta != 0:
            parts.append(f"eps^{self.beta:g}")
        if self.gamma != 0:
            parts.append(f"exp({-self.gamma:g}/eps)")
        return "*".join(parts)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma}


ZERO = AsymptoticOrder(0.0)
ONE = AsymptoticOrder(1.0)


class Relation(enum.Enum):
    MUCH_SMALLER = "<<"
    COMMENSURATE = "~"
    MUCH_LARGER = ">>"


class ScaleComparison(NamedTuple):
    relation: Relation
    constant: float | None = None  # limit of x/y when commensurate

    def __str__(self):
        if self.relation is Relation.COMMENSURATE:
            return f"~{self.constant:g}"
        return self.relation.value


def make(alpha: float, beta: float = 0.0, gamma: float = 0.0) -> AsymptoticOrder:
    """Build a non-zero order, rejecting ``alpha <= 0`` and non-finite fields."""
    for name, v in (("alpha", alpha), ("beta", beta), ("gamma", gamma)):
        if not math.isfinite(v):
            raise NonFinite(f"{name}={v!r} is not a finite real")
    if alpha <= 0:
        raise NonPositiveCoefficient(f"alpha={alpha} must be positive")
    return AsymptoticOrder(alpha, beta, gamma)


def log_evaluate(x: AsymptoticOrder, eps: float) -> float:
    """Natural log of ``x(eps)``; ``-inf`` for Zero."""
    if not eps > 0:
        raise ValueError(f"eps={eps} must be positive")
    if x.is_zero:
        return -math.inf
    return math.log(x.alpha) + x.beta * math.log(eps) - x.gamma / eps


def evaluate(x: AsymptoticOrder, eps: float) -> float:
    """Numeric value of ``x`` at a concrete ``eps``.

    Underflow silently gives 0.0; overflow raises :class:`EvaluationOverflow`.
    """
    lv = log_evaluate(x, eps)
    if lv > _LOG_MAX:
        raise EvaluationOverflow(f"{x} at eps={eps} exceeds the double range")
    return math.exp(lv)


def add(x: AsymptoticOrder, y: AsymptoticOrder) -> AsymptoticOrder:
    """Leading order of ``x + y``; a negligible summand is dropped."""
    if x.is_zero:
        return y
    if y.is_zero:
        return x
    kx, ky = x._key(), y._key()
    if kx > ky:
        return x
    if ky > kx:
        return y
    return AsymptoticOrder(x.alpha + y.alpha, x.beta, x.gamma)


def total(xs: Iterable[AsymptoticOrder]) -> AsymptoticOrder:
    return functools.reduce(add, xs, ZERO)


def mul(x: AsymptoticOrder, y: AsymptoticOrder) -> AsymptoticOrder:
    if x.is_zero or y.is_zero:
        return ZERO
    return AsymptoticOrder(x.alpha * y.alpha, x.beta + y.beta, x.gamma + y.gamma)


def recip(x: AsymptoticOrder) -> AsymptoticOrder:
    if x.is_zero:
        raise DivisionByZeroOrder("reciprocal of the Zero order")
    return AsymptoticOrder(1.0 / x.alpha, -x.beta, -x.gamma)


def scale(x: AsymptoticOrder, c: float) -> AsymptoticOrder:
    if not (math.isfinite(c) and c > 0):
        raise NonPositiveCoefficient(f"scale factor {c} must be positive and finite")
    if x.is_zero:
        return ZERO
    return AsymptoticOrder(x.alpha * c, x.beta, x.gamma)


def ratio_limit(x: AsymptoticOrder, y: AsymptoticOrder) -> float:
    """``lim x/y`` as ``eps -> 0``: ``0.0``, a positive constant, or ``math.inf``."""
    if y.is_zero:
        raise DivisionByZeroOrder("ratio limit with a Zero denominator")
    if x.is_zero:
        return 0.0
    kx, ky = x._key(), y._key()
    if kx < ky:
        return 0.0
    if kx > ky:
        return math.inf
    return x.alpha / y.alpha


def compare_scale(x: AsymptoticOrder, y: AsymptoticOrder) -> ScaleComparison:
    if x.is_zero or y.is_zero:
        raise ZeroOrderComparison("cannot compare the scale of a Zero order")
    c = ratio_limit(x, y)
    if c == 0.0:
        return ScaleComparison(Relation.MUCH_SMALLER)
    if c == math.inf:
        return ScaleComparison(Relation.MUCH_LARGER)
    return ScaleComparison(Relation.COMMENSURATE, c)
