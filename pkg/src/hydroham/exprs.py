"""Immutable expression trees over n field variables, with scalar and jet
evaluation and randomized identity testing.

Expressions carry exact rational literals, variables u1..un, the four
arithmetic operations, powers with constant rational exponent, and the
elementary functions exp, ln, sin, cos, sqrt.  They are frozen dataclasses,
so trees compare structurally and are safe to share across threads.

Evaluation is recursive over one of two carriers: plain floats
(:func:`eval_scalar`) or :class:`~hydroham.jets.Jet` values
(:func:`eval_jet`), which supply every partial derivative used by the
geometry layer.  Domain violations (log of a non-positive value, division by
zero, a negative base under a fractional power) raise
:class:`~hydroham.errors.EvalDomainError` carrying the offending subtree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

import numpy as np

from .errors import EvalDomainError
from .jets import Jet, JetDomainError
from .reports import CheckReport, ConditionResult
from .sampling import SamplePlan, resolve_point

FUNCTIONS = ("exp", "ln", "sin", "cos", "sqrt")

Number = Union[int, float, Fraction]


class Expr:
    """Base node.  Subclasses are frozen dataclasses; build trees either via
    the parser or via Python operators on nodes."""

    __slots__ = ()

    def __add__(self, other):
        return BinOp("+", self, as_expr(other))

    def __radd__(self, other):
        return BinOp("+", as_expr(other), self)

    def __sub__(self, other):
        return BinOp("-", self, as_expr(other))

    def __rsub__(self, other):
        return BinOp("-", as_expr(other), self)

    def __mul__(self, other):
        return BinOp("*", self, as_expr(other))

    def __rmul__(self, other):
        return BinOp("*", as_expr(other), self)

    def __truediv__(self, other):
        return BinOp("/", self, as_expr(other))

    def __rtruediv__(self, other):
        return BinOp("/", as_expr(other), self)

    def __pow__(self, exponent):
        if isinstance(exponent, float):
            exponent = Fraction(exponent)
        if not isinstance(exponent, (int, Fraction)):
            raise TypeError("exponent must be a constant integer or rational")
        return Power(self, Fraction(exponent))

    def __neg__(self):
        return Neg(self)


@dataclass(frozen=True, slots=True)
class Const(Expr):
    value: Fraction

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True, slots=True)
class NamedConst(Expr):
    name: str
    value: float

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class Var(Expr):
    index: int  # 0-based; displayed 1-based

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("variable index must be non-negative")

    def __str__(self):
        return f"u{self.index + 1}"


@dataclass(frozen=True, slots=True)
class BinOp(Expr):
    op: str  # one of + - * /
    left: Expr
    right: Expr

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True, slots=True)
class Power(Expr):
    base: Expr
    exponent: Fraction

    def __str__(self):
        return f"({self.base})^({self.exponent})"


@dataclass(frozen=True, slots=True)
class Neg(Expr):
    arg: Expr

    def __str__(self):
        return f"(-{self.arg})"


@dataclass(frozen=True, slots=True)
class Call(Expr):
    func: str
    arg: Expr

    def __post_init__(self):
        if self.func not in FUNCTIONS:
            raise ValueError(f"unknown function {self.func!r}")

    def __str__(self):
        return f"{self.func}({self.arg})"


@dataclass(frozen=True, slots=True)
class Deriv(Expr):
    """Partial derivative d/du_k of a subtree, evaluated through jets.

    Used by preset builders whose coefficient functions contain derivatives
    of user-supplied functions; scalar evaluation costs one order-1 jet of
    the argument, jet evaluation one jet of order+1 (so at most one level of
    nesting is available at the default order)."""

    arg: Expr
    index: int

    def __str__(self):
        return f"d{self.index + 1}({self.arg})"


# -- construction helpers ---------------------------------------------------


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Const(Fraction(x))
    if isinstance(x, float):
        return Const(Fraction(x))
    raise TypeError(f"cannot interpret {x!r} as an expression")


def const(x: Number) -> Const:
    return Const(Fraction(x))


def variables(n: int) -> tuple[Var, ...]:
    return tuple(Var(i) for i in range(n))


def exp(e) -> Call:
    return Call("exp", as_expr(e))


def ln(e) -> Call:
    return Call("ln", as_expr(e))


def sin(e) -> Call:
    return Call("sin", as_expr(e))


def cos(e) -> Call:
    return Call("cos", as_expr(e))


def sqrt(e) -> Call:
    return Call("sqrt", as_expr(e))


def max_var_index(e: Expr) -> int:
    """Largest 0-based variable index in the tree, -1 for constant trees."""
    if isinstance(e, Var):
        return e.index
    if isinstance(e, BinOp):
        return max(max_var_index(e.left), max_var_index(e.right))
    if isinstance(e, Power):
        return max_var_index(e.base)
    if isinstance(e, (Neg, Call, Deriv)):
        return max_var_index(e.arg)
    return -1


def var_indices(e: Expr) -> frozenset[int]:
    if isinstance(e, Var):
        return frozenset((e.index,))
    if isinstance(e, BinOp):
        return var_indices(e.left) | var_indices(e.right)
    if isinstance(e, Power):
        return var_indices(e.base)
    if isinstance(e, (Neg, Call, Deriv)):
        return var_indices(e.arg)
    return frozenset()


# -- evaluation --------------------------------------------------------------


def _float_call(func: str, x: float, node: Expr, point) -> float:
    if func == "exp":
        try:
            return math.exp(x)
        except OverflowError:
            raise EvalDomainError("overflow in exp", str(node), point) from None
    if func == "ln":
        if x <= 0.0:
            raise EvalDomainError(f"ln of non-positive value {x!r}", str(node), point)
        return math.log(x)
    if func == "sqrt":
        if x < 0.0:
            raise EvalDomainError(f"sqrt of negative value {x!r}", str(node), point)
        return math.sqrt(x)
    if func == "sin":
        return math.sin(x)
    return math.cos(x)


def _float_pow(base: float, q: Fraction, node: Expr, point) -> float:
    if q.denominator == 1:
        e = int(q)
        if base == 0.0 and e < 0:
            raise EvalDomainError("zero base with negative exponent", str(node), point)
        try:
            return float(base ** e)
        except OverflowError:
            raise EvalDomainError("overflow in power", str(node), point) from None
    if base < 0.0:
        raise EvalDomainError(
            f"negative base {base!r} with fractional exponent", str(node), point
        )
    if base == 0.0 and q < 0:
        raise EvalDomainError("zero base with negative exponent", str(node), point)
    try:
        return math.pow(base, float(q))
    except (OverflowError, ValueError):
        raise EvalDomainError("overflow in power", str(node), point) from None


def _eval(node: Expr, carriers, point, is_jet: bool):
    if isinstance(node, Const):
        v = float(node.value)
        return Jet.constant(v, carriers[0].n, carriers[0].order) if is_jet else v
    if isinstance(node, NamedConst):
        return Jet.constant(node.value, carriers[0].n, carriers[0].order) if is_jet else node.value
    if isinstance(node, Var):
        if node.index >= len(carriers):
            raise ValueError(
                f"variable u{node.index + 1} out of range for dimension {len(carriers)}"
            )
        return carriers[node.index]
    if isinstance(node, Neg):
        return -_eval(node.arg, carriers, point, is_jet)
    if isinstance(node, BinOp):
        left = _eval(node.left, carriers, point, is_jet)
        right = _eval(node.right, carriers, point, is_jet)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        # division
        if is_jet:
            try:
                return left / right
            except JetDomainError as err:
                raise EvalDomainError(str(err), str(node), point) from None
        if right == 0.0:
            raise EvalDomainError("division by zero", str(node), point)
        return left / right
    if isinstance(node, Power):
        base = _eval(node.base, carriers, point, is_jet)
        if is_jet:
            try:
                return base ** node.exponent
            except JetDomainError as err:
                raise EvalDomainError(str(err), str(node), point) from None
        return _float_pow(base, node.exponent, node, point)
    if isinstance(node, Call):
        arg = _eval(node.arg, carriers, point, is_jet)
        if is_jet:
            try:
                return getattr(arg, "log" if node.func == "ln" else node.func)()
            except JetDomainError as err:
                raise EvalDomainError(str(err), str(node), point) from None
        return _float_call(node.func, arg, node, point)
    if isinstance(node, Deriv):
        if is_jet:
            inner = eval_jet(node.arg, point, carriers[0].order + 1)
            return inner.partial(node.index)
        return eval_jet(node.arg, point, 1).gradient()[node.index]
    raise TypeError(f"not an expression node: {node!r}")


def eval_scalar(e: Expr, point) -> float:
    """IEEE double value of e at the point."""
    pt = [float(x) for x in point]
    return _eval(e, pt, pt, False)


def eval_jet(e: Expr, point, order: int = 2) -> Jet:
    """All mixed partials of e at the point up to total degree ``order``,
    propagated through the tree by jet arithmetic (no finite differencing)."""
    pt = [float(x) for x in point]
    n = len(pt)
    carriers = [Jet.variable(i, pt[i], n, order) for i in range(n)]
    return _eval(e, carriers, pt, True)


# -- identity testing ---------------------------------------------------------

Field = Union[Expr, Callable[[np.ndarray], float]]


def field_value(f: Field, point) -> float:
    """Evaluate an expression or a callable scalar field at a point."""
    if isinstance(f, Expr):
        return eval_scalar(f, point)
    return float(f(point))


def fields_equal_numeric(
    f1: Field, f2: Field, plan: SamplePlan, title: str = "fields equal"
) -> CheckReport:
    """Pointwise comparison of two scalar fields on the plan's sample set.

    Passes iff |f1 - f2| <= tol * max(1, |f1|, |f2|) + floor at every point.
    The reported residual is |f1 - f2| / max(1, |f1|, |f2|).
    """

    def both(p):
        return field_value(f1, p), field_value(f2, p)

    worst = 0.0
    witness = None
    ok = True
    for i in range(plan.count):
        p, (v1, v2) = resolve_point(plan, i, both)
        raw = abs(v1 - v2)
        scale = max(1.0, abs(v1), abs(v2))
        if raw > plan.tolerance * scale + plan.floor:
            ok = False
        norm = raw / scale
        if norm > worst:
            worst = norm
            witness = p
    cond = ConditionResult(
        cid="pointwise_equal",
        description="values agree at every sample point",
        residual=worst,
        witness=None if worst == 0.0 else tuple(float(x) for x in witness),
        passed=ok,
    )
    return CheckReport(title=title, conditions=[cond], plan=plan)


def expr_equal_numeric(e1: Expr, e2: Expr, plan: SamplePlan) -> CheckReport:
    """Randomized identity test between two expression trees."""
    return fields_equal_numeric(e1, e2, plan, title="expressions equal")
