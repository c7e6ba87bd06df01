"""
Expression trees, domain predicates and their numeric evaluation.

Expressions are immutable ``attrs`` value classes. Addition and multiplication are
strictly binary; subtraction and division do not exist as nodes (``a - b`` is
``Add(a, Neg(b))`` and ``a / b`` is ``Mul(a, Recip(b))``).

Constants are exact Gaussian rationals. Evaluation happens in complex double
precision: a point whose evaluation divides by zero, leaves a function's domain or
overflows to a non-finite number raises :class:`DomainViolation`.
"""

from __future__ import annotations

import cmath
import logging
from fractions import Fraction
from typing import TYPE_CHECKING, FrozenSet, Iterator, Mapping, Tuple, Union

from attrs import field, frozen

from errors import DomainViolation, Overflow, UnboundVariable, UnsupportedArity

if TYPE_CHECKING:
    from registry import Registry

logger = logging.getLogger(__name__)

Env = Mapping[str, complex]


@frozen
class Gaussian:
    """An exact Gaussian rational ``re + im*i``."""

    re: Fraction = field(converter=Fraction)
    im: Fraction = field(default=Fraction(0), converter=Fraction)

    @classmethod
    def of(cls, value: Union["Gaussian", int, float, Fraction, complex, str]) -> "Gaussian":
        if isinstance(value, Gaussian):
            return value
        if isinstance(value, complex):
            return cls(Fraction(value.real), Fraction(value.imag))
        return cls(Fraction(value))

    def __add__(self, other: "Gaussian") -> "Gaussian":
        return Gaussian(self.re + other.re, self.im + other.im)

    def __mul__(self, other: "Gaussian") -> "Gaussian":
        return Gaussian(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def __neg__(self) -> "Gaussian":
        return Gaussian(-self.re, -self.im)

    def reciprocal(self) -> "Gaussian":
        norm = self.re * self.re + self.im * self.im
        if norm == 0:
            raise ZeroDivisionError("reciprocal of zero")
        return Gaussian(self.re / norm, -self.im / norm)

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    @property
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    @property
    def is_real(self) -> bool:
        return self.im == 0

    @property
    def is_integer(self) -> bool:
        return self.im == 0 and self.re.denominator == 1


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------


@frozen
class Expr:
    """Base class of every expression node."""


@frozen
class Const(Expr):
    value: Gaussian = field(converter=Gaussian.of)


@frozen
class Var(Expr):
    name: str


@frozen
class Add(Expr):
    left: Expr
    right: Expr


@frozen
class Mul(Expr):
    left: Expr
    right: Expr


@frozen
class Neg(Expr):
    arg: Expr


@frozen
class Recip(Expr):
    arg: Expr


def _check_arity(instance, attribute, value):
    if not 1 <= len(value) <= 2:
        raise UnsupportedArity(
            f"{instance.fn} applied to {len(value)} arguments; only 1 or 2 are supported"
        )


@frozen
class Apply(Expr):
    fn: str
    args: Tuple[Expr, ...] = field(converter=tuple, validator=_check_arity)


ZERO = Const(0)
ONE = Const(1)


# ---------------------------------------------------------------------------
# Domain predicates
# ---------------------------------------------------------------------------

Bound = Union[Fraction, float]


def _bound(value) -> Bound:
    if isinstance(value, float) and cmath.isinf(value):
        return value
    return Fraction(value)


@frozen
class DomainPred:
    """Base class of every domain predicate."""


@frozen
class TruePred(DomainPred):
    pass


@frozen
class And(DomainPred):
    left: DomainPred
    right: DomainPred


@frozen
class NonZero(DomainPred):
    e: Expr


@frozen
class IsReal(DomainPred):
    e: Expr


@frozen
class InOpenInterval(DomainPred):
    """``lo < e < hi`` for a real ``e``; the bounds may be infinite."""

    e: Expr
    lo: Bound = field(converter=_bound)
    hi: Bound = field(converter=_bound)


@frozen
class Named(DomainPred):
    pred: str
    e: Expr


TRUE = TruePred()
INF = float("inf")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def finite(value: complex) -> complex:
    if not cmath.isfinite(value):
        raise Overflow(f"non-finite value {value}")
    return value


def evaluate(e: Expr, env: Env, reg: "Registry") -> complex:
    """Evaluate ``e`` at the point ``env``."""
    match e:
        case Const(value):
            try:
                return complex(value)
            except OverflowError:
                raise Overflow("constant exceeds double precision") from None
        case Var(name):
            try:
                return complex(env[name])
            except KeyError:
                raise UnboundVariable(name) from None
        case Add(left, right):
            return finite(evaluate(left, env, reg) + evaluate(right, env, reg))
        case Mul(left, right):
            return finite(evaluate(left, env, reg) * evaluate(right, env, reg))
        case Neg(arg):
            return -evaluate(arg, env, reg)
        case Recip(arg):
            value = evaluate(arg, env, reg)
            if value == 0:
                raise DomainViolation("reciprocal of zero")
            return finite(1 / value)
        case Apply(fn, args):
            values = [evaluate(arg, env, reg) for arg in args]
            return finite(reg.call(fn, values))
    raise TypeError(f"not an expression: {e!r}")


def try_evaluate(e: Expr, env: Env, reg: "Registry"):
    """Evaluate ``e``, returning ``None`` when the point is outside its domain."""
    try:
        return evaluate(e, env, reg)
    except DomainViolation:
        return None


def eval_pred(p: DomainPred, env: Env, reg: "Registry") -> bool:
    """Decide whether ``env`` satisfies ``p``; domain failures read as ``False``."""
    match p:
        case TruePred():
            return True
        case And(left, right):
            return eval_pred(left, env, reg) and eval_pred(right, env, reg)
        case NonZero(e):
            value = try_evaluate(e, env, reg)
            return value is not None and value != 0
        case IsReal(e):
            value = try_evaluate(e, env, reg)
            return value is not None and value.imag == 0.0
        case InOpenInterval(e, lo, hi):
            value = try_evaluate(e, env, reg)
            return value is not None and value.imag == 0.0 and lo < value.real < hi
        case Named(name, e):
            definition = reg.predicate(name)
            value = try_evaluate(e, env, reg)
            if value is None:
                return False
            return eval_pred(definition.body, {definition.formal: value}, reg)
    raise TypeError(f"not a domain predicate: {p!r}")


# ---------------------------------------------------------------------------
# Structure
# ---------------------------------------------------------------------------


def substitute_many(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace every variable named in ``mapping`` simultaneously."""
    match e:
        case Var(name) if name in mapping:
            return mapping[name]
        case Const() | Var():
            return e
        case Add(left, right):
            return Add(substitute_many(left, mapping), substitute_many(right, mapping))
        case Mul(left, right):
            return Mul(substitute_many(left, mapping), substitute_many(right, mapping))
        case Neg(arg):
            return Neg(substitute_many(arg, mapping))
        case Recip(arg):
            return Recip(substitute_many(arg, mapping))
        case Apply(fn, args):
            return Apply(fn, [substitute_many(arg, mapping) for arg in args])
    raise TypeError(f"not an expression: {e!r}")


def substitute(e: Expr, var: str, replacement: Expr) -> Expr:
    """Replace every occurrence of ``var`` in ``e`` by ``replacement``."""
    return substitute_many(e, {var: replacement})


def substitute_pred_many(p: DomainPred, mapping: Mapping[str, Expr]) -> DomainPred:
    match p:
        case TruePred():
            return p
        case And(left, right):
            return And(substitute_pred_many(left, mapping), substitute_pred_many(right, mapping))
        case NonZero(e):
            return NonZero(substitute_many(e, mapping))
        case IsReal(e):
            return IsReal(substitute_many(e, mapping))
        case InOpenInterval(e, lo, hi):
            return InOpenInterval(substitute_many(e, mapping), lo, hi)
        case Named(name, e):
            return Named(name, substitute_many(e, mapping))
    raise TypeError(f"not a domain predicate: {p!r}")


def substitute_pred(p: DomainPred, var: str, replacement: Expr) -> DomainPred:
    return substitute_pred_many(p, {var: replacement})


def subterms(e: Expr) -> Iterator[Expr]:
    """Pre-order walk over ``e`` and all its subexpressions."""
    yield e
    match e:
        case Add(left, right) | Mul(left, right):
            yield from subterms(left)
            yield from subterms(right)
        case Neg(arg) | Recip(arg):
            yield from subterms(arg)
        case Apply(_, args):
            for arg in args:
                yield from subterms(arg)


def pred_exprs(p: DomainPred) -> Iterator[Expr]:
    """The expressions embedded in ``p``."""
    match p:
        case And(left, right):
            yield from pred_exprs(left)
            yield from pred_exprs(right)
        case NonZero(e) | IsReal(e) | InOpenInterval(e, _, _) | Named(_, e):
            yield e


def conjuncts(p: DomainPred) -> Iterator[DomainPred]:
    """The non-``And`` leaves of ``p`` in left-to-right order."""
    if isinstance(p, And):
        yield from conjuncts(p.left)
        yield from conjuncts(p.right)
    else:
        yield p


def free_vars(e: Expr) -> FrozenSet[str]:
    return frozenset(node.name for node in subterms(e) if isinstance(node, Var))


def pred_free_vars(p: DomainPred) -> FrozenSet[str]:
    names = set()
    for e in pred_exprs(p):
        names |= free_vars(e)
    return frozenset(names)


def called_functions(e: Expr) -> FrozenSet[str]:
    return frozenset(node.fn for node in subterms(e) if isinstance(node, Apply))


def node_count(e: Expr) -> int:
    return sum(1 for _ in subterms(e))


def conjoin(*preds: DomainPred) -> DomainPred:
    """Left-fold ``preds`` with ``And``; no simplification."""
    result = preds[0]
    for p in preds[1:]:
        result = And(result, p)
    return result
