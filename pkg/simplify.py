"""
Cleanup of derivative terms and domain predicates.

Every rule here is domain safe: the rewritten term evaluates wherever the
original did and to the same value. Rules that would widen a domain, such as
``x * (1/x) -> 1`` or ``1/(1/e) -> e``, are deliberately absent.
"""

from __future__ import annotations

import cmath
import logging
import math
from typing import Callable, List, Optional

from attrs import frozen

from expr import (
    ONE,
    TRUE,
    ZERO,
    Add,
    Apply,
    Const,
    DomainPred,
    Expr,
    Gaussian,
    Mul,
    Neg,
    Recip,
    TruePred,
    Var,
    conjoin,
    conjuncts,
    node_count,
)

logger = logging.getLogger(__name__)


@frozen
class RewriteRule:
    name: str
    rewrite: Callable[[Expr], Optional[Expr]]
    domain_safe: bool = True


def _same_float(exact: Gaussian, computed: Callable[[], complex]) -> bool:
    """Whether ``exact`` rounds to what evaluating the unfolded term gives."""
    try:
        return cmath.isfinite(value := computed()) and value == complex(exact)
    except (OverflowError, ZeroDivisionError):
        return False


def _power_of_two(c: Gaussian) -> bool:
    return c.is_real and not c.is_zero and math.frexp(abs(float(c.re)))[0] == 0.5


def _fold(e: Expr) -> Optional[Expr]:
    match e:
        case Add(Const(a), Const(b)) if _same_float(a + b, lambda: complex(a) + complex(b)):
            return Const(a + b)
        case Mul(Const(a), Const(b)) if _same_float(a * b, lambda: complex(a) * complex(b)):
            return Const(a * b)
        case Neg(Const(c)):
            return Const(-c)
        case Recip(Const(c)) if not c.is_zero and _same_float(c.reciprocal(), lambda: 1 / complex(c)):
            return Const(c.reciprocal())
    return None


def _mul_one(e: Expr) -> Optional[Expr]:
    match e:
        case Mul(x, Const(c)) | Mul(Const(c), x) if c == ONE.value:
            return x
    return None


def _mul_zero(e: Expr) -> Optional[Expr]:
    # only operands that always evaluate
    match e:
        case Mul(Var(), Const(c)) | Mul(Const(c), Var()) if c.is_zero:
            return ZERO
    return None


def _add_zero(e: Expr) -> Optional[Expr]:
    match e:
        case Add(x, Const(c)) | Add(Const(c), x) if c.is_zero:
            return x
    return None


def _neg_neg(e: Expr) -> Optional[Expr]:
    match e:
        case Neg(Neg(x)):
            return x
    return None


def _mul_consts(e: Expr) -> Optional[Expr]:
    # one factor a power of two, so scaling commutes with rounding
    match e:
        case Mul(Const(a), Mul(Const(b), x)) if (
            a.is_real
            and b.is_real
            and (_power_of_two(a) or _power_of_two(b))
            and _same_float(a * b, lambda: complex(a) * complex(b))
        ):
            return Mul(Const(a * b), x)
    return None


def _add_self(e: Expr) -> Optional[Expr]:
    match e:
        case Add(x, y) if x == y:
            return Mul(Const(2), x)
    return None


RULES: List[RewriteRule] = [
    RewriteRule("fold-constants", _fold),
    RewriteRule("mul-one", _mul_one),
    RewriteRule("mul-zero", _mul_zero),
    RewriteRule("add-zero", _add_zero),
    RewriteRule("neg-neg", _neg_neg),
    RewriteRule("mul-consts", _mul_consts),
    RewriteRule("add-self", _add_self),
]


class _Fuel:
    def __init__(self, amount: int):
        self.amount = amount

    def spend(self) -> bool:
        self.amount -= 1
        return self.amount >= 0


def _rebuild(e: Expr, children: List[Expr]) -> Expr:
    match e:
        case Add():
            return Add(*children)
        case Mul():
            return Mul(*children)
        case Neg():
            return Neg(*children)
        case Recip():
            return Recip(*children)
        case Apply(fn, _):
            return Apply(fn, children)
    return e


def _children(e: Expr) -> List[Expr]:
    match e:
        case Add(left, right) | Mul(left, right):
            return [left, right]
        case Neg(arg) | Recip(arg):
            return [arg]
        case Apply(_, args):
            return list(args)
    return []


def _at_node(e: Expr, rules: List[RewriteRule], fuel: _Fuel) -> Expr:
    for rule in rules:
        rewritten = rule.rewrite(e)
        if rewritten is None:
            continue
        if not fuel.spend():
            return e
        logger.debug("%s: %s -> %s", rule.name, e, rewritten)
        # children of the rewritten node are already simplified
        return _at_node(rewritten, rules, fuel)
    return e


def _pass(e: Expr, rules: List[RewriteRule], fuel: _Fuel) -> Expr:
    children = _children(e)
    if children:
        e = _rebuild(e, [_pass(child, rules, fuel) for child in children])
    return _at_node(e, rules, fuel)


def simplify(e: Expr, rules: Optional[List[RewriteRule]] = None) -> Expr:
    """Rewrite ``e`` bottom-up to a fixpoint of the domain-safe rules."""
    rules = RULES if rules is None else rules
    if not all(rule.domain_safe for rule in rules):
        raise ValueError("only domain-safe rules may be used for simplification")

    fuel = _Fuel(10 * node_count(e))
    while True:
        simplified = _pass(e, rules, fuel)
        if simplified == e or fuel.amount < 0:
            break
        e = simplified
    if fuel.amount < 0:
        logger.warning("Simplifier fuel exhausted; returning a partially simplified term")
    return simplified


def simplify_domain(p: DomainPred) -> DomainPred:
    """Flatten ``And`` chains, drop ``t`` and repeated conjuncts."""
    kept: List[DomainPred] = []
    for leaf in conjuncts(p):
        if isinstance(leaf, TruePred) or leaf in kept:
            continue
        kept.append(leaf)
    return conjoin(*kept) if kept else TRUE
