"""
Symbolic differentiation by the composition rules.

``differentiate`` walks the expression once. At each node it builds the
derivative and the domain predicate, and it records which rule fired. Every
function application and reciprocal also produces the seven derivative
obligations for that subterm, and every use of an inverse function produces
the six inverse obligations. Obligations are plain data: nothing is checked here.
"""

from __future__ import annotations

import logging
from enum import Enum
from typing import List, Optional, Tuple

from attrs import field, frozen

from errors import UnknownFunction, UnsupportedArity, VaryingHeldArgument
from expr import (
    ONE,
    TRUE,
    ZERO,
    Add,
    And,
    Apply,
    Const,
    DomainPred,
    Expr,
    Mul,
    Neg,
    Recip,
    Var,
    conjoin,
    free_vars,
    substitute,
    substitute_many,
    substitute_pred,
    substitute_pred_many,
)
from registry import HELD, VARYING, ElemDerivRecord, Registry

logger = logging.getLogger(__name__)


class ObligationKind(Enum):
    NUMBER = "number"
    STANDARD = "standard"
    CONTINUOUS = "continuous"
    PRIME_NUMBER = "prime-number"
    PRIME_STANDARD = "prime-standard"
    PRIME_CONTINUOUS = "prime-continuous"
    CLOSE = "close"
    INVERSE_IN_RANGE = "inverse-in-range"
    DOMAIN_IS_NUMBER = "domain-is-number"
    INVERSE_RELATION = "inverse-relation"
    DDX_RELATION = "d/dx-relation"
    PRIME_NOT_ZERO = "prime-not-zero"
    PRESERVES_NOT_CLOSE = "preserves-not-close"


DERIVATIVE_KINDS = (
    ObligationKind.NUMBER,
    ObligationKind.STANDARD,
    ObligationKind.CONTINUOUS,
    ObligationKind.PRIME_NUMBER,
    ObligationKind.PRIME_STANDARD,
    ObligationKind.PRIME_CONTINUOUS,
    ObligationKind.CLOSE,
)

INVERSE_KINDS = (
    ObligationKind.INVERSE_IN_RANGE,
    ObligationKind.DOMAIN_IS_NUMBER,
    ObligationKind.INVERSE_RELATION,
    ObligationKind.DDX_RELATION,
    ObligationKind.PRIME_NOT_ZERO,
    ObligationKind.PRESERVES_NOT_CLOSE,
)


@frozen
class Obligation:
    """One instance of a derivative or inverse theorem schema.

    For derivative obligations ``subject`` is the function f of ``var``,
    ``subject_prime`` its claimed derivative and ``subject_domain`` its domain.
    For inverse obligations ``subject`` is the inverse g, ``subject_prime`` is
    g' and ``subject_domain`` the domain of g (the range of f); ``fn``,
    ``fn_prime`` and ``fn_domain`` describe f itself.
    """

    name: ObligationKind
    var: str
    subject: Expr
    subject_domain: DomainPred
    subject_prime: Optional[Expr] = None
    fn: Optional[Expr] = None
    fn_prime: Optional[Expr] = None
    fn_domain: Optional[DomainPred] = None
    prefix: str = ""

    @property
    def label(self) -> str:
        return f"{self.prefix}-{self.name.value}" if self.prefix else self.name.value


@frozen
class TraceStep:
    expr: Expr
    rule: str


@frozen
class DiffResult:
    derivative: Expr
    domain: DomainPred
    obligations: Tuple[Obligation, ...] = field(converter=tuple)
    trace: Tuple[TraceStep, ...] = field(converter=tuple)


def derivative_hyps(
    subject: Expr,
    subject_prime: Expr,
    subject_domain: DomainPred,
    var: str = VARYING,
    prefix: str = "",
) -> List[Obligation]:
    """The seven obligations stating that ``subject_prime`` is the derivative of ``subject``."""
    return [
        Obligation(kind, var, subject, subject_domain, subject_prime, prefix=prefix)
        for kind in DERIVATIVE_KINDS
    ]


def inverse_hyps(
    inv: Expr,
    fn: Expr,
    fn_prime: Expr,
    domain: DomainPred,
    inv_domain: DomainPred,
    var: str = VARYING,
    prefix: str = "",
    inv_prime: Optional[Expr] = None,
) -> List[Obligation]:
    """The six obligations stating that ``inv`` is the compositional inverse of ``fn``."""
    if inv_prime is None:
        inv_prime = Recip(substitute(fn_prime, var, inv))
    return [
        Obligation(
            kind,
            var,
            inv,
            inv_domain,
            inv_prime,
            fn=fn,
            fn_prime=fn_prime,
            fn_domain=domain,
            prefix=prefix,
        )
        for kind in INVERSE_KINDS
    ]


class _Differentiator:
    def __init__(self, reg: Registry, var: str, prefix: str):
        self.reg = reg
        self.var = var
        self.prefix = prefix
        self.obligations: List[Obligation] = []
        self.trace: List[TraceStep] = []

    def _step(self, e: Expr, rule: str):
        logger.debug("%s: %s", rule, e)
        self.trace.append(TraceStep(e, rule))

    def _site(self, e: Expr, deriv: Expr, dom: DomainPred, label: str):
        prefix = f"{self.prefix}-{label}" if self.prefix else label
        self.obligations.extend(derivative_hyps(e, deriv, dom, self.var, prefix))

    def run(self, e: Expr) -> Tuple[Expr, DomainPred]:
        match e:
            case Const():
                self._step(e, "const")
                return ZERO, TRUE
            case Var(name):
                self._step(e, "var" if name == self.var else "held")
                return (ONE if name == self.var else ZERO), TRUE
            case Add(u, v):
                du, domu = self.run(u)
                dv, domv = self.run(v)
                self._step(e, "add")
                return Add(du, dv), And(domu, domv)
            case Mul(u, v):
                du, domu = self.run(u)
                dv, domv = self.run(v)
                self._step(e, "mul")
                return Add(Mul(u, dv), Mul(du, v)), And(domu, domv)
            case Neg(u):
                du, domu = self.run(u)
                record = self._elementary("unary--")
                self._step(e, "neg")
                return Mul(substitute(record.deriv_template, VARYING, u), du), domu
            case Recip(u):
                du, domu = self.run(u)
                record = self._elementary("unary-/")
                deriv = Mul(substitute(record.deriv_template, VARYING, u), du)
                dom = And(domu, substitute_pred(record.domain_template, VARYING, u))
                self._step(e, "recip")
                self._site(e, deriv, dom, "unary-/")
                return deriv, dom
            case Apply(fn, args):
                expected = self.reg.arity_of(fn)
                if expected != len(args):
                    raise UnsupportedArity(f"{fn} takes {expected} arguments, got {len(args)}")
                deriv, dom = self._apply(e) if len(args) == 1 else self._apply2(e)
                self._site(e, deriv, dom, fn)
                return deriv, dom
        raise TypeError(f"not an expression: {e!r}")

    def _elementary(self, name: str) -> ElemDerivRecord:
        record = self.reg.elementary_for(name)
        if record is None:
            raise UnknownFunction(name, "no elementary derivative registered")
        return record

    def _apply(self, e: Apply) -> Tuple[Expr, DomainPred]:
        fn, (u,) = e.fn, e.args
        du, domu = self.run(u)

        record = self.reg.elementary_for(fn)
        if record is not None and record.arity == 1:
            self._step(e, "elementary")
            deriv = Mul(substitute(record.deriv_template, VARYING, u), du)
            return deriv, And(domu, substitute_pred(record.domain_template, VARYING, u))

        inverse = self.reg.inverse_for(fn)
        if inverse is not None:
            self._step(e, "inverse")
            return self._inverse(e, inverse, u, du, domu)

        definition = self.reg.function(fn)
        if definition is not None:
            self._step(e, "inline")
            body_name = f"{self.prefix}-{fn}-body" if self.prefix else f"{fn}-body"
            inner = differentiate(definition.body, definition.formal, self.reg, name=body_name)
            self.obligations.extend(inner.obligations)
            self.trace.extend(inner.trace)
            deriv = Mul(substitute(inner.derivative, definition.formal, u), du)
            return deriv, And(domu, substitute_pred(inner.domain, definition.formal, u))

        raise UnknownFunction(fn)

    def _prime_of(self, fn: str) -> Expr:
        """The derivative of ``fn`` as an expression in the formal ``x``."""
        record = self.reg.elementary_for(fn)
        if record is not None and record.arity == 1:
            return record.deriv_template
        definition = self.reg.function(fn)
        if definition is None:
            raise UnknownFunction(fn, "an inverse needs a function with a known derivative")
        inner = differentiate(definition.body, definition.formal, self.reg)
        return substitute(inner.derivative, definition.formal, Var(VARYING))

    def _inverse(self, e: Apply, inverse, u: Expr, du: Expr, domu: DomainPred):
        x = Var(VARYING)
        fn_prime = self._prime_of(inverse.fn_name)
        inv = Apply(inverse.inv_name, [x])
        inv_prime = Recip(substitute(fn_prime, VARYING, inv))

        prefix = f"{self.prefix}-{inverse.inv_name}" if self.prefix else inverse.inv_name
        self.obligations.extend(
            inverse_hyps(
                inv,
                Apply(inverse.fn_name, [x]),
                fn_prime,
                inverse.domain_pred,
                inverse.inv_domain_pred,
                VARYING,
                prefix,
                inv_prime,
            )
        )
        deriv = Mul(substitute(inv_prime, VARYING, u), du)
        return deriv, And(domu, substitute_pred(inverse.inv_domain_pred, VARYING, u))

    def _apply2(self, e: Apply) -> Tuple[Expr, DomainPred]:
        fn, (first, second) = e.fn, e.args

        candidates = [(0, first, second), (1, second, first)]
        records = [
            (self.reg.elementary_for(fn, index), varying, held)
            for index, varying, held in candidates
        ]
        records = [(r, varying, held) for r, varying, held in records if r is not None]

        definition = self.reg.function(fn)
        if not records and definition is not None:
            # full expansion: both arguments may vary
            expanded = substitute_many(definition.body, dict(zip(definition.formals, e.args)))
            self._step(e, "expand")
            return self.run(expanded)

        for record, varying, held in records:
            if self.var in free_vars(held):
                continue
            dfirst, domfirst = self.run(first)
            dsecond, domsecond = self.run(second)
            du = dfirst if record.varying_arg == 0 else dsecond
            bindings = {VARYING: varying, HELD: held}
            deriv = Mul(substitute_many(record.deriv_template, bindings), du)
            dom = conjoin(domfirst, domsecond, substitute_pred_many(record.domain_for(held), bindings))
            self._step(e, "elementary-held")
            return deriv, dom

        if records:
            raise VaryingHeldArgument(
                f"{fn}: {self.var} occurs in the held argument of every registered form"
            )
        raise UnknownFunction(fn)


def differentiate(e: Expr, var: str, reg: Registry, name: str = "") -> DiffResult:
    """Differentiate ``e`` with respect to ``var``.

    The result's obligation list starts with the seven obligations for ``e``
    itself, followed by those of every application and reciprocal in
    post-order.
    """
    differ = _Differentiator(reg, var, name)
    derivative, domain = differ.run(e)
    top = derivative_hyps(e, derivative, domain, var, name)
    logger.info(
        "Differentiated %d nodes with %d obligations",
        len(differ.trace),
        len(top) + len(differ.obligations),
    )
    return DiffResult(derivative, domain, top + differ.obligations, differ.trace)
