"""
Registry of elementary derivatives, inverse functions and user definitions.

A :class:`Registry` is an immutable value. Every registration returns a new
registry and leaves the old one untouched, so readers never need coordination.
Records keep their insertion order for reproducible listings.
"""

from __future__ import annotations

import cmath
import logging
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from attrs import evolve, field, frozen

from errors import (
    ArityError,
    DerivativeError,
    DomainViolation,
    DuplicateRegistration,
    MalformedTemplate,
    Overflow,
    RecursionDetected,
    UnknownFunction,
    UnknownPredicate,
    UnsupportedArity,
)
from expr import (
    Apply,
    DomainPred,
    Expr,
    Named,
    called_functions,
    conjuncts,
    evaluate,
    free_vars,
    pred_exprs,
    pred_free_vars,
    subterms,
)
from sexpr import Symbol, normalize, parse, parse_pred

logger = logging.getLogger(__name__)

VARYING = "x"
HELD = "a"


# ---------------------------------------------------------------------------
# Built-in numeric implementations
# ---------------------------------------------------------------------------


def _recip(z: complex) -> complex:
    if z == 0:
        raise DomainViolation("reciprocal of zero")
    return 1 / z


def _ln(z: complex) -> complex:
    if z == 0:
        raise DomainViolation("logarithm of zero")
    return cmath.log(z)


def _raise(base: complex, exponent: complex) -> complex:
    if exponent.imag == 0 and exponent.real.is_integer() and abs(exponent.real) <= 2**31:
        return base ** int(exponent.real)
    if base == 0:
        if exponent.real > 0:
            return 0j
        raise DomainViolation("zero raised to a non-positive power")
    return cmath.exp(exponent * cmath.log(base))


BUILTIN_EVALUATORS: Dict[str, Tuple[int, Callable[..., complex]]] = {
    "unary--": (1, lambda z: -z),
    "unary-/": (1, _recip),
    "exp": (1, cmath.exp),
    "ln": (1, _ln),
    "sin": (1, cmath.sin),
    "cos": (1, cmath.cos),
    "asin": (1, cmath.asin),
    "acos": (1, cmath.acos),
    "atan": (1, cmath.atan),
    "raise": (2, _raise),
}


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------


def formals_for(arity: int) -> Tuple[str, ...]:
    return (VARYING,) if arity == 1 else (VARYING, HELD)


def template_args(arity: int, varying_arg: int) -> Tuple[str, ...]:
    """Formal names in argument order, e.g. ``("a", "x")`` for a held first argument."""
    if arity == 1:
        return (VARYING,)
    return (VARYING, HELD) if varying_arg == 0 else (HELD, VARYING)


@frozen
class ElemDerivRecord:
    fn_name: str
    arity: int
    varying_arg: int
    domain_template: DomainPred
    deriv_template: Expr
    evaluator: str
    # Built-in records may pick their domain from the held argument at each use.
    domain_rule: Optional[Callable[[Expr], DomainPred]] = field(default=None, eq=False, repr=False)

    def domain_for(self, held: Optional[Expr]) -> DomainPred:
        if self.domain_rule is not None and held is not None:
            return self.domain_rule(held)
        return self.domain_template


@frozen
class InverseRecord:
    inv_name: str
    fn_name: str
    domain_pred: DomainPred
    inv_domain_pred: DomainPred


@frozen
class FnDef:
    name: str
    formal: str
    body: Expr
    fixed_formal: Optional[str] = None

    @property
    def formals(self) -> Tuple[str, ...]:
        return (self.formal,) if self.fixed_formal is None else (self.formal, self.fixed_formal)


@frozen
class PredDef:
    name: str
    formal: str
    body: DomainPred


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------


def _find_cycle(graph: Mapping[str, frozenset], start: str) -> Optional[List[str]]:
    """Return a call path from ``start`` back to ``start``, if there is one."""
    path: List[str] = [start]
    visited = set()

    def visit(name: str) -> bool:
        for callee in sorted(graph.get(name, ())):
            if callee == start:
                path.append(start)
                return True
            if callee in visited:
                continue
            visited.add(callee)
            path.append(callee)
            if visit(callee):
                return True
            path.pop()
        return False

    return path if visit(start) else None


@frozen
class Registry:
    elementary: Mapping[Tuple[str, int], ElemDerivRecord] = field(factory=dict)
    inverses: Mapping[str, InverseRecord] = field(factory=dict)
    functions: Mapping[str, FnDef] = field(factory=dict)
    predicates: Mapping[str, PredDef] = field(factory=dict)
    order: Tuple[Tuple[str, object], ...] = ()

    # -- lookups ----------------------------------------------------------

    def elementary_for(self, name: str, varying_arg: int = 0) -> Optional[ElemDerivRecord]:
        return self.elementary.get((name, varying_arg))

    def has_elementary(self, name: str) -> bool:
        return any(key[0] == name for key in self.elementary)

    def inverse_for(self, name: str) -> Optional[InverseRecord]:
        return self.inverses.get(name)

    def function(self, name: str) -> Optional[FnDef]:
        return self.functions.get(name)

    def predicate(self, name: str) -> PredDef:
        try:
            return self.predicates[name]
        except KeyError:
            raise UnknownPredicate(name) from None

    def is_known(self, name: str) -> bool:
        return name in self.functions or name in self.inverses or self.has_elementary(name)

    def arity_of(self, name: str) -> int:
        if name in self.functions:
            return len(self.functions[name].formals)
        if name in BUILTIN_EVALUATORS:
            return BUILTIN_EVALUATORS[name][0]
        for (fn_name, _), record in self.elementary.items():
            if fn_name == name:
                return record.arity
        if name in self.inverses:
            return 1
        raise UnknownFunction(name)

    def call(self, name: str, values: Sequence[complex]) -> complex:
        """Apply the registered function ``name`` to numeric arguments."""
        if not self.is_known(name):
            raise UnknownFunction(name)
        definition = self.functions.get(name)
        if definition is not None:
            if len(values) != len(definition.formals):
                raise ArityError(f"{name} takes {len(definition.formals)} arguments")
            return evaluate(definition.body, dict(zip(definition.formals, values)), self)
        if name not in BUILTIN_EVALUATORS:
            raise UnknownFunction(name, "registered without an evaluator")
        arity, implementation = BUILTIN_EVALUATORS[name]
        if len(values) != arity:
            raise ArityError(f"{name} takes {arity} arguments")
        try:
            return implementation(*values)
        except OverflowError as e:
            raise Overflow(f"{name}{tuple(values)}: {e}") from None
        except (ZeroDivisionError, ValueError) as e:
            raise DomainViolation(f"{name}{tuple(values)}: {e}") from None

    # -- validation helpers ------------------------------------------------

    def _check_calls(self, e: Expr, allowed: frozenset = frozenset()):
        for node in subterms(e):
            if not isinstance(node, Apply) or node.fn in allowed:
                continue
            # a built-in evaluator may be called before its own record exists
            if not (self.is_known(node.fn) or node.fn in BUILTIN_EVALUATORS):
                raise UnknownFunction(node.fn)
            expected = self.arity_of(node.fn)
            if len(node.args) != expected:
                raise ArityError(f"{node.fn} takes {expected} arguments, got {len(node.args)}")

    def _check_pred(self, p: DomainPred, formals: Tuple[str, ...], what: str):
        stray = pred_free_vars(p) - set(formals)
        if stray:
            raise MalformedTemplate(f"{what} mentions {sorted(stray)} outside formals {formals}")
        for e in pred_exprs(p):
            self._check_calls(e)
        for name in _named(p):
            self.predicate(name)

    # -- registration ------------------------------------------------------

    def register_elem_derivative(
        self,
        fn_name: str,
        domain_template: DomainPred,
        deriv_template: Expr,
        arity: int = 1,
        varying_arg: int = 0,
        domain_rule: Optional[Callable[[Expr], DomainPred]] = None,
    ) -> "Registry":
        """Record that ``fn_name`` has the derivative ``deriv_template`` on ``domain_template``."""
        if arity not in (1, 2):
            raise UnsupportedArity(f"{fn_name}: arity {arity} is not supported")
        if varying_arg not in range(arity):
            raise MalformedTemplate(f"{fn_name}: varying argument {varying_arg} out of range")
        key = (fn_name, varying_arg)
        if key in self.elementary:
            raise DuplicateRegistration(f"{fn_name} already has an elementary derivative")

        if fn_name in self.functions:
            evaluator = "inline"
            native_arity = len(self.functions[fn_name].formals)
        elif fn_name in BUILTIN_EVALUATORS:
            evaluator = "builtin"
            native_arity = BUILTIN_EVALUATORS[fn_name][0]
        else:
            raise UnknownFunction(fn_name, "no built-in evaluator or definition")
        if native_arity != arity:
            raise MalformedTemplate(f"{fn_name} takes {native_arity} arguments, not {arity}")

        formals = formals_for(arity)
        stray = free_vars(deriv_template) - set(formals)
        if stray:
            raise MalformedTemplate(f"derivative of {fn_name} mentions {sorted(stray)}")
        self._check_pred(domain_template, formals, f"domain of {fn_name}")
        self._check_calls(deriv_template, frozenset([fn_name]))

        record = ElemDerivRecord(
            fn_name, arity, varying_arg, domain_template, deriv_template, evaluator, domain_rule
        )
        logger.info("Registered elementary derivative of %s (varying argument %d)", fn_name, varying_arg)
        return evolve(
            self,
            elementary={**self.elementary, key: record},
            order=self.order + (("elementary", key),),
        )

    def register_elem_inverse(
        self,
        inv_name: str,
        fn_name: str,
        domain_pred: DomainPred,
        inv_domain_pred: DomainPred,
    ) -> "Registry":
        """Record that ``inv_name`` is the compositional inverse of ``fn_name``."""
        if self.elementary_for(fn_name) is None and fn_name not in self.functions:
            raise UnknownFunction(fn_name, "an inverse needs a function with a known derivative")
        if inv_name in self.inverses:
            raise DuplicateRegistration(f"{inv_name} is already registered as an inverse")
        self._check_pred(domain_pred, (VARYING,), f"domain of {fn_name}")
        self._check_pred(inv_domain_pred, (VARYING,), f"domain of {inv_name}")

        record = InverseRecord(inv_name, fn_name, domain_pred, inv_domain_pred)
        logger.info("Registered %s as the inverse of %s", inv_name, fn_name)
        return evolve(
            self,
            inverses={**self.inverses, inv_name: record},
            order=self.order + (("inverse", inv_name),),
        )

    def define_function(
        self, name: str, formal: str, body: Expr, fixed_formal: Optional[str] = None
    ) -> "Registry":
        """Define ``name`` by an arithmetic body; recursion through any path is rejected."""
        if name in self.functions or name in BUILTIN_EVALUATORS:
            raise DuplicateRegistration(f"{name} is already defined")
        definition = FnDef(name, formal, body, fixed_formal)
        stray = free_vars(body) - set(definition.formals)
        if stray:
            raise MalformedTemplate(f"body of {name} mentions {sorted(stray)} outside its formals")

        graph = {fn: called_functions(d.body) for fn, d in self.functions.items()}
        graph[name] = called_functions(body)
        cycle = _find_cycle(graph, name)
        if cycle:
            raise RecursionDetected(cycle)
        self._check_calls(body)

        logger.info("Defined function %s(%s)", name, ", ".join(definition.formals))
        return evolve(
            self,
            functions={**self.functions, name: definition},
            order=self.order + (("function", name),),
        )

    def define_predicate(self, name: str, formal: str, body: DomainPred) -> "Registry":
        if name in self.predicates:
            raise DuplicateRegistration(f"predicate {name} is already defined")
        self._check_pred(body, (formal,), f"predicate {name}")
        logger.info("Defined predicate %s(%s)", name, formal)
        return evolve(
            self,
            predicates={**self.predicates, name: PredDef(name, formal, body)},
            order=self.order + (("predicate", name),),
        )

    # -- listing -----------------------------------------------------------

    def records(self) -> Iterator[Tuple[str, object]]:
        """Every record as ``(kind, record)`` in registration order."""
        tables = {
            "elementary": self.elementary,
            "inverse": self.inverses,
            "function": self.functions,
            "predicate": self.predicates,
        }
        for kind, key in self.order:
            yield kind, tables[kind][key]

    def function_graph(self) -> Dict[str, frozenset]:
        return {fn: called_functions(d.body) for fn, d in self.functions.items()}


def _named(p: DomainPred) -> Iterator[str]:
    for leaf in conjuncts(p):
        if isinstance(leaf, Named):
            yield leaf.pred


# ---------------------------------------------------------------------------
# Registry files
# ---------------------------------------------------------------------------


def _symbol_name(form, what: str) -> str:
    if not isinstance(form, Symbol):
        raise MalformedTemplate(f"{what} must be a symbol, got {form!r}")
    return form.name


def _formals(form, name: str) -> List[str]:
    if not isinstance(form, list) or not 1 <= len(form) <= 2:
        raise MalformedTemplate(f"{name}: formals must be a list of one or two symbols")
    return [_symbol_name(f, "formal") for f in form]


def apply_form(reg: Registry, form) -> Registry:
    """Apply one registry-file form to ``reg``."""
    if not isinstance(form, list) or not form:
        raise MalformedTemplate(f"registry forms must be non-empty lists, got {form!r}")
    head = _symbol_name(form[0], "registry form head")
    args = form[1:]

    if head == "def-elem-derivative":
        if len(args) == 4:
            # the theorem-name prefix has no meaning without a prover
            logger.debug("Ignoring prefix %s of %s", args[1], args[0])
            args = [args[0], args[2], args[3]]
        if len(args) != 3:
            raise ArityError("def-elem-derivative takes NAME DOMAIN DERIV")
        name, domain, deriv = args
        return reg.register_elem_derivative(
            _symbol_name(name, "function name"), parse_pred(domain), normalize(deriv)
        )

    if head == "def-elem-derivative2":
        if len(args) != 4:
            raise ArityError("def-elem-derivative2 takes NAME VARYING-ARG DOMAIN DERIV")
        name, varying, domain, deriv = args
        if not isinstance(varying, Fraction) or varying.denominator != 1:
            raise MalformedTemplate(f"varying argument must be 0 or 1, got {varying!r}")
        return reg.register_elem_derivative(
            _symbol_name(name, "function name"),
            parse_pred(domain),
            normalize(deriv),
            arity=2,
            varying_arg=int(varying),
        )

    if head == "def-elem-inverse":
        if len(args) == 5:
            # source order: INV PREFIX DOMAIN INV-DOMAIN FN
            args = [args[0], args[4], args[2], args[3]]
        if len(args) != 4:
            raise ArityError("def-elem-inverse takes INV-NAME FN-NAME DOMAIN INV-DOMAIN")
        inv_name, fn_name, domain, inv_domain = args
        return reg.register_elem_inverse(
            _symbol_name(inv_name, "inverse name"),
            _symbol_name(fn_name, "function name"),
            parse_pred(domain),
            parse_pred(inv_domain),
        )

    if head == "defun":
        if len(args) != 3:
            raise ArityError("defun takes NAME (FORMALS) BODY")
        name = _symbol_name(args[0], "function name")
        formals = _formals(args[1], name)
        return reg.define_function(name, formals[0], normalize(args[2]), *formals[1:])

    if head == "defpred":
        if len(args) != 3:
            raise ArityError("defpred takes NAME (X) BODY")
        name = _symbol_name(args[0], "predicate name")
        formals = _formals(args[1], name)
        if len(formals) != 1:
            raise MalformedTemplate(f"predicate {name} takes exactly one formal")
        return reg.define_predicate(name, formals[0], parse_pred(args[2]))

    raise MalformedTemplate(f"unknown registry form {head}")


def load_registry_file(reg: Registry, text: str) -> Registry:
    """Apply every form in ``text`` to ``reg``, strictly in order."""
    for index, form in enumerate(parse(text)):
        try:
            reg = apply_form(reg, form)
        except DerivativeError as e:
            e.form_index = index
            e.add_note(f"while applying registry form #{index}")
            raise
    return reg
