"""
S-expression surface syntax for expressions and domain predicates.

``parse`` reads raw forms (symbols, exact rational literals and lists),
``normalize`` turns a form into a strictly binary :class:`~expr.Expr`, and
``print_expr`` goes back to text. Sugared printing re-flattens left-nested
``+``/``*`` chains, which is exactly what ``normalize`` folds, so
``normalize(parse(print_expr(e, s)))`` reproduces ``e`` for either ``s``.
"""

from __future__ import annotations

import logging
import re
from fractions import Fraction
from typing import List, Union

from attrs import frozen

from errors import ArityError, ParseError
from expr import (
    INF,
    TRUE,
    Add,
    And,
    Apply,
    Const,
    DomainPred,
    Expr,
    Gaussian,
    InOpenInterval,
    IsReal,
    Mul,
    Named,
    Neg,
    NonZero,
    Recip,
    TruePred,
    Var,
)

logger = logging.getLogger(__name__)


@frozen
class Symbol:
    name: str

    def __str__(self) -> str:
        return self.name


SourceForm = Union[Symbol, Fraction, list]

_TOKEN_RE = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s();]+")
_NUMBER_START_RE = re.compile(r"[+-]?\.?\d")
_RATIO_RE = re.compile(r"[+-]?\d+/\d+")
_DECIMAL_RE = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")


def _position(text: str, offset: int):
    line = text.count("\n", 0, offset) + 1
    column = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, column


def _atom(token: str, text: str, offset: int) -> SourceForm:
    if not _NUMBER_START_RE.match(token):
        return Symbol(token)
    if _RATIO_RE.fullmatch(token):
        numerator, denominator = token.split("/")
        if int(denominator) == 0:
            raise ParseError(f"bad literal {token!r}: zero denominator", *_position(text, offset))
        return Fraction(int(numerator), int(denominator))
    if _DECIMAL_RE.fullmatch(token):
        # Fraction parses decimal strings exactly: "0.1" is 1/10
        return Fraction(token)
    raise ParseError(f"bad literal {token!r}", *_position(text, offset))


def parse(text: str) -> List[SourceForm]:
    """Read every top-level form in ``text``; ``;`` starts a comment."""
    forms: List[SourceForm] = []
    stack: List[list] = []

    def emit(form):
        if stack:
            stack[-1].append(form)
        else:
            forms.append(form)

    for match in _TOKEN_RE.finditer(text):
        token = match.group()
        if token[0].isspace() or token[0] == ";":
            continue
        if token == "(":
            stack.append([])
        elif token == ")":
            if not stack:
                raise ParseError("unbalanced ')'", *_position(text, match.start()))
            emit(stack.pop())
        else:
            emit(_atom(token, text, match.start()))

    if stack:
        raise ParseError("unexpected end of input: unclosed '('", *_position(text, len(text)))
    return forms


def parse_one(text: str) -> SourceForm:
    forms = parse(text)
    if len(forms) != 1:
        raise ParseError(f"expected exactly one form, found {len(forms)}", 1, 1)
    return forms[0]


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------

_FOLDS = {"+": Add, "*": Mul}
_STRICT_BINARY = {"binary-+": Add, "binary-*": Mul}
_STRICT_UNARY = {"unary--": Neg, "unary-/": Recip}
_INVERTING = {"-": (Add, Neg), "/": (Mul, Recip)}


def _head(form: list) -> str:
    if not form:
        raise ArityError("empty application ()")
    head = form[0]
    if not isinstance(head, Symbol):
        raise ArityError(f"application head must be a symbol, got {head!r}")
    return head.name


def _literal(form: SourceForm, context: str) -> Fraction:
    if not isinstance(form, Fraction):
        raise ArityError(f"{context} expects rational literals, got {form!r}")
    return form


def normalize(form: SourceForm) -> Expr:
    """Translate a raw form into the strictly binary expression tree."""
    if isinstance(form, Fraction):
        return Const(form)
    if isinstance(form, Symbol):
        return Var(form.name)

    head = _head(form)
    args = form[1:]

    if head in _FOLDS:
        if not args:
            raise ArityError(f"({head}) needs at least one argument")
        result = normalize(args[0])
        for arg in args[1:]:
            result = _FOLDS[head](result, normalize(arg))
        return result

    if head in _INVERTING:
        combine, invert = _INVERTING[head]
        if not args:
            raise ArityError(f"({head}) needs at least one argument")
        if len(args) == 1:
            return invert(normalize(args[0]))
        result = normalize(args[0])
        for arg in args[1:]:
            result = combine(result, invert(normalize(arg)))
        return result

    if head in _STRICT_BINARY:
        if len(args) != 2:
            raise ArityError(f"{head} takes exactly 2 arguments, got {len(args)}")
        return _STRICT_BINARY[head](normalize(args[0]), normalize(args[1]))

    if head in _STRICT_UNARY:
        if len(args) != 1:
            raise ArityError(f"{head} takes exactly 1 argument, got {len(args)}")
        return _STRICT_UNARY[head](normalize(args[0]))

    if head == "complex":
        if len(args) != 2:
            raise ArityError("complex takes exactly 2 arguments")
        return Const(Gaussian(_literal(args[0], "complex"), _literal(args[1], "complex")))

    return Apply(head, [normalize(arg) for arg in args])


def parse_expr(text: str) -> Expr:
    return normalize(parse_one(text))


# ---------------------------------------------------------------------------
# Domain predicates
# ---------------------------------------------------------------------------


def _bound(form: SourceForm):
    if isinstance(form, Fraction):
        return form
    if isinstance(form, Symbol) and form.name in ("-inf", "+inf", "inf"):
        return -INF if form.name == "-inf" else INF
    raise ArityError(f"interval bound must be a rational or ±inf, got {form!r}")


def _is_zero_literal(form: SourceForm) -> bool:
    return isinstance(form, Fraction) and form == 0


def parse_pred(form: SourceForm) -> DomainPred:
    """Translate a raw form into a :class:`~expr.DomainPred`."""
    if isinstance(form, Symbol) and form.name == "t":
        return TRUE
    if not isinstance(form, list):
        raise ArityError(f"not a domain predicate: {form!r}")

    head = _head(form)
    args = form[1:]

    if head == "and":
        if not args:
            return TRUE
        result = parse_pred(args[0])
        for arg in args[1:]:
            result = And(result, parse_pred(arg))
        return result

    if head == "in-open":
        if len(args) != 3:
            raise ArityError("in-open takes an expression and two bounds")
        return InOpenInterval(normalize(args[0]), _bound(args[1]), _bound(args[2]))

    if len(args) != 1:
        raise ArityError(f"predicate {head} takes exactly 1 argument, got {len(args)}")
    (arg,) = args

    if head == "nonzero":
        return NonZero(normalize(arg))
    if head == "realp":
        return IsReal(normalize(arg))
    if head == "acl2-numberp":
        normalize(arg)
        return TRUE
    if head == "not":
        # (not (equal E 0)) in either argument order
        if isinstance(arg, list) and len(arg) == 3 and arg[0] == Symbol("equal"):
            left, right = arg[1], arg[2]
            if _is_zero_literal(right):
                return NonZero(normalize(left))
            if _is_zero_literal(left):
                return NonZero(normalize(right))
        raise ArityError("only (not (equal E 0)) is supported under not")
    return Named(head, normalize(arg))


def parse_pred_text(text: str) -> DomainPred:
    return parse_pred(parse_one(text))


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------


def _rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _spine(e: Expr, kind: type) -> List[Expr]:
    operands = []
    while isinstance(e, kind):
        operands.append(e.right)
        e = e.left
    operands.append(e)
    return operands[::-1]


def print_expr(e: Expr, sugared: bool = True) -> str:
    """Render ``e`` as s-expression text."""
    match e:
        case Const(value):
            if value.is_real:
                return _rational(value.re)
            return f"(complex {_rational(value.re)} {_rational(value.im)})"
        case Var(name):
            return name
        case Add() | Mul():
            if sugared:
                op = "+" if isinstance(e, Add) else "*"
                parts = [print_expr(x, sugared) for x in _spine(e, type(e))]
                return f"({op} {' '.join(parts)})"
            op = "binary-+" if isinstance(e, Add) else "binary-*"
            return f"({op} {print_expr(e.left, sugared)} {print_expr(e.right, sugared)})"
        case Neg(arg):
            return f"({'-' if sugared else 'unary--'} {print_expr(arg, sugared)})"
        case Recip(arg):
            return f"({'/' if sugared else 'unary-/'} {print_expr(arg, sugared)})"
        case Apply(fn, args):
            return f"({fn} {' '.join(print_expr(a, sugared) for a in args)})"
    raise TypeError(f"not an expression: {e!r}")


def _print_bound(bound) -> str:
    if bound == INF:
        return "+inf"
    if bound == -INF:
        return "-inf"
    return _rational(bound)


def print_pred(p: DomainPred, sugared: bool = True) -> str:
    match p:
        case TruePred():
            return "t"
        case And():
            parts = [print_pred(x, sugared) for x in _spine(p, And)]
            return f"(and {' '.join(parts)})"
        case NonZero(e):
            return f"(nonzero {print_expr(e, sugared)})"
        case IsReal(e):
            return f"(realp {print_expr(e, sugared)})"
        case InOpenInterval(e, lo, hi):
            return f"(in-open {print_expr(e, sugared)} {_print_bound(lo)} {_print_bound(hi)})"
        case Named(name, e):
            return f"({name} {print_expr(e, sugared)})"
    raise TypeError(f"not a domain predicate: {p!r}")
