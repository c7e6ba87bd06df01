"""
The built-in registry: derivative facts for the elementary functions.

Everything except ``raise`` is written in the registry-file format and loaded
through :func:`registry.load_registry_file`, so the seed exercises the same path
as user files. ``raise`` is registered from Python because the domain of x^n
depends on the held exponent.
"""

import logging
from functools import lru_cache

from expr import INF, TRUE, And, Const, DomainPred, Expr, InOpenInterval, IsReal, NonZero, Var
from registry import HELD, VARYING, Registry, load_registry_file
from sexpr import parse_expr

logger = logging.getLogger(__name__)

BASE_FORMS = """
; subtraction and division reduce to these two facts through the chain rule
(def-elem-derivative unary-- t (- 1))
(def-elem-derivative unary-/ (nonzero x) (- (/ (* x x))))

(def-elem-derivative exp t (exp x))
(def-elem-inverse ln exp t (and (realp x) (in-open x 0 +inf)))

(def-elem-derivative sin t (cos x))
(def-elem-derivative cos t (- (sin x)))
"""

DERIVED_FORMS = """
(def-elem-derivative asin (in-open x -1 1) (raise (- 1 (* x x)) -1/2))
(def-elem-derivative acos (in-open x -1 1) (- (raise (- 1 (* x x)) -1/2)))
(def-elem-derivative atan (realp x) (/ (+ 1 (* x x))))

(defun tan (x) (* (sin x) (/ (cos x))))
(defun sqrt (x) (raise x 1/2))
"""

_x = Var(VARYING)
_positive_real = And(IsReal(_x), InOpenInterval(_x, 0, INF))


def power_domain(exponent: Expr) -> DomainPred:
    """Domain of x^n for a held exponent n."""
    if isinstance(exponent, Const) and exponent.value.is_integer:
        return TRUE if exponent.value.re >= 1 else NonZero(_x)
    # non-integer or symbolic exponents stay on the positive reals, off the branch cut
    return _positive_real


def _register_raise(reg: Registry) -> Registry:
    reg = reg.register_elem_derivative(
        "raise",
        _positive_real,
        parse_expr(f"(* {HELD} (raise {VARYING} (- {HELD} 1)))"),
        arity=2,
        varying_arg=0,
        domain_rule=power_domain,
    )
    return reg.register_elem_derivative(
        "raise",
        And(IsReal(Var(HELD)), InOpenInterval(Var(HELD), 0, INF)),
        parse_expr(f"(* (raise {HELD} {VARYING}) (ln {HELD}))"),
        arity=2,
        varying_arg=1,
    )


@lru_cache(maxsize=None)
def seed_registry() -> Registry:
    """The registry every session starts from unless builtins are disabled."""
    reg = load_registry_file(Registry(), BASE_FORMS)
    reg = _register_raise(reg)
    reg = load_registry_file(reg, DERIVED_FORMS)
    logger.info("Seed registry ready with %d records", len(reg.order))
    return reg
