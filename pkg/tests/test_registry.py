import pytest

from errors import (
    ArityError,
    DuplicateRegistration,
    MalformedTemplate,
    RecursionDetected,
    UnknownFunction,
    UnknownPredicate,
)
from expr import INF, TRUE, And, Apply, Const, InOpenInterval, IsReal, Mul, Named, Neg, NonZero, Recip, Var, evaluate
from registry import Registry, load_registry_file
from sexpr import parse_expr

x = Var("x")

SQUARE_FORMS = """
(defun square (x) (* x x))
(defpred square-domain-p (x) (and (realp x) (in-open x 0 +inf)))
(defpred square-inverse-domain-p (x) (and (realp x) (in-open x 0 +inf)))
"""


def test_register_reciprocal_template():
    reg = Registry().register_elem_derivative("unary-/", NonZero(x), parse_expr("(- (/ (* x x)))"))
    record = reg.elementary_for("unary-/")
    assert record.deriv_template == Neg(Recip(Mul(x, x)))
    assert record.domain_template == NonZero(x)
    assert record.evaluator == "builtin"


def test_register_exp():
    reg = Registry().register_elem_derivative("exp", TRUE, Apply("exp", [x]))
    assert reg.elementary_for("exp").deriv_template == Apply("exp", [x])


def test_registries_are_values():
    empty = Registry()
    reg = empty.register_elem_derivative("exp", TRUE, Apply("exp", [x]))
    assert empty.elementary_for("exp") is None
    assert reg.elementary_for("exp") is not None


def test_duplicate_elementary(registry):
    with pytest.raises(DuplicateRegistration):
        registry.register_elem_derivative("exp", TRUE, Apply("exp", [x]))


def test_elementary_needs_an_evaluator():
    with pytest.raises(UnknownFunction):
        Registry().register_elem_derivative("mystery", TRUE, Const(1))


def test_template_outside_formals():
    with pytest.raises(MalformedTemplate):
        Registry().register_elem_derivative("exp", TRUE, Apply("exp", [Var("y")]))
    with pytest.raises(MalformedTemplate):
        Registry().register_elem_derivative("exp", NonZero(Var("y")), Apply("exp", [x]))


def test_template_arity_must_match_evaluator():
    with pytest.raises(MalformedTemplate):
        Registry().register_elem_derivative("exp", TRUE, Apply("exp", [x]), arity=2)


def test_inverse_of_missing_function(registry):
    with pytest.raises(UnknownFunction):
        registry.register_elem_inverse("g", "missing-fn", TRUE, TRUE)


def test_duplicate_inverse(registry):
    with pytest.raises(DuplicateRegistration):
        registry.register_elem_inverse("ln", "exp", TRUE, TRUE)


def test_square_inverse_with_named_domains(registry):
    reg = load_registry_file(registry, SQUARE_FORMS)
    reg = reg.register_elem_inverse(
        "square-inverse",
        "square",
        Named("square-domain-p", x),
        Named("square-inverse-domain-p", x),
    )
    record = reg.inverse_for("square-inverse")
    assert record.fn_name == "square"
    assert record.inv_domain_pred == Named("square-inverse-domain-p", x)


def test_inverse_needs_known_predicates(registry):
    reg = load_registry_file(registry, "(defun square (x) (* x x))")
    with pytest.raises(UnknownPredicate):
        reg.register_elem_inverse("square-inverse", "square", Named("square-domain-p", x), TRUE)


def test_define_square(registry):
    reg = registry.define_function("square", "x", Mul(x, x))
    assert evaluate(Apply("square", [Const(3)]), {}, reg) == 9


def test_direct_recursion(registry):
    with pytest.raises(RecursionDetected) as info:
        registry.define_function("f", "x", Apply("f", [x]))
    assert info.value.cycle == ["f", "f"]


def test_mutual_recursion(registry):
    # h exists first as a name without a body, so g can call it
    reg = registry.register_elem_inverse("h", "exp", TRUE, TRUE)
    reg = reg.define_function("g", "x", Apply("h", [x]))
    with pytest.raises(RecursionDetected) as info:
        reg.define_function("h", "x", Apply("g", [x]))
    assert info.value.cycle == ["h", "g", "h"]


def test_define_function_errors(registry):
    with pytest.raises(UnknownFunction):
        registry.define_function("k", "x", Apply("mystery", [x]))
    with pytest.raises(MalformedTemplate):
        registry.define_function("k", "x", Mul(x, Var("y")))
    with pytest.raises(DuplicateRegistration):
        registry.define_function("exp", "x", x)
    with pytest.raises(ArityError):
        registry.define_function("k", "x", Apply("raise", [x]))


def test_call_builtins(registry):
    assert registry.call("raise", [2 + 0j, 3 + 0j]) == 8
    assert registry.call("unary--", [2 + 0j]) == -2
    assert registry.arity_of("raise") == 2
    assert registry.arity_of("tan") == 1
    with pytest.raises(UnknownFunction):
        registry.arity_of("mystery")


def test_call_inverse_without_evaluator(registry):
    reg = registry.register_elem_inverse("h", "exp", TRUE, TRUE)
    with pytest.raises(UnknownFunction):
        reg.call("h", [1])


def test_load_reciprocal_source_form():
    reg = load_registry_file(
        Registry(),
        "(def-elem-derivative unary-/ unary-/-deriv (not (equal x 0)) (- (/ (* x x))))",
    )
    record = reg.elementary_for("unary-/")
    assert record.domain_template == NonZero(x)
    assert record.deriv_template == Neg(Recip(Mul(x, x)))


def test_load_empty_file(registry):
    assert load_registry_file(registry, "") == registry
    assert load_registry_file(registry, "; nothing here\n") == registry


def test_load_defun_then_inverse(registry):
    reg = load_registry_file(
        registry,
        """
        (defun cube (x) (* x x x))
        (def-elem-inverse cube-root cube t t)
        """,
    )
    assert reg.function("cube").body == Mul(Mul(x, x), x)
    assert reg.inverse_for("cube-root").fn_name == "cube"


def test_load_source_inverse_order(registry):
    reg = load_registry_file(registry, "(def-elem-inverse log2 log2-deriv t (realp x) exp)")
    record = reg.inverse_for("log2")
    assert record.fn_name == "exp"
    assert record.inv_domain_pred == IsReal(x)


def test_load_two_argument_forms(registry):
    reg = load_registry_file(
        registry,
        """
        (defun scaled-sin (x a) (* a (sin x)))
        (def-elem-derivative2 scaled-sin 0 t (* a (cos x)))
        """,
    )
    assert reg.function("scaled-sin").formals == ("x", "a")
    record = reg.elementary_for("scaled-sin", 0)
    assert record.arity == 2
    assert record.evaluator == "inline"
    assert reg.elementary_for("scaled-sin", 1) is None


def test_load_failure_names_the_form(registry):
    text = "(defun square (x) (* x x))\n(def-elem-derivative exp t (exp x))"
    with pytest.raises(DuplicateRegistration) as info:
        load_registry_file(registry, text)
    assert info.value.form_index == 1
    assert "while applying registry form #1" in info.value.__notes__


@pytest.mark.parametrize(
    "text",
    [
        "(frobnicate x)",
        "(defpred p (x y) t)",
        "(defun f x (* x x))",
        "(def-elem-derivative2 raise 1/2 t 1)",
        "x",
    ],
)
def test_malformed_forms(registry, text):
    with pytest.raises(MalformedTemplate):
        load_registry_file(registry, text)


def test_records_keep_registration_order(registry):
    kinds = [(kind, getattr(record, "fn_name", getattr(record, "name", None))) for kind, record in registry.records()]
    assert kinds[:4] == [
        ("elementary", "unary--"),
        ("elementary", "unary-/"),
        ("elementary", "exp"),
        ("inverse", "exp"),
    ]
    assert kinds[-2:] == [("function", "tan"), ("function", "sqrt")]


def test_registration_only_adds(registry):
    reg = load_registry_file(registry, SQUARE_FORMS)
    for kind, record in registry.records():
        assert (kind, record) in list(reg.records())
    assert reg.order[: len(registry.order)] == registry.order


def test_seed_domains(registry):
    assert registry.inverse_for("ln").inv_domain_pred == And(IsReal(x), InOpenInterval(x, 0, INF))
    assert registry.elementary_for("asin").domain_template == InOpenInterval(x, -1, 1)
    assert registry.elementary_for("raise", 1).varying_arg == 1
