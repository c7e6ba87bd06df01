from fractions import Fraction

import numpy as np
import pytest
from attrs import evolve

from checker import (
    CheckConfig,
    Sample,
    _refinements,
    _shrinks_with_step,
    _truncation,
    check_agreement,
    check_all,
    check_obligation,
    check_points,
    requires_real,
    sample_points,
)
from differ import ObligationKind, derivative_hyps, differentiate, inverse_hyps
from errors import InsufficientSamples
from expr import INF, TRUE, And, Apply, Const, InOpenInterval, IsReal, Mul, Named, Neg, NonZero, Recip, Var, eval_pred
from sexpr import parse_expr

x = Var("x")
xx = Mul(x, x)
two_x = Mul(Const(2), x)
positive = And(IsReal(x), InOpenInterval(x, 0, INF))


def by_kind(report):
    return {entry.kind: entry for entry in report.entries}


def test_square_obligations_pass(registry):
    report = check_all(derivative_hyps(xx, two_x, TRUE), registry, CheckConfig())
    assert report.passed
    assert len(report.entries) == 7
    close = by_kind(report)["close"]
    assert close.accepted == 100
    assert close.residual <= 1e-4


def test_reciprocal_obligations_pass(registry):
    record = registry.elementary_for("unary-/")
    obligations = derivative_hyps(Recip(x), record.deriv_template, record.domain_template)
    report = check_all(obligations, registry, CheckConfig())
    assert report.passed
    assert by_kind(report)["close"].residual <= 1e-4


def test_wrong_prime_fails_with_counterexample(registry):
    cfg = CheckConfig()
    obligations = derivative_hyps(Recip(x), Const(1), NonZero(x))
    report = check_all(obligations, registry, cfg)
    assert not report.passed
    close = by_kind(report)["close"]
    assert close.status == "fail"
    assert len(close.counterexample) == 1

    again = check_points(obligations[-1], registry, cfg, Sample(close.counterexample, 1, True))
    assert again.status == "fail"


def test_unevaluable_point_is_a_failure(registry):
    prime_number = derivative_hyps(xx, Recip(x), TRUE)[3]
    assert prime_number.name is ObligationKind.PRIME_NUMBER
    entry = check_points(prime_number, registry, CheckConfig(), Sample([1 + 0j, 0j], 2, False))
    assert entry.status == "fail"
    assert entry.counterexample == (0j,)
    assert entry.detail.startswith("not evaluable")


def test_square_is_not_injective(registry):
    square = Mul(x, x)
    obligations = inverse_hyps(Apply("sqrt", [x]), square, two_x, IsReal(x), positive, prefix="sqrt")
    preserves = obligations[-1]
    assert preserves.name is ObligationKind.PRESERVES_NOT_CLOSE

    cfg = CheckConfig()
    entry = check_obligation(preserves, registry, cfg)
    assert entry.status == "fail"
    first, second = entry.counterexample
    assert second == -first
    assert entry.residual == 0.0

    again = check_points(preserves, registry, cfg, Sample([first, second], 2, False))
    assert again.status == "fail"


def test_identity_is_its_own_inverse(registry):
    obligations = inverse_hyps(x, x, Const(1), TRUE, TRUE, prefix="id")
    report = check_all(obligations, registry, CheckConfig())
    assert report.passed, report.failures
    assert [entry.label for entry in report.entries][0] == "id-inverse-in-range"


def test_ln_exp_inverse_obligations(registry):
    result = differentiate(Apply("ln", [x]), "x", registry)
    inverse = result.obligations[7:13]
    report = check_all(inverse, registry, CheckConfig())
    assert report.passed, report.failures
    assert by_kind(report)["inverse-relation"].residual <= 1e-12
    assert by_kind(report)["d/dx-relation"].residual <= 1e-12


def test_chain_rule_pipeline_passes(registry):
    e = Apply("sin", [Apply("exp", [xx])])
    result = differentiate(e, "x", registry)
    report = check_all(result, registry, CheckConfig())
    assert len(report.entries) == 21
    assert report.passed, report.failures


@pytest.mark.parametrize("point,complex_plane", [(2.76 + 1.86j, True), (3.0 + 0j, False)])
def test_steep_chain_passes_at_a_point(registry, point, complex_plane):
    e = Apply("sin", [Apply("exp", [xx])])
    result = differentiate(e, "x", registry)
    sample = Sample([point], 1, complex_plane)
    for ob in derivative_hyps(e, result.derivative, result.domain):
        assert check_points(ob, registry, CheckConfig(), sample).passed, ob.label


@pytest.mark.parametrize(
    "text",
    [
        "(- x)",
        "(/ x)",
        "(exp x)",
        "(ln x)",
        "(sin x)",
        "(cos x)",
        "(asin x)",
        "(acos x)",
        "(atan x)",
        "(tan x)",
        "(sqrt x)",
        "(raise x 3)",
        "(raise x -2)",
        "(raise 2 x)",
    ],
)
def test_builtin_derivatives_pass_by_default(registry, text):
    result = differentiate(parse_expr(text), "x", registry)
    report = check_all(result, registry, CheckConfig())
    assert report.passed, report.failures


@pytest.mark.parametrize("fn", ["asin", "acos"])
def test_close_near_the_interval_ends(registry, fn):
    record = registry.elementary_for(fn)
    close = derivative_hyps(Apply(fn, [x]), record.deriv_template, record.domain_template)[-1]
    sample = Sample([0.9777 + 0j, -0.9838 + 0j], 2, False)
    assert check_points(close, registry, CheckConfig(), sample).passed

    skewed = Mul(Const(Fraction(101, 100)), record.deriv_template)
    close = derivative_hyps(Apply(fn, [x]), skewed, record.domain_template)[-1]
    assert check_points(close, registry, CheckConfig(), Sample([0.9777 + 0j], 1, False)).status == "fail"


def test_branch_cut_is_a_jump(registry):
    continuous = derivative_hyps(Apply("ln", [x]), Recip(x), TRUE)[2]
    assert continuous.name is ObligationKind.CONTINUOUS
    entry = check_points(continuous, registry, CheckConfig(), Sample([complex(-2.0, -0.0)], 1, True))
    assert entry.status == "fail"
    assert entry.detail.startswith("jump of 6.28")


def test_shrinks_with_step():
    assert _shrinks_with_step([(1e-4, 4e-1, 0.0), (1e-5, 4e-2, 0.0)])
    assert not _shrinks_with_step([(1e-4, 6.28, 0.0), (1e-5, 6.28, 0.0)])
    assert not _shrinks_with_step([(1e-5, 1e-9, 0.0)])


def test_truncation_follows_curvature():
    # quotients of x**2 at 1 are 2 + s
    quotients = [(1e-2, 2.01, 0.0), (1e-3, 2.001, 0.0)]
    assert _truncation(quotients) == pytest.approx(10 * 1e-3 * 2)
    assert _truncation(quotients[:1]) == 0.0


def test_refinements_continue_the_schedule():
    assert _refinements(CheckConfig()) == pytest.approx((1e-6, 1e-7, 1e-8, 1e-9, 1e-10))


def test_constant_obligations_are_trivial(registry):
    report = check_all(derivative_hyps(Const(5), Const(0), TRUE), registry, CheckConfig())
    assert report.passed
    assert all(entry.residual == 0.0 for entry in report.entries)


def test_empty_domain_is_insufficient(registry):
    cfg = CheckConfig(box=(0.0, 0.0), imag_box=(0.0, 0.0), sample_count=20, oversampling=5)
    obligations = derivative_hyps(Recip(x), Neg(Recip(xx)), NonZero(x))
    with pytest.raises(InsufficientSamples) as info:
        check_obligation(obligations[0], registry, cfg)
    assert (info.value.accepted, info.value.tried) == (0, 100)

    report = check_all(obligations, registry, cfg)
    assert {entry.status for entry in report.entries} == {"insufficient"}
    assert not report.passed


def test_reports_are_deterministic(registry):
    result = differentiate(Mul(x, Apply("sin", [x])), "x", registry)
    cfg = CheckConfig(rng_seed=7)
    assert check_all(result, registry, cfg) == check_all(result, registry, cfg)


def test_other_seeds_draw_other_points(registry):
    cfg = CheckConfig()
    a = sample_points(TRUE, "x", registry, cfg, np.random.default_rng([1, 0]))
    b = sample_points(TRUE, "x", registry, cfg, np.random.default_rng([2, 0]))
    assert a.points != b.points


def test_thread_pool_keeps_the_report(registry):
    result = differentiate(Apply("ln", [Apply("cos", [x])]), "x", registry)
    cfg = CheckConfig(sample_count=30)
    assert check_all(result, registry, evolve(cfg, workers=4)) == check_all(result, registry, cfg)


def test_sampled_points_satisfy_the_domain(registry):
    cfg = CheckConfig(sample_count=50)
    domain = And(positive, NonZero(Apply("sin", [x])))
    sample = sample_points(domain, "x", registry, cfg, np.random.default_rng([cfg.rng_seed, 0]))
    assert not sample.complex_plane
    assert len(sample.points) == 50
    assert sample.tried >= 50
    for point in sample.points:
        assert point.imag == 0.0
        assert eval_pred(domain, {"x": point}, registry)


def test_complex_points_when_the_domain_allows(registry):
    cfg = CheckConfig(sample_count=50)
    sample = sample_points(NonZero(x), "x", registry, cfg, np.random.default_rng(0))
    assert sample.complex_plane
    assert any(point.imag != 0.0 for point in sample.points)
    lo, hi = cfg.imag_box
    assert all(lo <= point.imag <= hi for point in sample.points)


def test_overflowing_points_are_skipped(registry):
    cfg = CheckConfig(box=(0.0, 1000.0), imag_box=(0.0, 0.0), sample_count=30)
    sample = sample_points(TRUE, "x", registry, cfg, np.random.default_rng(3), guards=(Apply("exp", [x]),))
    assert all(point.real < 710 for point in sample.points)


def test_requires_real(registry):
    reg = registry.define_predicate("positive", "z", And(IsReal(Var("z")), InOpenInterval(Var("z"), 0, INF)))
    assert requires_real(positive, reg)
    assert requires_real(Named("positive", x), reg)
    assert not requires_real(And(TRUE, NonZero(x)), reg)


def test_preserves_not_close_without_pairs(registry):
    cfg = CheckConfig(box=(0.0, 0.1), imag_box=(0.0, 0.0), sample_count=20)
    obligations = inverse_hyps(x, x, Const(1), IsReal(x), IsReal(x))
    entry = check_obligation(obligations[-1], registry, cfg)
    assert entry.passed
    assert entry.residual == float("inf")


def test_agreement(registry):
    result = differentiate(xx, "x", registry)
    cfg = CheckConfig()
    good = check_agreement(two_x, result.derivative, result.domain, "x", registry, cfg)
    assert good.passed
    bad = check_agreement(Mul(Const(3), x), result.derivative, result.domain, "x", registry, cfg)
    assert bad.status == "fail"
    assert bad.counterexample


def test_held_parameters_come_from_bindings(registry):
    e = Mul(Var("a"), Apply("sin", [x]))
    result = differentiate(e, "x", registry)
    cfg = CheckConfig(bindings={"a": 3.0}, sample_count=30)
    assert check_all(result, registry, cfg).passed


@pytest.mark.parametrize(
    "overrides",
    [
        {"sample_count": 0},
        {"h_schedule": (1e-3, 1e-2)},
        {"h_schedule": ()},
        {"rng_seed": -1},
        {"box": (1.0, -1.0)},
        {"close_tol": 0.0},
    ],
)
def test_config_validation(overrides):
    with pytest.raises(ValueError):
        CheckConfig(**overrides)
