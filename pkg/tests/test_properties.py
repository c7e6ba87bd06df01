"""
Randomized properties of evaluation, differentiation, sampling and cleanup.
"""

import numpy as np
from hypothesis import HealthCheck, given, settings

from checker import CheckConfig, requires_real, sample_points
from differ import differentiate
from elementary import seed_registry
from errors import DomainViolation, Overflow, VaryingHeldArgument
from expr import Add, Mul, Neg, Recip, eval_pred, evaluate, substitute
from simplify import simplify
from tests.strategies import any_expressions, cleanup_expressions, partial_expressions, smooth_expressions

REG = seed_registry()
EPS = float(np.finfo(float).eps)
ENV = {"x": 0.7 + 0.2j, "y": -1.3, "a": 2.1}
ORACLE_POINTS = [-1.7, -0.9, -0.3, 0.4, 1.1, 1.8]

sweep = settings(max_examples=200, deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow])


def value_or_none(e, env):
    try:
        return evaluate(e, env, REG)
    except DomainViolation:
        return None


@given(any_expressions(), any_expressions())
@settings(deadline=None)
def test_evaluation_is_homomorphic(u, v):
    a, b = value_or_none(u, ENV), value_or_none(v, ENV)
    if a is None or b is None:
        return
    for combined, expected in [(Add(u, v), a + b), (Mul(u, v), a * b)]:
        value = value_or_none(combined, ENV)
        if value is not None:
            assert value == expected
    assert evaluate(Neg(u), ENV, REG) == -a
    if a != 0:
        reciprocal = value_or_none(Recip(u), ENV)
        assert reciprocal is None or abs(reciprocal - 1 / a) <= 1e-12 * abs(1 / a)


@given(any_expressions(), any_expressions())
@settings(deadline=None)
def test_substitution_lemma(e, r):
    replacement = value_or_none(r, ENV)
    if replacement is None:
        return
    left = value_or_none(substitute(e, "x", r), ENV)
    right = value_or_none(e, {**ENV, "x": replacement})
    if left is not None and right is not None:
        assert left == right


def central(e, point, h):
    return (evaluate(e, {"x": point + h}, REG) - evaluate(e, {"x": point - h}, REG)) / (2 * h)


def noise(e, point, h):
    size = max(abs(evaluate(e, {"x": point + s}, REG)) for s in (-h, h))
    return 64 * EPS * max(1.0, size) / h


@given(smooth_expressions(depth=4))
@sweep
def test_derivatives_match_central_differences(e):
    derivative = differentiate(e, "x", REG).derivative
    for point in ORACLE_POINTS:
        try:
            claimed = evaluate(derivative, {"x": point}, REG)
            coarse = central(e, point, 1e-3)
            fine = central(e, point, 1e-4)
            floor = noise(e, point, 1e-4)
        except Overflow:
            continue
        scale = max(1.0, abs(fine))
        if abs(coarse - fine) > 1e-5 * scale + floor:
            # not yet in the asymptotic regime at these steps
            continue
        richardson = (100 * fine - coarse) / 99
        assert abs(claimed - richardson) <= 1e-5 * max(1.0, abs(claimed)) + floor, (point, claimed, richardson)


def _candidates(real_only: bool):
    if real_only:
        return [complex(v) for v in np.linspace(-10, 10, 1000)]
    return [complex(re, im) for re in np.linspace(-10, 10, 40) for im in np.linspace(-2, 2, 25)]


def _usable(domain, guards, point):
    env = {"x": point}
    if not eval_pred(domain, env, REG):
        return False
    try:
        for e in guards:
            evaluate(e, env, REG)
    except Overflow:
        return False
    except DomainViolation:
        pass
    return True


@given(partial_expressions())
@settings(max_examples=50, deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow])
def test_sampling_finds_points_of_populated_domains(e):
    result = differentiate(e, "x", REG)
    guards = (e, result.derivative)
    real_only = requires_real(result.domain, REG)
    populated = sum(_usable(result.domain, guards, point) for point in _candidates(real_only))
    if populated < 10:
        return
    cfg = CheckConfig()
    sample = sample_points(result.domain, "x", REG, cfg, np.random.default_rng([cfg.rng_seed, 0]), guards)
    assert len(sample.points) >= cfg.min_accepted


@given(cleanup_expressions())
@settings(max_examples=500, deadline=None, derandomize=True)
def test_simplify_preserves_values(e):
    simplified = simplify(e)
    for x in (0.37, -1.25, 2.0):
        for y in (1.5, -0.75):
            env = {"x": x, "y": y}
            original = value_or_none(e, env)
            if original is None:
                continue
            value = evaluate(simplified, env, REG)
            assert value == original


@given(cleanup_expressions())
@settings(max_examples=500, deadline=None, derandomize=True)
def test_simplify_is_idempotent(e):
    once = simplify(e)
    assert simplify(once) == once


@given(any_expressions())
@settings(deadline=None)
def test_differentiation_is_total_on_registered_functions(e):
    try:
        result = differentiate(e, "x", REG)
    except VaryingHeldArgument:
        return
    assert len(result.obligations) >= 7
