"""
Numeric checking of derivative and inverse obligations.

Each obligation kind is read as a sampled statement. Points are drawn from a
seeded numpy stream inside a box and kept only when they satisfy the relevant
domain predicate (rejection sampling). Limits such as ``i-close`` become a
shrinking step schedule: the difference quotient has to approach the claimed
derivative as the step shrinks, and end up within tolerance of it.

Reports are deterministic for a given configuration. Every obligation draws
from its own stream, seeded by ``(rng_seed, index)``, so running checks on a
thread pool does not change any result.
"""

from __future__ import annotations

import cmath
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from attrs import field, frozen

from config import Config
from differ import DiffResult, Obligation, ObligationKind
from errors import DomainViolation, EvaluationError, InsufficientSamples, Overflow
from expr import (
    DomainPred,
    Expr,
    InOpenInterval,
    IsReal,
    Named,
    conjuncts,
    eval_pred,
    evaluate,
)
from registry import Registry

logger = logging.getLogger(__name__)

EPS = float(np.finfo(float).eps)

# fixed tolerances of the exact relations between a function and its inverse
RELATION_TOL = 1e-9
PRIME_FLOOR = 1e-9
CONVERGENCE_SLACK = 1e-12

# close may miss by this many steps times the second-derivative scale
TRUNCATION_FACTOR = 10
# deviations of a continuous function shrink about as fast as the step
LINEAR_SLACK = 5
# steps below the schedule, each a tenth of the last, where a point needs them
REFINE_STEPS = 5


def _positive(instance, attribute, value):
    if not value > 0:
        raise ValueError(f"{attribute.name} must be positive, got {value!r}")


def _interval(instance, attribute, value):
    if len(value) != 2 or value[0] > value[1]:
        raise ValueError(f"{attribute.name} must be a (lo, hi) pair with lo <= hi, got {value!r}")


def _schedule(instance, attribute, value):
    if not value or any(h <= 0 for h in value):
        raise ValueError("h_schedule must be a non-empty list of positive steps")
    if any(a <= b for a, b in zip(value, value[1:])):
        raise ValueError("h_schedule must be strictly decreasing")


def _seed(instance, attribute, value):
    if not 0 <= value < 2**64:
        raise ValueError(f"rng_seed must be an unsigned 64-bit integer, got {value!r}")


@frozen
class CheckConfig:
    sample_count: int = field(factory=lambda: Config.SAMPLES, validator=_positive)
    box: Tuple[float, float] = field(factory=lambda: Config.BOX, converter=tuple, validator=_interval)
    imag_box: Tuple[float, float] = field(
        factory=lambda: Config.IMAG_BOX, converter=tuple, validator=_interval
    )
    rng_seed: int = field(factory=lambda: Config.SEED, validator=_seed)
    h_schedule: Tuple[float, ...] = field(
        factory=lambda: Config.H_SCHEDULE, converter=tuple, validator=_schedule
    )
    close_tol: float = field(factory=lambda: Config.CLOSE_TOL, validator=_positive)
    cont_modulus: float = field(factory=lambda: Config.CONT_MODULUS, validator=_positive)
    min_accepted: int = field(factory=lambda: Config.MIN_ACCEPTED, validator=_positive)
    not_close_gap: float = field(factory=lambda: Config.NOT_CLOSE_GAP, validator=_positive)
    image_gap: float = field(factory=lambda: Config.IMAGE_GAP, validator=_positive)
    oversampling: int = field(factory=lambda: Config.OVERSAMPLING, validator=_positive)
    workers: int = field(factory=lambda: Config.WORKERS, validator=_positive)
    bindings: Mapping[str, complex] = field(factory=dict, eq=False)

    def env(self, var: str, point: complex) -> Dict[str, complex]:
        return {**self.bindings, var: point}


@frozen
class CheckEntry:
    """Outcome of one obligation.

    ``residual`` is the worst relative error for closeness, continuity and the
    inverse relations. For ``prime-not-zero`` and ``preserves-not-close`` it is
    the smallest magnitude seen, since those fail by getting too small.
    """

    label: str
    kind: str
    status: str
    tried: int = 0
    accepted: int = 0
    residual: float = 0.0
    counterexample: Tuple[complex, ...] = field(default=(), converter=tuple)
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"


@frozen
class CheckReport:
    entries: Tuple[CheckEntry, ...] = field(converter=tuple)

    @property
    def passed(self) -> bool:
        return all(entry.passed for entry in self.entries)

    @property
    def failures(self) -> List[CheckEntry]:
        return [entry for entry in self.entries if not entry.passed]


@frozen
class Sample:
    points: Tuple[complex, ...] = field(converter=tuple)
    tried: int
    complex_plane: bool


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def requires_real(p: DomainPred, reg: Registry) -> bool:
    """Whether ``p`` confines points to the real line."""
    for leaf in conjuncts(p):
        if isinstance(leaf, (IsReal, InOpenInterval)):
            return True
        if isinstance(leaf, Named) and requires_real(reg.predicate(leaf.pred).body, reg):
            return True
    return False


def _representable(guards: Sequence[Expr], env, reg: Registry) -> bool:
    for e in guards:
        try:
            evaluate(e, env, reg)
        except Overflow:
            return False
        except DomainViolation:
            # in the domain yet not evaluable; left for the checks to report
            pass
    return True


def sample_points(
    domain: DomainPred,
    var: str,
    reg: Registry,
    cfg: CheckConfig,
    rng: np.random.Generator,
    guards: Sequence[Expr] = (),
) -> Sample:
    """Draw up to ``cfg.sample_count`` points of ``domain``.

    Points whose guard expressions overflow double precision are skipped, as
    values beyond that range have no finite representative.
    """
    complex_plane = not requires_real(domain, reg)
    lo, hi = cfg.box
    ilo, ihi = cfg.imag_box if complex_plane else (0.0, 0.0)
    limit = cfg.sample_count * cfg.oversampling

    accepted: List[complex] = []
    tried = 0
    while len(accepted) < cfg.sample_count and tried < limit:
        batch = min(cfg.sample_count, limit - tried)
        candidates = rng.uniform(lo, hi, batch) + 1j * rng.uniform(ilo, ihi, batch)
        for candidate in candidates:
            tried += 1
            point = complex(candidate)
            env = cfg.env(var, point)
            if eval_pred(domain, env, reg) and _representable(guards, env, reg):
                accepted.append(point)
                if len(accepted) == cfg.sample_count:
                    break

    if len(accepted) < cfg.min_accepted:
        logger.warning("Only %d of %d candidates were in the domain", len(accepted), tried)
        raise InsufficientSamples(len(accepted), tried, cfg.min_accepted)
    logger.debug("Accepted %d of %d candidates", len(accepted), tried)
    return Sample(accepted, tried, complex_plane)


# ---------------------------------------------------------------------------
# Per-kind checks
# ---------------------------------------------------------------------------


class _Tally:
    def __init__(self, smallest: bool = False):
        self.smallest = smallest
        self.residual: Optional[float] = None
        self.counterexample: Tuple[complex, ...] = ()
        self.detail = ""

    def observe(self, residual: float, point: Tuple[complex, ...], ok: bool, detail: str = ""):
        if self.residual is None:
            self.residual = residual
        elif self.smallest:
            self.residual = min(self.residual, residual)
        else:
            self.residual = max(self.residual, residual)
        if not ok and not self.counterexample:
            self.counterexample = point
            self.detail = detail

    def fail(self, point: Tuple[complex, ...], detail: str):
        if not self.counterexample:
            self.counterexample = point
            self.detail = detail

    @property
    def ok(self) -> bool:
        return not self.counterexample


def _value(e: Expr, env, reg: Registry, tally: _Tally, point) -> Optional[complex]:
    try:
        return evaluate(e, env, reg)
    except DomainViolation as exc:
        error = EvaluationError(f"not evaluable: {exc}", point)
        tally.fail(error.point, str(error))
        return None


def _neighbour(e: Expr, domain: DomainPred, env, reg: Registry) -> Optional[complex]:
    try:
        return evaluate(e, env, reg) if eval_pred(domain, env, reg) else None
    except DomainViolation:
        return None


def _step_scale(x: complex) -> float:
    return min(max(abs(x), 1e-6), 1.0)


def _directions(sample: Sample) -> Tuple[complex, ...]:
    return (1, 1j) if sample.complex_plane else (1,)


def _check_number(target: Expr, ob: Obligation, reg, cfg, sample: Sample) -> _Tally:
    tally = _Tally()
    for x in sample.points:
        value = _value(target, cfg.env(ob.var, x), reg, tally, (x,))
        if value is not None and not cmath.isfinite(value):
            tally.fail((x,), f"non-finite value {value}")
    tally.residual = 0.0
    return tally


def _refinements(cfg: CheckConfig) -> Tuple[float, ...]:
    """Extra steps below the schedule, tried only where the schedule is too coarse."""
    return tuple(cfg.h_schedule[-1] * 10.0**-k for k in range(1, REFINE_STEPS + 1))


def _check_continuous(target: Expr, ob: Obligation, reg, cfg: CheckConfig, sample: Sample) -> _Tally:
    tally = _Tally()
    for x in sample.points:
        fx = _value(target, cfg.env(ob.var, x), reg, tally, (x,))
        if fx is None:
            continue
        scale = _step_scale(x)
        for direction in _directions(sample):
            deviations = []
            ok = False
            for h in cfg.h_schedule + _refinements(cfg):
                if h < cfg.h_schedule[-1] and (ok or not deviations):
                    break
                y = x + h * scale * direction
                fy = _neighbour(target, ob.subject_domain, cfg.env(ob.var, y), reg)
                if fy is not None:
                    deviations.append((h, abs(fy - fx), 16 * EPS * max(1.0, abs(fx), abs(fy))))
                    ok = _continuity_holds(deviations, fx, cfg)
            if not deviations:
                continue
            step, last, _ = deviations[-1]
            tally.observe(last / max(1.0, abs(fx)), (x,), ok, f"jump of {last:.3g} at step {step * scale:.1e}")
    return tally


def _continuity_holds(deviations: Sequence[Tuple[float, float, float]], fx: complex, cfg: CheckConfig) -> bool:
    _, last, floor = deviations[-1]
    shrinking = all(b <= 10 * a + fb for (_, a, _), (_, b, fb) in zip(deviations, deviations[1:]))
    small = last <= cfg.cont_modulus * max(1.0, abs(fx)) + floor
    return (shrinking and small) or _shrinks_with_step(deviations)


def _shrinks_with_step(deviations: Sequence[Tuple[float, float, float]]) -> bool:
    """Whether the last deviation fell in proportion to its step; a jump keeps its size."""
    if len(deviations) < 2:
        return False
    (h1, d1, _), (h2, d2, floor) = deviations[-2:]
    return d2 <= LINEAR_SLACK * (h2 / h1) * d1 + floor


def _check_close(ob: Obligation, reg, cfg: CheckConfig, sample: Sample) -> _Tally:
    tally = _Tally()
    for x in sample.points:
        env = cfg.env(ob.var, x)
        fx = _value(ob.subject, env, reg, tally, (x,))
        fpx = _value(ob.subject_prime, env, reg, tally, (x,))
        if fx is None or fpx is None:
            continue
        scale = _step_scale(x)
        for direction in _directions(sample):
            quotients = []
            ok = False
            for h in cfg.h_schedule + _refinements(cfg):
                if h < cfg.h_schedule[-1] and (ok or not quotients):
                    break
                y = x + h * scale * direction
                fy = _neighbour(ob.subject, ob.subject_domain, cfg.env(ob.var, y), reg)
                if fy is None or y == x:
                    continue
                quotient = (fx - fy) / (x - y)
                floor = 16 * EPS * max(1.0, abs(fx), abs(fy)) / abs(y - x)
                quotients.append((abs(y - x), quotient, floor))
                ok = _close_holds(quotients, fpx, cfg)
            if not quotients:
                continue
            last = abs(quotients[-1][1] - fpx)
            tally.observe(
                last / max(1.0, abs(fpx)),
                (x,),
                ok,
                f"difference quotient off by {last:.3g} from claimed derivative {fpx:.6g}",
            )
    return tally


def _close_holds(quotients: Sequence[Tuple[float, complex, float]], fpx: complex, cfg: CheckConfig) -> bool:
    first = abs(quotients[0][1] - fpx)
    _, q, floor = quotients[-1]
    last = abs(q - fpx)
    return (
        last <= cfg.close_tol * max(1.0, abs(fpx)) + floor + _truncation(quotients)
        and last <= first + max(CONVERGENCE_SLACK, floor)
    )


def _truncation(quotients: Sequence[Tuple[float, complex, float]]) -> float:
    """Error allowed at the smallest step, from the local second-derivative scale.

    Two successive quotients differ by about ``|f''| / 2`` per unit of step.
    """
    if len(quotients) < 2:
        return 0.0
    (s1, q1, _), (s2, q2, _) = quotients[-2:]
    curvature = 2 * abs(q1 - q2) / abs(s1 - s2)
    return TRUNCATION_FACTOR * s2 * curvature


def _check_in_range(ob: Obligation, reg, cfg: CheckConfig, sample: Sample) -> _Tally:
    tally = _Tally()
    for x in sample.points:
        g = _value(ob.subject, cfg.env(ob.var, x), reg, tally, (x,))
        if g is not None and not eval_pred(ob.fn_domain, cfg.env(ob.var, g), reg):
            tally.fail((x,), f"inverse value {g:.6g} lies outside the function's domain")
    tally.residual = 0.0
    return tally


def _check_domain_is_number(ob: Obligation, reg, cfg: CheckConfig, sample: Sample) -> _Tally:
    tally = _Tally()
    for x in sample.points:
        if not cmath.isfinite(x):
            tally.fail((x,), "domain point is not a finite number")
    tally.residual = 0.0
    return tally


def _check_inverse_relation(ob: Obligation, reg, cfg: CheckConfig, sample: Sample) -> _Tally:
    tally = _Tally()
    for x in sample.points:
        g = _value(ob.subject, cfg.env(ob.var, x), reg, tally, (x,))
        if g is None:
            continue
        fg = _value(ob.fn, cfg.env(ob.var, g), reg, tally, (x,))
        if fg is None:
            continue
        error = abs(fg - x) / max(1.0, abs(x))
        tally.observe(error, (x,), error <= RELATION_TOL, f"f(inverse(x)) = {fg:.12g}")
    return tally


def _check_ddx_relation(ob: Obligation, reg, cfg: CheckConfig, sample: Sample) -> _Tally:
    tally = _Tally()
    for x in sample.points:
        env = cfg.env(ob.var, x)
        g = _value(ob.subject, env, reg, tally, (x,))
        claimed = _value(ob.subject_prime, env, reg, tally, (x,))
        if g is None or claimed is None:
            continue
        slope = _value(ob.fn_prime, cfg.env(ob.var, g), reg, tally, (x,))
        if slope is None:
            continue
        if slope == 0:
            tally.fail((x,), "derivative of the function vanishes at the inverse")
            continue
        expected = 1 / slope
        error = abs(claimed - expected) / max(1.0, abs(expected))
        tally.observe(error, (x,), error <= RELATION_TOL, f"expected {expected:.12g}")
    return tally


def _check_prime_not_zero(ob: Obligation, reg, cfg: CheckConfig, sample: Sample) -> _Tally:
    tally = _Tally(smallest=True)
    for x in sample.points:
        slope = _value(ob.fn_prime, cfg.env(ob.var, x), reg, tally, (x,))
        if slope is not None:
            tally.observe(abs(slope), (x,), abs(slope) > PRIME_FLOOR, f"derivative {slope:.3g}")
    return tally


def _check_preserves_not_close(ob: Obligation, reg, cfg: CheckConfig, sample: Sample) -> _Tally:
    tally = _Tally(smallest=True)
    points = sample.points
    threshold = cfg.not_close_gap * cfg.image_gap
    for i, x in enumerate(points):
        partners = [points[(i + 1) % len(points)]]
        if eval_pred(ob.fn_domain, cfg.env(ob.var, -x), reg):
            partners.append(-x)
        fx = _value(ob.fn, cfg.env(ob.var, x), reg, tally, (x,))
        if fx is None:
            continue
        for y in partners:
            if abs(x - y) < cfg.not_close_gap:
                continue
            try:
                fy = evaluate(ob.fn, cfg.env(ob.var, y), reg)
            except DomainViolation:
                continue
            gap = abs(fx - fy)
            tally.observe(gap, (x, y), gap > threshold, f"images differ by only {gap:.3g}")
    if tally.residual is None:
        tally.residual = float("inf")
    return tally


_CHECKS: Dict[ObligationKind, Callable[[Obligation, Registry, CheckConfig, Sample], _Tally]] = {
    ObligationKind.NUMBER: lambda ob, *rest: _check_number(ob.subject, ob, *rest),
    ObligationKind.STANDARD: lambda ob, *rest: _check_number(ob.subject, ob, *rest),
    ObligationKind.CONTINUOUS: lambda ob, *rest: _check_continuous(ob.subject, ob, *rest),
    ObligationKind.PRIME_NUMBER: lambda ob, *rest: _check_number(ob.subject_prime, ob, *rest),
    ObligationKind.PRIME_STANDARD: lambda ob, *rest: _check_number(ob.subject_prime, ob, *rest),
    ObligationKind.PRIME_CONTINUOUS: lambda ob, *rest: _check_continuous(ob.subject_prime, ob, *rest),
    ObligationKind.CLOSE: _check_close,
    ObligationKind.INVERSE_IN_RANGE: _check_in_range,
    ObligationKind.DOMAIN_IS_NUMBER: _check_domain_is_number,
    ObligationKind.INVERSE_RELATION: _check_inverse_relation,
    ObligationKind.DDX_RELATION: _check_ddx_relation,
    ObligationKind.PRIME_NOT_ZERO: _check_prime_not_zero,
    ObligationKind.PRESERVES_NOT_CLOSE: _check_preserves_not_close,
}

# kinds quantified over the function's own domain rather than the subject's
_FN_DOMAIN_KINDS = {
    ObligationKind.DOMAIN_IS_NUMBER,
    ObligationKind.PRIME_NOT_ZERO,
    ObligationKind.PRESERVES_NOT_CLOSE,
}


def _sampling_plan(ob: Obligation) -> Tuple[DomainPred, Tuple[Expr, ...]]:
    if ob.name in _FN_DOMAIN_KINDS:
        return ob.fn_domain, (ob.fn,)
    if ob.fn is not None:
        return ob.subject_domain, (ob.subject,)
    guards = (ob.subject,) if ob.subject_prime is None else (ob.subject, ob.subject_prime)
    return ob.subject_domain, guards


def check_points(ob: Obligation, reg: Registry, cfg: CheckConfig, sample: Sample) -> CheckEntry:
    """Check ``ob`` at the given points only."""
    tally = _CHECKS[ob.name](ob, reg, cfg, sample)
    entry = CheckEntry(
        label=ob.label,
        kind=ob.name.value,
        status="pass" if tally.ok else "fail",
        tried=sample.tried,
        accepted=len(sample.points),
        residual=0.0 if tally.residual is None else tally.residual,
        counterexample=tally.counterexample,
        detail=tally.detail,
    )
    if not entry.passed:
        logger.info("%s failed at %s: %s", entry.label, entry.counterexample, entry.detail)
    return entry


def check_obligation(ob: Obligation, reg: Registry, cfg: CheckConfig, stream: int = 0) -> CheckEntry:
    """Sample the obligation's domain and check it there.

    Raises :class:`InsufficientSamples` when too few points of the domain
    turn up within the oversampling budget.
    """
    rng = np.random.default_rng([cfg.rng_seed, stream])
    domain, guards = _sampling_plan(ob)
    sample = sample_points(domain, ob.var, reg, cfg, rng, guards)
    return check_points(ob, reg, cfg, sample)


def _guarded(ob: Obligation, reg: Registry, cfg: CheckConfig, stream: int) -> CheckEntry:
    try:
        return check_obligation(ob, reg, cfg, stream)
    except InsufficientSamples as e:
        return CheckEntry(
            label=ob.label,
            kind=ob.name.value,
            status="insufficient",
            tried=e.tried,
            accepted=e.accepted,
            detail=str(e),
        )


def check_all(
    result: Union[DiffResult, Iterable[Obligation]], reg: Registry, cfg: CheckConfig
) -> CheckReport:
    """Check every obligation; the report keeps the obligations' order."""
    obligations = list(result.obligations if isinstance(result, DiffResult) else result)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            entries = list(
                pool.map(lambda item: _guarded(item[1], reg, cfg, item[0]), enumerate(obligations))
            )
    else:
        entries = [_guarded(ob, reg, cfg, index) for index, ob in enumerate(obligations)]

    report = CheckReport(entries)
    logger.info("Checked %d obligations, %d failed", len(entries), len(report.failures))
    return report


def check_agreement(
    claimed: Expr,
    computed: Expr,
    domain: DomainPred,
    var: str,
    reg: Registry,
    cfg: CheckConfig,
    label: str = "agrees",
    stream: int = 0,
) -> CheckEntry:
    """Compare two derivative expressions pointwise on ``domain``."""
    rng = np.random.default_rng([cfg.rng_seed, stream])
    try:
        sample = sample_points(domain, var, reg, cfg, rng, (claimed, computed))
    except InsufficientSamples as e:
        return CheckEntry(label, "agrees", "insufficient", e.tried, e.accepted, detail=str(e))

    tally = _Tally()
    for x in sample.points:
        env = cfg.env(var, x)
        a = _value(claimed, env, reg, tally, (x,))
        b = _value(computed, env, reg, tally, (x,))
        if a is None or b is None:
            continue
        error = abs(a - b) / max(1.0, abs(b))
        tally.observe(error, (x,), error <= RELATION_TOL, f"claimed {a:.12g}, computed {b:.12g}")
    return CheckEntry(
        label,
        "agrees",
        "pass" if tally.ok else "fail",
        sample.tried,
        len(sample.points),
        0.0 if tally.residual is None else tally.residual,
        tally.counterexample,
        tally.detail,
    )
