"""
Derivative Session
------------------
This file contains the DerivativeSession class which handles:
- Registry setup (built-ins plus registry files, in order)
- Check configuration from Config and command-line overrides
- The derive / check / evaluate workflow shared by the commands
"""

import functools
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import click
from attrs import evolve

from checker import CheckConfig, CheckEntry, CheckReport, check_agreement, check_all
from differ import DiffResult, Obligation, derivative_hyps, differentiate
from elementary import seed_registry
from errors import DerivativeError
from expr import Expr, evaluate
from registry import Registry, load_registry_file
from sexpr import parse_expr
from utils import parse_binding

logger = logging.getLogger(__name__)


class DerivativeSession:
    def __init__(
        self,
        builtins: bool = True,
        registry_paths: Sequence[str] = (),
        check_config: Optional[CheckConfig] = None,
    ):
        self.builtins = builtins
        self.registry_paths = list(registry_paths)
        self.check_config = check_config or CheckConfig()
        self.registry = Registry()

    def start(self) -> "DerivativeSession":
        """Build the registry: built-ins first, then each file in order"""
        self.registry = seed_registry() if self.builtins else Registry()
        logger.info("Starting with %d registry records", len(self.registry.order))

        for path in self.registry_paths:
            self.load(path)

        logger.info("Session ready with %d registry records", len(self.registry.order))
        return self

    def load(self, path: str):
        """Apply one registry file"""
        text = Path(path).read_text(encoding="utf-8")
        try:
            self.registry = load_registry_file(self.registry, text)
        except DerivativeError as e:
            e.add_note(f"in registry file {path}")
            logger.error("Failed to load registry file %s: %s", path, e)
            raise
        logger.info("Loaded registry file %s", path)

    @property
    def bindings(self) -> Dict[str, complex]:
        return dict(self.check_config.bindings)

    def derive(self, text: str, var: str = "x", name: str = "") -> Tuple[Expr, DiffResult]:
        e = parse_expr(text)
        return e, differentiate(e, var, self.registry, name=name)

    def claimed(self, e: Expr, prime: Expr, var: str = "x", name: str = "") -> List[Obligation]:
        """The seven derivative obligations for a user-supplied prime"""
        domain = differentiate(e, var, self.registry).domain
        return derivative_hyps(e, prime, domain, var, name)

    def check(self, obligations: Iterable[Obligation]) -> CheckReport:
        return check_all(obligations, self.registry, self.check_config)

    def agreement(self, claimed: Expr, result: DiffResult, var: str, stream: int) -> CheckEntry:
        return check_agreement(
            claimed,
            result.derivative,
            result.domain,
            var,
            self.registry,
            self.check_config,
            stream=stream,
        )

    def evaluate(self, text: str) -> complex:
        return evaluate(parse_expr(text), self.bindings, self.registry)


# ---------------------------------------------------------------------------
# Shared command-line plumbing
# ---------------------------------------------------------------------------


def _bindings(values: Sequence[str]) -> Dict[str, complex]:
    bindings = {}
    for value in values:
        try:
            name, number = parse_binding(value)
        except ValueError as e:
            raise click.BadParameter(str(e), param_hint="--bind") from None
        bindings[name] = number
    return bindings


def _stack(options, command):
    for option in reversed(options):
        command = option(command)
    return command


REGISTRY_OPTIONS = [
    click.option(
        "--registry",
        "registry_paths",
        multiple=True,
        type=click.Path(exists=True, dir_okay=False),
        help="Registry file, applied in order (repeatable).",
    ),
    click.option("--no-builtins", is_flag=True, help="Start from an empty registry."),
]

BIND_OPTION = click.option("--bind", "binds", multiple=True, metavar="NAME=VALUE", help="Bind a held parameter.")

CHECKER_OPTIONS = [
    click.option("--seed", type=int, default=None, help="Sampling seed."),
    click.option("--samples", type=click.IntRange(min=1), default=None, help="Samples per obligation."),
    click.option("--box", nargs=2, type=float, default=None, metavar="LO HI", help="Real sampling box."),
    click.option("--imag-box", nargs=2, type=float, default=None, metavar="LO HI", help="Imaginary sampling box."),
    click.option(
        "--report",
        "report_format",
        type=click.Choice(["text", "machine"]),
        default="text",
        show_default=True,
    ),
    click.option("--workers", type=click.IntRange(min=1), default=None, help="Checker threads."),
]


def registry_options(command):
    """Options choosing the registry: --registry and --no-builtins"""
    return _stack(REGISTRY_OPTIONS, command)


def eval_options(command):
    """Registry options plus --bind"""
    return _stack(REGISTRY_OPTIONS + [BIND_OPTION], command)


def session_options(command):
    """Options of the differentiating commands: variable, registries, bindings and sampling"""
    var = click.option("--var", default="x", show_default=True, help="Variable of differentiation.")
    return _stack([var] + REGISTRY_OPTIONS + [BIND_OPTION] + CHECKER_OPTIONS, command)


def build_session(
    registry_paths=(),
    no_builtins=False,
    binds=(),
    seed=None,
    samples=None,
    box=None,
    imag_box=None,
    workers=None,
) -> DerivativeSession:
    overrides = {
        "rng_seed": seed,
        "sample_count": samples,
        "box": box,
        "imag_box": imag_box,
        "workers": workers,
    }
    try:
        cfg = evolve(
            CheckConfig(),
            bindings=_bindings(binds),
            **{key: value for key, value in overrides.items() if value is not None},
        )
    except ValueError as e:
        raise click.UsageError(str(e)) from None
    return DerivativeSession(not no_builtins, registry_paths, cfg).start()


def handle_errors(command):
    """Report engine errors on stderr and exit with status 2"""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except DerivativeError as e:
            logger.error("%s: %s", type(e).__name__, e)
            click.echo(f"error: {type(e).__name__}: {e}", err=True)
            for note in getattr(e, "__notes__", ()):
                click.echo(f"  {note}", err=True)
            click.get_current_context().exit(2)

    return wrapper

