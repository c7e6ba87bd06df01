"""
Derive Command Handler
"""

import logging

import click

from checker import CheckReport
from report import render
from session import build_session, handle_errors, session_options
from sexpr import parse_expr, print_expr, print_pred
from simplify import simplify, simplify_domain

logger = logging.getLogger(__name__)


@click.command("derive")
@click.argument("expression")
@session_options
@click.option("--simplify", "do_simplify", is_flag=True, help="Simplify the printed derivative.")
@click.option("--check", "do_check", is_flag=True, help="Check every obligation numerically.")
@click.option("--name", default="", help="Prefix for obligation names.")
@click.option("--prime", default=None, metavar="TEXT", help="Also check a preferred form of the derivative.")
@click.option("--trace", is_flag=True, help="Print the rule applied at each subexpression.")
@handle_errors
def derive_command(expression, var, do_simplify, do_check, name, prime, trace, report_format, **options):
    """Differentiate EXPRESSION with respect to --var"""
    session = build_session(**options)
    claimed = parse_expr(prime) if prime is not None else None
    e, result = session.derive(expression, var, name)

    derivative = simplify(result.derivative) if do_simplify else result.derivative
    click.echo(f"derivative: {print_expr(derivative)}")
    click.echo(f"domain: {print_pred(simplify_domain(result.domain))}")
    click.echo(f"obligations: {len(result.obligations)}")

    if trace:
        click.echo("trace:")
        for step in result.trace:
            click.echo(f"  {step.rule:<16} {print_expr(step.expr)}")

    if not (do_check or claimed is not None):
        return

    obligations = list(result.obligations)
    if claimed is not None:
        prefix = f"{name}-prime" if name else "prime"
        obligations += session.claimed(e, claimed, var, prefix)
    report = session.check(obligations)
    if claimed is not None:
        agrees = session.agreement(claimed, result, var, stream=len(obligations))
        report = CheckReport(report.entries + (agrees,))

    click.echo(render(report, report_format))
    if not report.passed:
        logger.info("Derivative check failed for %s", expression)
        click.get_current_context().exit(1)
