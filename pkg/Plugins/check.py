"""
Check Command Handler
"""

import logging

import click

from report import render
from session import build_session, handle_errors, session_options
from sexpr import parse_expr, print_pred
from simplify import simplify_domain

logger = logging.getLogger(__name__)


@click.command("check")
@click.argument("expression")
@session_options
@click.option("--deriv", "claimed", required=True, metavar="TEXT", help="Claimed derivative of EXPRESSION.")
@click.option("--name", default="", help="Prefix for obligation names.")
@handle_errors
def check_command(expression, claimed, var, name, report_format, **options):
    """Check that --deriv is the derivative of EXPRESSION"""
    session = build_session(**options)
    e = parse_expr(expression)
    prime = parse_expr(claimed)

    obligations = session.claimed(e, prime, var, name)
    click.echo(f"domain: {print_pred(simplify_domain(obligations[0].subject_domain))}")
    click.echo(f"obligations: {len(obligations)}")

    report = session.check(obligations)
    click.echo(render(report, report_format))
    if not report.passed:
        logger.info("Claimed derivative %s of %s failed its checks", claimed, expression)
        click.get_current_context().exit(1)
