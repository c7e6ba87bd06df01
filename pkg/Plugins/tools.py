"""
Evaluation, Simplification and Registry Listing Commands
"""

import logging

import click

from registry import ElemDerivRecord, FnDef, InverseRecord, PredDef, template_args
from session import build_session, eval_options, handle_errors, registry_options
from sexpr import parse_expr, print_expr, print_pred
from simplify import simplify
from utils import format_number

logger = logging.getLogger(__name__)


@click.command("eval")
@click.argument("expression")
@eval_options
@handle_errors
def eval_command(expression, **options):
    """Evaluate EXPRESSION at the point given by --bind"""
    session = build_session(**options)
    click.echo(format_number(session.evaluate(expression)))


@click.command("simplify")
@click.argument("expression")
@handle_errors
def simplify_command(expression):
    """Print the simplified form of EXPRESSION"""
    click.echo(print_expr(simplify(parse_expr(expression))))


def describe(record) -> str:
    """One line per registry record"""
    if isinstance(record, ElemDerivRecord):
        formals = " ".join(template_args(record.arity, record.varying_arg))
        return (
            f"elementary {record.fn_name} ({formals}) "
            f"domain {print_pred(record.domain_template)} "
            f"derivative {print_expr(record.deriv_template)} [{record.evaluator}]"
        )
    if isinstance(record, InverseRecord):
        return (
            f"inverse {record.inv_name} of {record.fn_name} "
            f"domain {print_pred(record.domain_pred)} "
            f"range {print_pred(record.inv_domain_pred)}"
        )
    if isinstance(record, FnDef):
        return f"function {record.name} ({' '.join(record.formals)}) {print_expr(record.body)}"
    if isinstance(record, PredDef):
        return f"predicate {record.name} ({record.formal}) {print_pred(record.body)}"
    raise TypeError(f"unknown registry record {record!r}")


@click.command("registry-list")
@registry_options
@handle_errors
def registry_list_command(**options):
    """List registry records in registration order"""
    session = build_session(**options)
    for _, record in session.registry.records():
        click.echo(describe(record))
