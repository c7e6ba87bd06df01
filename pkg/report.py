"""
Rendering of check reports: an aligned text table for people and a JSON
document for machines. ``parse_machine`` reads the JSON form back.
"""

import json
import logging
from typing import List

from checker import CheckEntry, CheckReport
from utils import format_point, format_residual

logger = logging.getLogger(__name__)

_HEADER = ("obligation", "status", "accepted/tried", "residual", "counterexample")


def render_text(report: CheckReport) -> str:
    rows: List[tuple] = [_HEADER]
    for entry in report.entries:
        rows.append(
            (
                entry.label,
                entry.status,
                f"{entry.accepted}/{entry.tried}",
                format_residual(entry.residual),
                format_point(entry.counterexample),
            )
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(_HEADER))]
    lines = ["  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip() for row in rows]

    for entry in report.failures:
        if entry.detail:
            lines.append(f"{entry.label}: {entry.detail}")

    total = len(report.entries)
    if report.passed:
        lines.append(f"result: pass ({total} obligations)")
    else:
        lines.append(f"result: FAIL ({len(report.failures)} of {total} obligations)")
    return "\n".join(lines)


def render_machine(report: CheckReport) -> str:
    document = {
        "passed": report.passed,
        "obligations": [
            {
                "name": entry.label,
                "kind": entry.kind,
                "status": entry.status,
                "tried": entry.tried,
                "accepted": entry.accepted,
                "residual": entry.residual,
                "counterexample": [[z.real, z.imag] for z in entry.counterexample],
                "detail": entry.detail,
            }
            for entry in report.entries
        ],
    }
    return json.dumps(document, indent=2)


def parse_machine(text: str) -> CheckReport:
    document = json.loads(text)
    return CheckReport(
        CheckEntry(
            label=record["name"],
            kind=record["kind"],
            status=record["status"],
            tried=record["tried"],
            accepted=record["accepted"],
            residual=record["residual"],
            counterexample=[complex(re, im) for re, im in record["counterexample"]],
            detail=record["detail"],
        )
        for record in document["obligations"]
    )


def render(report: CheckReport, report_format: str = "text") -> str:
    return render_machine(report) if report_format == "machine" else render_text(report)
