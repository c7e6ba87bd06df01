"""
Utility Functions
"""

import logging
import re
from typing import Sequence, Tuple

logger = logging.getLogger(__name__)

_COMPLEX_RE = re.compile(
    r"(?P<re>[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)?"
    r"((?P<im>[+-](\d+\.?\d*|\.\d+)?([eE][+-]?\d+)?)i)?"
)


def format_number(z: complex) -> str:
    """Format a complex value, dropping a zero imaginary part"""
    real = f"{z.real:.15g}"
    if z.imag == 0:
        return real
    sign = "-" if z.imag < 0 else "+"
    return f"{real}{sign}{abs(z.imag):.15g}i"


def format_point(point: Sequence[complex]) -> str:
    """Format a counterexample point (or pair of points)"""
    if not point:
        return "-"
    return ",".join(format_number(z) for z in point)


def format_residual(residual: float) -> str:
    return f"{residual:.3e}"


def parse_complex(text: str) -> complex:
    """Parse RE, RE+IMi, RE-IMi or IMi"""
    text = text.strip()
    match = _COMPLEX_RE.fullmatch(text)
    if not text or match is None or not (match.group("re") or match.group("im")):
        raise ValueError(f"not a number: {text!r}")
    real = float(match.group("re") or 0)
    imag = match.group("im")
    if imag in ("+", "-"):
        imag += "1"
    return complex(real, float(imag or 0))


def parse_binding(text: str) -> Tuple[str, complex]:
    """Parse NAME=VALUE from the command line"""
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise ValueError(f"expected NAME=VALUE, got {text!r}")
    return name.strip(), parse_complex(value)
