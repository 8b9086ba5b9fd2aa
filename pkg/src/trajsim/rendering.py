"""Shared text formatting for trace lines, status banners and CSV cells."""

import math


def fmt_short(value: float) -> str:
    """Console rendering of a time or numeric value, 6 significant digits."""
    return "%g" % value


def fmt_full(value: float) -> str:
    """Round-trip-ish rendering used by the environment banner, 15 digits."""
    if value == math.inf:
        return "Inf"
    if value == -math.inf:
        return "-Inf"
    return "%.15g" % value


def fmt_count(value) -> str:
    """A capacity-like value: integer counts stay integers, inf renders Inf."""
    if value == math.inf:
        return "Inf"
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


def fmt_bool(value: bool) -> str:
    return "TRUE" if value else "FALSE"


def fmt_cell(value) -> str:
    """CSV cell rendering: booleans TRUE/FALSE, infinities Inf, floats repr."""
    if isinstance(value, bool):
        return fmt_bool(value)
    if isinstance(value, float):
        if value == math.inf:
            return "Inf"
        if value == -math.inf:
            return "-Inf"
        return repr(value)
    return str(value)
