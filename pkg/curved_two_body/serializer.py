import csv
import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence, TextIO

import numpy as np

FLOAT_FORMAT = ".17g"


def format_float(x: float) -> str:
    return format(float(x), FLOAT_FORMAT)


def _json_value(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            return "null"
        return format_float(value)
    if isinstance(value, complex):
        return _json_value([value.real, value.imag])
    if isinstance(value, Enum):
        return json.dumps(value.value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, Mapping):
        items = ", ".join(
            f"{json.dumps(str(key))}: {_json_value(val)}" for key, val in value.items()
        )
        return "{" + items + "}"
    if isinstance(value, np.ndarray):
        return _json_value(value.tolist())
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_json_value(val) for val in value) + "]"
    raise TypeError(f"Cannot serialize value of type {type(value).__name__}.")


def json_line(record: Mapping[str, Any]) -> str:
    """One JSON object, floats with 17 significant digits, no trailing newline."""
    return _json_value(record)


def _csv_cell(value: Any) -> str:
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if value is None:
        return ""
    return str(value)


def write_rows(rows: Iterable[Sequence[Any]], header: Sequence[str], handle: TextIO) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(value) for value in row])


def write_csv(
    rows: Iterable[Sequence[Any]],
    header: Sequence[str],
    path: Path,
) -> Path:
    with open(path, "w", newline="") as handle:
        write_rows(rows, header, handle)
    return path
