"""
Report rendering.

CSV (header block of '# key: value' lines, then one table) and JSON via
orjson. Floats are written as Python's shortest round-trip decimal so reports
reproduce doubles exactly; nothing time-dependent is ever emitted.
"""

import csv
import io
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO

import numpy as np
import orjson

from .. import __version__


def format_float(value: float) -> str:
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(value)


def _cell(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if isinstance(value, complex):
        return [format_float(value.real), format_float(value.imag)]
    if value is None:
        return None
    if isinstance(value, dict):
        return {str(k): _cell(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_cell(v) for v in value]
    return str(value)


def header_block(command: str, settings: Dict[str, Any]) -> Dict[str, Any]:
    """Command, library version and every setting that shaped the output."""
    header = {"command": command, "library_version": __version__}
    header.update(settings)
    return header


def _flat_header(header: Dict[str, Any]) -> List[str]:
    lines = []
    for key, value in header.items():
        cell = _cell(value)
        text = orjson.dumps(cell).decode() if isinstance(cell, (list, dict)) else str(cell)
        lines.append(f"# {key}: {text}")
    return lines


def render_csv(header: Dict[str, Any], tables: Sequence[tuple]) -> str:
    """tables: (columns, records) pairs; consecutive tables are separated by a blank line."""
    buffer = io.StringIO()
    buffer.write("\n".join(_flat_header(header)) + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    for index, (columns, records) in enumerate(tables):
        if index:
            buffer.write("\n")
        writer.writerow(columns)
        for record in records:
            writer.writerow([_csv_cell(value) for value in record])
    return buffer.getvalue()


def _csv_cell(value: Any) -> str:
    cell = _cell(value)
    if isinstance(cell, list):
        return " ".join(str(part) for part in cell)
    return "" if cell is None else str(cell)


def render_json(header: Dict[str, Any], sections: Dict[str, tuple]) -> str:
    """sections: name -> (columns, records); each record becomes an object."""
    payload: Dict[str, Any] = {"header": _cell(header)}
    for name, (columns, records) in sections.items():
        payload[name] = [
            {column: _cell(value) for column, value in zip(columns, record)}
            for record in records
        ]
    return orjson.dumps(payload, option=orjson.OPT_INDENT_2).decode() + "\n"


def render(fmt: str, header: Dict[str, Any], sections: Dict[str, tuple]) -> str:
    if fmt == "json":
        return render_json(header, sections)
    return render_csv(header, list(sections.values()))


def emit(text: str, path: Optional[str], stream: TextIO) -> None:
    if path:
        Path(path).write_text(text)
    else:
        stream.write(text)


def records(rows: Iterable[Any], columns: Sequence[str]) -> List[tuple]:
    """Dataclass rows to tuples in column order."""
    return [tuple(getattr(row, column) for column in columns) for row in rows]
