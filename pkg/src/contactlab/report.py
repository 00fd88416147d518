"""Deterministic run reports: canonical JSON plus plot-ready CSV tables.

report.json must be byte-identical across repeated runs of the same config
and seed, so floats are printed through one fixed 17-significant-digit
formatter, keys are emitted in sorted order, and anything timing-related
goes to a sidecar file instead of the report.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


def format_number(x) -> str:
    """Fixed 17-significant-digit rendering shared by JSON and CSV."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if np.isnan(x):
        return '"nan"'
    if np.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return f"{x:.17g}"


def _json_escape(s: str) -> str:
    out = []
    for ch in s:
        if ch in ('"', "\\"):
            out.append("\\" + ch)
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    return "".join(out)


def canonical_json(obj, indent: int = 0) -> str:
    """Deterministic JSON: sorted keys, fixed float format, 2-space indent."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return f'"{_json_escape(obj)}"'
    if isinstance(obj, (bool, np.bool_, int, np.integer, float, np.floating)):
        return format_number(obj)
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = [canonical_json(v, indent + 1) for v in list(obj)]
        if not items:
            return "[]"
        body = ",\n".join(inner + it for it in items)
        return "[\n" + body + "\n" + pad + "]"
    if isinstance(obj, dict):
        keys = sorted(obj)
        if not keys:
            return "{}"
        parts = [
            f'{inner}"{_json_escape(str(k))}": {canonical_json(obj[k], indent + 1)}'
            for k in keys
        ]
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    raise ValidationError(f"cannot serialize {type(obj).__name__} into a report")


@dataclass(frozen=True, eq=False)
class RunReport:
    """Everything a run writes: echoed config, result tables, provenance."""

    config_echo: dict
    results: dict
    provenance: dict
    warnings: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)  # name -> (header, rows)

    def to_json(self) -> str:
        doc = {
            "config_echo": self.config_echo,
            "results": self.results,
            "provenance": self.provenance,
            "warnings": list(self.warnings),
        }
        return canonical_json(doc) + "\n"


def _csv_cell(x) -> str:
    if isinstance(x, str):
        return x
    rendered = format_number(x)
    return rendered.strip('"')


def write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            if len(row) != len(header):
                raise ValidationError(
                    f"row width {len(row)} does not match header width {len(header)}"
                )
            fh.write(",".join(_csv_cell(c) for c in row) + "\n")


def emit_report(report: RunReport, out_dir, wall_time: float | None = None) -> list:
    """Write report.json and one CSV per table; return the written paths.

    Wall time goes to a sidecar (timing.txt) so report.json stays
    byte-deterministic.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []
    report_path = os.path.join(out_dir, "report.json")
    with open(report_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report.to_json())
    written.append(report_path)
    for name, (header, rows) in report.tables.items():
        path = os.path.join(out_dir, f"{name}.csv")
        write_csv(path, header, rows)
        written.append(path)
    if wall_time is not None:
        timing_path = os.path.join(out_dir, "timing.txt")
        with open(timing_path, "w", encoding="utf-8") as fh:
            fh.write(f"wall_time_seconds {wall_time:.3f}\n")
        written.append(timing_path)
    return written
