#!/usr/bin/env python3
"""
OEMSwap Record Writer

Deterministic CSV and JSON serialization of sweep records.
"""

import csv
import io
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from oemswap import __version__
from oemswap.commands.sweep_runner import CSV_HEADER, SweepRecord


def render_csv(records: Sequence[SweepRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for record in records:
        writer.writerow(record.to_csv_row())
    return buffer.getvalue()


def render_json(records: Sequence[SweepRecord], config: Optional[Dict[str, Any]] = None) -> str:
    """JSON document with sorted keys and no timestamps."""
    document = {
        "version": __version__,
        "columns": list(CSV_HEADER),
        "config": config or {},
        "records": [record.to_dict() for record in records],
    }
    return json.dumps(document, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_records(
    records: Sequence[SweepRecord],
    path: str,
    fmt: str = "csv",
    config: Optional[Dict[str, Any]] = None,
) -> Path:
    """Write records to `path`; OSError propagates to the caller."""
    if fmt == "csv":
        text = render_csv(records)
    elif fmt == "json":
        text = render_json(records, config)
    else:
        raise ValueError(f"Unknown output format {fmt!r}")

    output_file = Path(path)
    if output_file.parent and not output_file.parent.exists():
        output_file.parent.mkdir(parents=True, exist_ok=True)
    with open(output_file, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    return output_file


def read_csv(path: str) -> List[SweepRecord]:
    """Parse a CSV written by write_records."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"{path}: unexpected CSV header")
    return [SweepRecord.from_csv_row(row) for row in rows[1:]]
