"""
Table output for bpsprimes.

Provides functions to write result rows as CSV or JSON, read count
reports back, and merge several report files into one table.
"""

import csv
import io
import json
import os
import sys
from typing import Iterable, List, Optional, Sequence

from bpsprimes.counting import CSV_COLUMNS, CountReport

STDOUT = "-"


def _fieldnames(rows: Sequence[dict], preferred: Optional[Sequence[str]] = None) -> List[str]:
    names = list(preferred or [])
    for row in rows:
        for key in row:
            if key not in names:
                names.append(key)
    return names


def format_rows(rows: Sequence[dict], fmt: str = "csv", columns: Optional[Sequence[str]] = None) -> str:
    """
    Render rows as CSV or JSON text.

    Args:
        rows: Result rows; keys missing from a row are written empty.
        fmt: ``"csv"`` or ``"json"``.
        columns: Leading CSV columns; any other keys follow in first-seen order.

    Returns:
        The rendered text, ending in a newline.

    Raises:
        ValueError: If fmt is not supported.
    """
    if fmt == "json":
        return json.dumps(list(rows), indent=2, default=str) + "\n"
    if fmt != "csv":
        raise ValueError(f"Unsupported output format: {fmt}")
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=_fieldnames(rows, columns), restval="", lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def write_rows(
    rows: Sequence[dict],
    output_path: str = STDOUT,
    fmt: str = "csv",
    columns: Optional[Sequence[str]] = None,
) -> str:
    """
    Write rows to a file, or to stdout when output_path is ``"-"``.

    Args:
        rows: Result rows.
        output_path: Destination path or ``"-"``.
        fmt: ``"csv"`` or ``"json"``.
        columns: Leading CSV columns.

    Returns:
        The path written to (``"-"`` for stdout).
    """
    text = format_rows(rows, fmt, columns)
    if output_path == STDOUT:
        sys.stdout.write(text)
        return STDOUT
    parent = os.path.dirname(os.path.abspath(output_path))
    os.makedirs(parent, exist_ok=True)
    with open(output_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return output_path


def job_rows(results: Iterable) -> List[dict]:
    """
    Flatten pipeline job results into rows tagged with their job index.

    Args:
        results: :class:`~bpsprimes.pipeline.JobResult` objects in job order.

    Returns:
        One dict per result row with ``job`` and ``kind`` columns first.
    """
    return [{"job": res.index, "kind": res.kind, **row} for res in results for row in res.rows]


def read_reports(path: str) -> List[CountReport]:
    """
    Read count reports from a CSV or JSON file.

    Args:
        path: File written by :func:`write_rows` from count rows, or a JSON
              list of :meth:`CountReport.to_dict` objects.

    Returns:
        The reports in file order.

    Raises:
        FileNotFoundError: If path does not exist.
        ValueError: If the file holds no count reports.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"Report file not found: {path}")
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    if path.endswith(".json") or text.lstrip()[:1] == "[":
        data = json.loads(text)
    else:
        data = list(csv.DictReader(io.StringIO(text)))
    try:
        return [CountReport.from_dict(row) for row in data]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path} does not contain count reports: missing {exc}") from exc


def merge_reports(paths: Sequence[str], output_path: str = STDOUT, fmt: str = "csv") -> List[CountReport]:
    """
    Merge count report files into one table sorted by x.

    Args:
        paths: Input CSV/JSON files.
        output_path: Destination path or ``"-"``.
        fmt: ``"csv"`` or ``"json"``.

    Returns:
        The merged reports.
    """
    reports: List[CountReport] = []
    for path in paths:
        reports.extend(read_reports(path))
    reports.sort(key=lambda r: (r.x, r.xi, r.alphas, r.betas, r.c, r.method))
    if fmt == "json":
        write_rows([r.to_dict() for r in reports], output_path, "json")
    else:
        write_rows([r.to_row() for r in reports], output_path, "csv", CSV_COLUMNS)
    return reports
