from __future__ import annotations

import csv
import io
import sys
from pathlib import Path
from typing import Literal, Optional, TextIO, Union

from shared.schemas.report_schema import RunReport
from shared.utils.exceptions import ConfigException

CSV_COLUMNS = ("trial", "stage", "p_exact", "outcome", "fidelity")

ReportFormat = Literal["json", "csv"]


def render_csv(report: RunReport) -> str:
    """One row per trial and stage; an exact-only report has a header and no rows"""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    rows = report.sampled.rows if report.sampled else []
    for row in rows:
        writer.writerow({key: ("" if value is None else repr(value)) for key, value in row.model_dump().items()})
    return buffer.getvalue()


def render_report(report: RunReport, fmt: ReportFormat = "json", include_timing: bool = True) -> str:
    if fmt == "csv":
        return render_csv(report)
    if fmt != "json":
        raise ConfigException(f"Unknown report format '{fmt}'")
    if include_timing:
        return report.model_dump_json(by_alias=True, indent=2) + "\n"
    return report.deterministic_json() + "\n"


def emit_report(
    report: RunReport,
    fmt: ReportFormat = "json",
    destination: Optional[Union[str, Path, TextIO]] = None,
    include_timing: bool = True,
) -> None:
    """Write the rendered report to a path, an open stream, or stdout"""
    text = render_report(report, fmt, include_timing)
    if destination is None or destination == "-":
        sys.stdout.write(text)
        return
    if hasattr(destination, "write"):
        destination.write(text)
        return
    path = Path(destination)
    try:
        path.write_text(text)
    except OSError as e:
        raise ConfigException(f"Cannot write report to {path}: {e.strerror}") from e
