"""CSV rows and JSON summaries for registry outcomes."""
from __future__ import annotations

import csv
import datetime as _dt
import io
import json
from pathlib import Path

BASE_COLUMNS = ("estimate_id", "member_id", "lhs", "rhs", "ratio")


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return ";".join(_cell(x) for x in v)
    if hasattr(v, "item"):
        return _cell(v.item())
    return str(v)


def rows_to_csv(rows, created: str = None) -> str:
    """CSV text: a ``# created`` line, a header, then one line per :class:`RatioReport`."""
    dicts = [r.as_row() for r in rows]
    extra = sorted({k for d in dicts for k in d} - set(BASE_COLUMNS))
    columns = list(BASE_COLUMNS) + extra
    buf = io.StringIO()
    created = created or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    buf.write(f"# created {created}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for d in dicts:
        writer.writerow([_cell(d[c]) if c in d else "" for c in columns])
    return buf.getvalue()


def read_csv(path):
    """Rows of a file written by :func:`write_outcome`, as dicts of strings."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def write_outcome(outcome, out_dir) -> tuple:
    """Write ``<id>.csv`` and ``<id>.json`` under ``out_dir``; returns both paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{outcome.estimate_id}.csv"
    json_path = out / f"{outcome.estimate_id}.json"
    csv_path.write_text(rows_to_csv(outcome.rows))
    json_path.write_text(json.dumps(outcome.summary(), indent=2, sort_keys=True) + "\n")
    return csv_path, json_path
