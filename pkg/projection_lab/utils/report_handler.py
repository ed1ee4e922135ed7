"""
Report emission: report.json, per-lambda.csv (or loglog.csv), fitdata/
and runtime.json in an output directory.
"""

import csv
import io
from pathlib import Path

from projection_lab.utils.utils import write_json


def _cell(value):
    if value is None:
        return "nan"
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def csv_text(header, rows):
    """CSV with a header row, LF line endings."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(csv_text(header, rows))
    return path


def per_lambda_rows(report):
    k = len(report.rows[0]["lambda"]) if report.rows else 0
    header = [f"lambda_{a + 1}" for a in range(k)] + ["est_dim", "bound", "margin", "fit_r2"]
    rows = [r["lambda"] + [r["est_dim"], r["bound"], r["margin"], r["fit_r2"]] for r in report.rows]
    return header, rows


def loglog_rows(report):
    """Sublevel fractions of every panel direction in one table, direction numbered from 1."""
    rows = []
    for index, name in enumerate(sorted(report.fitdata), start=1):
        rows.extend([index, *row] for row in report.fitdata[name])
    return ["direction", "delta", "fraction", "hits"], rows


def write_report(report, out_dir):
    """Write every artifact of a report; returns the output directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "report.json", report.to_dict())
    write_json(out / "runtime.json", {"runtime_seconds": report.runtime})
    if report.mode == "transversality":
        header, rows = loglog_rows(report)
        write_csv(out / "loglog.csv", header, rows)
        for name, data in report.fitdata.items():
            write_csv(out / "fitdata" / f"{name}.csv", ["delta", "fraction", "hits"], data)
        return out
    header, rows = per_lambda_rows(report)
    write_csv(out / "per-lambda.csv", header, rows)
    for name, data in report.fitdata.items():
        write_csv(out / "fitdata" / f"{name}.csv", ["scale", "count"], data)
    return out


def tsv_table(rows):
    """name, passed, detail as tab-separated lines with a header."""
    lines = ["name\tpassed\tdetail"]
    for row in rows:
        lines.append(f"{row['name']}\t{'pass' if row['passed'] else 'FAIL'}\t{row['detail']}")
    return "\n".join(lines) + "\n"
