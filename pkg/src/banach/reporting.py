"""Report serialization: frozen CSV, JSON summaries, merged markdown.

CSV layout is part of the package contract: column order is fixed per
experiment, floats print with 17 significant digits (round-trip exact),
booleans as true/false, missing values as empty fields.  Files are
UTF-8 with LF line endings.  Wall-clock times never enter the CSV; they
live in the JSON summary, so reruns are byte-comparable.
"""

from __future__ import annotations

import csv
import io
import json

from .errors import ConfigError

# identification columns before, bookkeeping columns after the metrics
_LEAD = ("experiment", "body", "n")
_TAIL = ("pass", "seed", "version", "config_hash")


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def csv_columns(params, metrics) -> tuple:
    return _LEAD + tuple(params) + tuple(metrics) + _TAIL


def rows_to_csv(columns, rows) -> str:
    """Render rows (dicts) to one RFC-4180 CSV string with LF endings."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_value(row.get(c)) for c in columns])
    return buf.getvalue()


def write_csv(path, columns, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(columns, rows))


def write_json_summary(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            columns = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty CSV")
        rows = [dict(zip(columns, rec)) for rec in reader]
    return tuple(columns), rows


def _aggregate(rows):
    """Pass rate over rows that carry a verdict, plus fitted constants."""
    voted = [r for r in rows if r.get("pass") not in (None, "")]
    passed = sum(1 for r in voted if r["pass"] in (True, "true"))
    agg = {
        "rows": len(rows),
        "rows_with_verdict": len(voted),
        "pass_rate": passed / len(voted) if voted else None,
    }
    fitted = {}
    for key in ("c_term", "fitted_c"):
        vals = []
        for r in rows:
            raw = r.get(key)
            if raw in (None, ""):
                continue
            try:
                v = float(raw)
            except (TypeError, ValueError):
                continue
            if r.get("skipped") in (True, "true"):
                continue
            vals.append(v)
        if vals:
            fitted[key] = min(vals)
    if fitted:
        agg["fitted"] = fitted
    return agg


def merge_reports(paths):
    """Union rows from several CSVs, keyed by experiment id.

    Schemas must match per experiment, and all rows of one experiment
    must come from configs with the same hash; disagreement is refused
    rather than silently mixed.
    """
    merged = {}
    schemas = {}
    for path in paths:
        columns, rows = read_csv(path)
        if not rows:
            continue
        for row in rows:
            exp = row.get("experiment")
            if not exp:
                raise ConfigError(f"{path}: row without an experiment id")
            if exp in schemas and schemas[exp] != columns:
                raise ConfigError(
                    f"{path}: column schema for {exp!r} does not match earlier input")
            schemas.setdefault(exp, columns)
            prior = merged.setdefault(exp, [])
            if prior and prior[0].get("config_hash") != row.get("config_hash"):
                raise ConfigError(
                    f"{path}: conflicting config hashes for experiment {exp!r}")
            prior.append(row)
    return {
        exp: {"columns": schemas[exp], "rows": rows, "aggregate": _aggregate(rows)}
        for exp, rows in merged.items()
    }


def markdown_report(merged) -> str:
    """Acceptance-style table: one line per experiment id."""
    lines = [
        "| experiment | rows | with verdict | pass rate | fitted c |",
        "|---|---|---|---|---|",
    ]
    for exp in sorted(merged):
        agg = merged[exp]["aggregate"]
        rate = agg["pass_rate"]
        fitted = agg.get("fitted", {})
        fit_txt = ", ".join("%s=%.6g" % (k, v) for k, v in sorted(fitted.items())) or "-"
        lines.append("| %s | %d | %d | %s | %s |" % (
            exp, agg["rows"], agg["rows_with_verdict"],
            "-" if rate is None else "%.3f" % rate, fit_txt))
    return "\n".join(lines) + "\n"
