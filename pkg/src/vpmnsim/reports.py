"""Delimited report files and run metadata.

Every CSV gets a header row, comma separators, LF newlines, and UTF-8 text.
Floats are written with repr(), i.e. the shortest decimal string that parses
back to the same double, so re-reading a report loses nothing and identical
runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path


def format_value(value) -> str:
    """Round-trip text for one CSV cell."""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return value
    # numpy scalars and anything else float-like
    try:
        return repr(float(value))
    except (TypeError, ValueError):
        return str(value)


def write_csv(path, columns, rows) -> None:
    """Write dict rows under a header, in the given column order."""
    columns = list(columns)
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row[c]) for c in columns])


def write_report_csv(report, path) -> None:
    write_csv(path, report.columns, report.rows)


HISTOGRAM_COLUMNS = ("mode", "algorithm", "pos_center", "ratio_center", "count")


def histogram_table(histograms: dict) -> tuple[tuple[str, ...], list[dict]]:
    """Flatten {(mode, algorithm): JointHistogram} into one long table."""
    rows = []
    for (mode, algorithm), h in histograms.items():
        pos_centers = h.pos_centers
        ratio_centers = h.ratio_centers
        for i, p in enumerate(pos_centers):
            for j, r in enumerate(ratio_centers):
                rows.append(
                    {
                        "mode": getattr(mode, "value", mode),
                        "algorithm": getattr(algorithm, "value", algorithm),
                        "pos_center": float(p),
                        "ratio_center": float(r),
                        "count": float(h.counts[i, j]),
                    }
                )
    return HISTOGRAM_COLUMNS, rows


_META_REQUIRED = ("config", "base_seed", "version", "duration_s")


def write_meta(path, meta: dict) -> None:
    """Run metadata as JSON; must carry the effective config, the base seed,
    the code version, and the wall-clock duration."""
    missing = [k for k in _META_REQUIRED if k not in meta]
    if missing:
        raise ValueError(f"meta is missing required keys: {missing}")
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as f:
        json.dump(meta, f, indent=2)
        f.write("\n")
