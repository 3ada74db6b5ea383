"""CSV and JSON serialisation of single results and curve tables.

Numbers are rounded to 12 significant digits so that repeated runs give
byte-identical files.  CSV follows RFC 4180 (CRLF line ends, minimal quoting).
"""
from __future__ import annotations

import csv
import io
import json
import math

from .analysis import CurveTable

__all__ = ["round12", "format_cell", "records_to_csv", "table_to_csv",
           "crossings_to_csv", "to_json", "table_payload"]

SIG_DIGITS = 12


def round12(x):
    """Round a float to 12 significant digits; pass other values through."""
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            return None
        return float(f"{x:.{SIG_DIGITS}g}")
    if isinstance(x, dict):
        return {k: round12(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [round12(v) for v in x]
    return x


def format_cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return "" if not math.isfinite(x) else f"{x:.{SIG_DIGITS}g}"
    return str(x)


def _writer(buf):
    return csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)


def records_to_csv(records) -> str:
    """Rows of ordered dicts sharing the same keys; keys become the header."""
    buf = io.StringIO()
    w = _writer(buf)
    header = list(records[0])
    w.writerow(header)
    for rec in records:
        w.writerow([format_cell(rec[k]) for k in header])
    return buf.getvalue()


def _column_name(table: CurveTable, label):
    return f"{table.quantity}[{label}]"


def table_to_csv(table: CurveTable) -> str:
    """Wide table: abscissa column then one column per curve; gaps are empty cells."""
    buf = io.StringIO()
    w = _writer(buf)
    labels = list(table.curves)
    w.writerow([f"{table.abscissa_name}_{table.abscissa_unit}"]
               + [_column_name(table, lab) for lab in labels])
    for i, x in enumerate(table.abscissa):
        w.writerow([format_cell(float(x))]
                   + [format_cell(table.curves[lab][i]) for lab in labels])
    return buf.getvalue()


def crossings_to_csv(table: CurveTable) -> str:
    rows = []
    for label, by_thr in table.crossings.items():
        params = table.curve_params[label]
        for thr, a in by_thr.items():
            rows.append({"curve": label, "gap_eV": params.get("gap_eV"),
                         "mu_eV": params.get("mu_eV"), "threshold": thr,
                         "crossing_um": a})
    if not rows:
        return "curve,gap_eV,mu_eV,threshold,crossing_um\r\n"
    return records_to_csv(rows)


def table_payload(table: CurveTable) -> dict:
    labels = list(table.curves)
    return {
        "quantity": table.quantity,
        "abscissa": {"name": table.abscissa_name, "unit": table.abscissa_unit,
                     "values": [float(x) for x in table.abscissa]},
        "curves": [{"label": lab, "params": table.curve_params[lab],
                    "values": table.curves[lab]} for lab in labels],
        "crossings": [{"label": lab,
                       "by_threshold": [{"threshold": thr, "crossing_um": a}
                                        for thr, a in table.crossings[lab].items()]}
                      for lab in table.crossings],
        "metadata": table.metadata,
    }


def to_json(payload: dict, config: dict | None = None) -> str:
    """Stable key order (insertion order as built), numbers at 12 digits.

    ``config`` is echoed verbatim under the key ``"config"`` (after
    ``"command"`` when present) so that re-reading the file as a run
    configuration repeats the run with bit-identical inputs.
    """
    body = round12(payload)
    if config is not None:
        ordered = {}
        if "command" in body:
            ordered["command"] = body.pop("command")
        ordered["config"] = config
        ordered.update(body)
        body = ordered
    return json.dumps(body, indent=2, allow_nan=False) + "\n"
