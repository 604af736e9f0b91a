"""CSV schemas of the scan outputs and typed readers.

Validation happens before any drawing: a missing column or an empty selection
aborts the render with a schema error.
"""

from __future__ import annotations

import csv
import math

SCAN_COLUMNS = ("preset", "N", "tau", "j_z0", "seed", "n_steps", "lambda1",
                "lambda1_err", "ks_entropy", "e_initial", "jz_drift", "status")
SPECTRUM_COLUMNS = ("preset", "N", "tau", "seed", "i", "lambda_i")
BAND_COLUMNS = ("j_z0", "e_max", "e_min_numeric", "e_min_analytic", "mu", "delta")
SEMIANALYTIC_COLUMNS = ("N", "tau", "lambda1", "stderr", "n_samples")

_INT_COLUMNS = {"N", "seed", "n_steps", "i", "n_samples"}
_STR_COLUMNS = {"preset", "status"}


class SchemaError(ValueError):
    """Input file does not match the documented schema."""


def read_table(path, required):
    """Read a CSV into a list of typed row dicts, enforcing required columns."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing}")
        rows = []
        for raw in reader:
            row = {}
            for key, value in raw.items():
                if key in _STR_COLUMNS:
                    row[key] = value
                elif key in _INT_COLUMNS:
                    row[key] = int(value)
                else:
                    try:
                        row[key] = float(value)
                    except (TypeError, ValueError):
                        raise SchemaError(f"{path}: non-numeric value {value!r} "
                                          f"in column {key}")
            rows.append(row)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def ok_rows(rows):
    """Drop rows whose status is present and not ok, and non-finite exponents."""
    out = []
    for r in rows:
        if r.get("status", "ok") != "ok":
            continue
        lam = r.get("lambda1", 0.0)
        if isinstance(lam, float) and not math.isfinite(lam):
            continue
        out.append(r)
    return out
