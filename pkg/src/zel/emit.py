"""Result emission: RFC 4180 CSV and JSON with the resolved run config.

Byte determinism is part of the contract: a rerun with the same resolved
config must produce identical files.  That rules out timestamps, hostnames,
library versions, and unsorted dicts; floats are written with 17
significant digits ('.' decimal separator) so the bytes round-trip the
doubles exactly.  A NaN or Inf anywhere in a row is an upstream bug, never
something to serialize, so emission aborts on the first one.
"""

from __future__ import annotations

import csv
import json
import math

import numpy as np

__all__ = [
    "NonFiniteOutput",
    "fmt_float",
    "fmt_cell",
    "flags_cell",
    "write_csv",
    "write_json",
]


class NonFiniteOutput(ValueError):
    """An output value was NaN or Inf; the run must abort (exit code 3)."""


def fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise NonFiniteOutput(f"nonfinite value {x!r} in output")
    return format(float(x), ".17g")


def fmt_cell(x) -> str:
    """One CSV field: '' for missing, 17-digit floats, plain ints."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return fmt_float(float(x))
    return str(x)


def flags_cell(flags) -> str:
    # semicolon-joined so the field never needs RFC 4180 quoting
    return ";".join(flags)


def write_csv(stream, header, rows) -> None:
    writer = csv.writer(stream, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt_cell(c) for c in row])


def _clean(x):
    """JSON-safe copy with the same finiteness contract as the CSV path."""
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if not math.isfinite(v):
            raise NonFiniteOutput(f"nonfinite value {v!r} in output")
        return v
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_clean(c) for c in x]
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    return str(x)


def write_json(stream, config: dict, header, rows) -> None:
    """Rows as arrays under a column list, config embedded for provenance."""
    payload = {
        "config": _clean(config),
        "columns": list(header),
        "rows": [_clean(list(row)) for row in rows],
    }
    json.dump(payload, stream, sort_keys=True, indent=2)
    stream.write("\n")
