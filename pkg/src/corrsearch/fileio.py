"""CSV and JSON helpers for the command line tools.

All matrices travel as plain CSV with one row per line, written at full
float precision (%.17g) so a write/read cycle is bit exact.  Readers
tolerate a leading header row and comment lines starting with '#'.
"""

from __future__ import annotations

import csv
import json
import os
from typing import Any, Sequence

import numpy as np

from .corrspace import dim_from_num_angles, num_angles

_FMT = "%.17g"


def _is_float(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def _format_row(row: Sequence[float]) -> str:
    return ",".join(_FMT % float(v) for v in row)


def write_matrix_csv(path: str | os.PathLike, matrix: np.ndarray) -> None:
    """Write a 2-d array as headerless CSV at full precision."""
    M = np.asarray(matrix, dtype=float)
    if M.ndim != 2:
        raise ValueError("expected a 2-d array, got shape %s" % (M.shape,))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for row in M:
            fh.write(_format_row(row) + "\n")


def read_matrix_csv(path: str | os.PathLike) -> np.ndarray:
    """Read a numeric CSV matrix.

    Comment lines ('#') are skipped, and a single leading header row is
    tolerated: if the first data line contains a token that does not
    parse as a float, that line is treated as a header and dropped.
    """
    rows: list[list[float]] = []
    first = True
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for record in csv.reader(fh):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue
            if record[0].lstrip().startswith("#"):
                continue
            if first and not all(_is_float(tok) for tok in record):
                first = False
                continue
            first = False
            try:
                rows.append([float(tok) for tok in record])
            except ValueError as exc:
                raise ValueError(
                    "%s: non-numeric value in row %d: %s" % (path, len(rows) + 1, exc)
                ) from None
    if not rows:
        raise ValueError("%s: no numeric rows found" % path)
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("%s: rows have inconsistent lengths" % path)
    return np.asarray(rows, dtype=float)


def write_angles_csv(path: str | os.PathLike, omega: np.ndarray, d: int) -> None:
    """Write an angle vector as one CSV line preceded by '# d=<dim>'."""
    omega = np.asarray(omega, dtype=float).ravel()
    if omega.size != num_angles(d):
        raise ValueError(
            "angle vector has %d entries but d=%d needs %d"
            % (omega.size, d, num_angles(d))
        )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("# d=%d\n" % d)
        fh.write(_format_row(omega) + "\n")


def read_angles_csv(path: str | os.PathLike) -> tuple[np.ndarray, int]:
    """Read an angle vector written by :func:`write_angles_csv`.

    Returns ``(omega, d)``.  The dimension comes from the '# d=' comment
    when present and is otherwise inferred from the vector length.
    """
    d = None
    values: list[float] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for record in csv.reader(fh):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue
            head = record[0].lstrip()
            if head.startswith("#"):
                stripped = head[1:].strip()
                if stripped.startswith("d="):
                    d = int(stripped[2:].strip())
                continue
            if values:
                raise ValueError("%s: expected a single row of angles" % path)
            values = [float(tok) for tok in record]
    if not values:
        raise ValueError("%s: no angle row found" % path)
    omega = np.asarray(values, dtype=float)
    inferred = dim_from_num_angles(omega.size)
    if d is None:
        d = inferred
    elif d != inferred:
        raise ValueError(
            "%s: header says d=%d but %d angles imply d=%d"
            % (path, d, omega.size, inferred)
        )
    return omega, d


def read_data_csv(path: str | os.PathLike) -> tuple[np.ndarray, list[str] | None, int]:
    """Read an n-by-d data table, one observation per row.

    Returns ``(X, names, n_dropped)``.  ``names`` is the header row when
    one is present, else None.  Rows containing a missing or unparsable
    field are dropped and counted instead of poisoning the estimate.
    """
    names: list[str] | None = None
    rows: list[list[float]] = []
    dropped = 0
    first = True
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for record in csv.reader(fh):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue
            if record[0].lstrip().startswith("#"):
                continue
            if first:
                first = False
                if not all(_is_float(tok) for tok in record):
                    names = [tok.strip() for tok in record]
                    continue
            parsed: list[float] = []
            ok = True
            for tok in record:
                tok = tok.strip()
                if not tok or not _is_float(tok):
                    ok = False
                    break
                value = float(tok)
                if not np.isfinite(value):
                    ok = False
                    break
                parsed.append(value)
            if not ok:
                dropped += 1
                continue
            rows.append(parsed)
    if not rows:
        raise ValueError("%s: no complete numeric rows found" % path)
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("%s: rows have inconsistent lengths" % path)
    if names is not None and len(names) != width:
        raise ValueError(
            "%s: header has %d columns but data rows have %d"
            % (path, len(names), width)
        )
    return np.asarray(rows, dtype=float), names, dropped


def write_support_csv(path: str | os.PathLike, support: np.ndarray) -> None:
    """Write a 0/1 support pattern as integer CSV."""
    S = np.asarray(support)
    if S.ndim != 2:
        raise ValueError("expected a 2-d support matrix")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for row in S:
            fh.write(",".join(str(int(v)) for v in row) + "\n")


TRACE_COLUMNS = ("run", "iteration", "step_size", "best_value", "evaluations")


def write_trace_csv(path: str | os.PathLike, trace: Sequence[tuple]) -> None:
    """Write an optimizer trace with a header row."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(TRACE_COLUMNS) + "\n")
        for run, iteration, step, value, evals in trace:
            fh.write(
                "%d,%d,%s,%s,%d\n"
                % (run, iteration, _FMT % step, _FMT % value, evals)
            )


def _json_default(obj: Any):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError("cannot serialize %r" % type(obj))


def write_summary_json(path: str | os.PathLike, summary: dict) -> None:
    """Write a summary dict as stable, human-readable JSON."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def write_rows_csv(
    path: str | os.PathLike, columns: Sequence[str], rows: Sequence[dict]
) -> None:
    """Write a list of dicts as CSV with the given column order."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns))
        writer.writeheader()
        for row in rows:
            out = {}
            for key in columns:
                value = row.get(key, "")
                if isinstance(value, float):
                    out[key] = _FMT % value
                else:
                    out[key] = value
            writer.writerow(out)
