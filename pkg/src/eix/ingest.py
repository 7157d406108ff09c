"""Reading a series from a delimited text file."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np


class DataError(ValueError):
    """The input file cannot be turned into a valid series."""


@dataclass(frozen=True)
class IngestSpec:
    """Where to find the series and how to transform it.

    ``column`` is a header name or a 0-based index (negative counts from the
    end). ``None`` selects the last column, except that a file holding a
    single all-numeric row is read as one series laid out across that row.
    ``header=None`` detects a header row from whether the selected field of
    the first row parses as a number.
    """

    path: str
    column: Union[str, int, None] = None
    transform: str = "none"
    delimiter: str = ","
    header: Optional[bool] = None

    def __post_init__(self):
        if self.transform not in ("none", "neg_log_returns"):
            raise DataError(f"unknown transform {self.transform!r}")


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_series(spec: IngestSpec) -> np.ndarray:
    try:
        with open(spec.path, newline="") as fh:
            rows = [r for r in csv.reader(fh, delimiter=spec.delimiter) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise DataError(f"cannot read {spec.path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise DataError(f"{spec.path} is not a text file") from None
    if not rows:
        raise DataError(f"{spec.path} contains no data")

    col = spec.column
    if col is None:
        if len(rows) == 1 and len(rows[0]) > 1 and spec.header is not True and all(_is_number(c.strip()) for c in rows[0]):
            rows = [[c] for c in rows[0]]
        col = -1
    if isinstance(col, str) and col.lstrip("-").isdigit():
        col = int(col)
    header = spec.header
    if isinstance(col, str):
        if header is False:
            raise DataError(f"column {col!r} selected by name but the file has no header")
        names = [c.strip() for c in rows[0]]
        if col not in names:
            raise DataError(f"column {col!r} not found; header has {names}")
        idx, header = names.index(col), True
    else:
        idx = col
        if header is None:
            first = rows[0]
            header = not (-len(first) <= idx < len(first) and _is_number(first[idx].strip()))
    body = rows[1:] if header else rows

    values = []
    for lineno, row in enumerate(body, start=2 if header else 1):
        try:
            field = row[idx].strip()
        except IndexError:
            raise DataError(f"row {lineno} has no column {col!r}") from None
        try:
            values.append(float(field))
        except ValueError:
            raise DataError(f"row {lineno}: non-numeric value {field!r} in column {col!r}") from None
    x = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise DataError("the series contains NaN or infinite values")
    if spec.transform == "neg_log_returns":
        x = neg_log_returns(x)
    return x


def neg_log_returns(prices) -> np.ndarray:
    """``-log(p_t / p_{t-1})``; a series of length ``n - 1``."""
    p = np.asarray(prices, dtype=np.float64)
    if p.size < 2:
        raise DataError("need at least two prices for log returns")
    if not np.all(p > 0):
        raise DataError("log returns need strictly positive prices")
    return -np.diff(np.log(p))
