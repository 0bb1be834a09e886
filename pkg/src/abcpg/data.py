"""Return-series ingestion and the synthetic-data CSV format.

Accepted inputs:

* ``date,price`` (price already averaged from open and close),
* ``date,open,close`` (averaged here),
* ``t,r[,h]`` as written by ``abcpg simulate`` (returns used directly).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

from .errors import ParseError


@dataclass
class PriceSeries:
    dates: list
    prices: np.ndarray


@dataclass
class ReturnSeries:
    r: np.ndarray
    #: date of each return (the later of its two prices); empty strings when unknown
    dates: list
    h: np.ndarray | None = None


def _rows(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(path, 1, "empty file")
    header = [c.strip().lower() for c in rows[0]]
    return header, rows[1:]


def _number(path, lineno, text, what):
    try:
        x = float(text)
    except ValueError:
        raise ParseError(path, lineno, f"{what} {text!r} is not a number") from None
    if not math.isfinite(x):
        raise ParseError(path, lineno, f"{what} {text!r} is not finite")
    return x


def load_prices(path) -> PriceSeries:
    header, rows = _rows(path)
    if header == ["date", "price"]:
        averaged = False
    elif header == ["date", "open", "close"]:
        averaged = True
    else:
        raise ParseError(path, 1, f"expected header 'date,price' or 'date,open,close', got {','.join(header)!r}")
    dates, prices = [], []
    prev = None
    for lineno, row in enumerate(rows, 2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(path, lineno, f"expected {len(header)} fields, got {len(row)}")
        try:
            d = date.fromisoformat(row[0].strip())
        except ValueError:
            raise ParseError(path, lineno, f"bad ISO-8601 date {row[0]!r}") from None
        if prev is not None and d <= prev:
            raise ParseError(path, lineno, f"date {d} does not follow {prev}")
        if averaged:
            p = 0.5 * (_number(path, lineno, row[1], "open") + _number(path, lineno, row[2], "close"))
        else:
            p = _number(path, lineno, row[1], "price")
        if p <= 0:
            raise ParseError(path, lineno, f"price must be positive, got {p}")
        dates.append(d.isoformat())
        prices.append(p)
        prev = d
    if len(prices) < 2:
        raise ParseError(path, len(rows) + 1, "need at least two prices")
    return PriceSeries(dates, np.array(prices))


def to_returns(p: PriceSeries) -> np.ndarray:
    """r_t = log P_t - log P_{t-1}."""
    return np.diff(np.log(np.asarray(p.prices, dtype=float)))


def load_series(path) -> ReturnSeries:
    """Load either a price file or a synthetic returns file."""
    header, rows = _rows(path)
    if header[:1] == ["date"]:
        p = load_prices(path)
        return ReturnSeries(to_returns(p), p.dates[1:])
    if header not in (["t", "r"], ["t", "r", "h"]):
        raise ParseError(path, 1, f"unrecognised header {','.join(header)!r}")
    r, h = [], []
    for lineno, row in enumerate(rows, 2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(path, lineno, f"expected {len(header)} fields, got {len(row)}")
        r.append(_number(path, lineno, row[1], "return"))
        if len(header) == 3:
            h.append(_number(path, lineno, row[2], "volatility"))
    if not r:
        raise ParseError(path, 2, "no returns")
    return ReturnSeries(np.array(r), [""] * len(r), np.array(h) if h else None)


def write_series(path, r, h=None):
    """Write ``t,r[,h]`` with round-trip exact float formatting."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "r"] if h is None else ["t", "r", "h"])
        for t, x in enumerate(r, 1):
            w.writerow([t, repr(float(x))] if h is None else [t, repr(float(x)), repr(float(h[t - 1]))])
