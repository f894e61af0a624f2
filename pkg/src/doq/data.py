"""Daily price series and CSV ingestion."""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from doq.errors import DataFormatError


@dataclass(frozen=True)
class PriceSeries:
    """Adjusted daily closes with strictly increasing dates."""

    symbol: str
    dates: tuple
    closes: np.ndarray

    def __post_init__(self):
        closes = np.asarray(self.closes, dtype=float)
        object.__setattr__(self, "closes", closes)
        object.__setattr__(self, "dates", tuple(self.dates))
        if closes.ndim != 1 or closes.size != len(self.dates):
            raise DataFormatError("dates and closes must have equal length")
        if not np.all(np.isfinite(closes)) or np.any(closes <= 0):
            raise DataFormatError("closes must be finite and positive")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise DataFormatError("dates must be strictly increasing")

    def __len__(self) -> int:
        return len(self.dates)

    def truncate(self, stop: int) -> "PriceSeries":
        """First ``stop`` observations."""
        return PriceSeries(self.symbol, self.dates[:stop], self.closes[:stop])


def _read_dated_values(path, value_column: str) -> list[tuple[dt.date, float, int]]:
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(f"{path}: no such file")
    rows = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header] != ["date", value_column]:
            raise DataFormatError(f"{path}: expected header 'date,{value_column}', got {header!r}")
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise DataFormatError(f"{path}:{line_no}: expected 2 fields, got {len(row)}")
            try:
                day = dt.date.fromisoformat(row[0].strip())
                value = float(row[1])
            except ValueError as exc:
                raise DataFormatError(f"{path}:{line_no}: malformed row {row!r} ({exc})") from None
            if not math.isfinite(value):
                raise DataFormatError(f"{path}:{line_no}: non-finite {value_column} {row[1]!r}")
            rows.append((day, value, line_no))
    seen = {}
    for day, _, line_no in rows:
        if day in seen:
            raise DataFormatError(f"{path}:{line_no}: duplicate date {day.isoformat()} (first on line {seen[day]})")
        seen[day] = line_no
    rows.sort(key=lambda r: r[0])
    return rows


def load_price_series(path, symbol: str = "") -> PriceSeries:
    """Read a ``date,close`` CSV (ISO dates, any row order) into a sorted series."""
    rows = _read_dated_values(path, "close")
    for day, close, line_no in rows:
        if close <= 0:
            raise DataFormatError(f"{path}:{line_no}: close must be > 0 on {day.isoformat()}, got {close}")
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return PriceSeries(symbol or Path(path).stem, tuple(r[0] for r in rows), np.array([r[1] for r in rows]))


def load_quotes(path) -> dict:
    """Read optional market option quotes from a ``date,price`` CSV."""
    rows = _read_dated_values(path, "price")
    for day, price, line_no in rows:
        if price < 0:
            raise DataFormatError(f"{path}:{line_no}: negative option price on {day.isoformat()}")
    return {day: price for day, price, _ in rows}


def write_price_series(series: PriceSeries, path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "close"])
        for day, close in zip(series.dates, series.closes):
            writer.writerow([day.isoformat(), format(float(close), ".17g")])
