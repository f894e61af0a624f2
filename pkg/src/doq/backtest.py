"""Rolling three-model call pricing over historical closes.

For every day ``d`` with at least ``window`` closes up to and including ``d``,
the window ``closes[d - window + 1 : d + 1]`` is fed to three estimators:

* sample standard deviation of log returns (annualised) -> Black-Scholes
* ergodic second-moment ratio -> geometric fBm
* quadratic-variation ratio -> geometric DO

and the call is priced at ``spot = closes[d]``. Nothing after ``d`` is read.

The window is the model clock: the current time is ``t = (window - 1) * dt``
and expiry is ``t + tau`` with ``tau`` = remaining trading days times ``dt``.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from doq.data import PriceSeries, load_price_series, load_quotes  # noqa: F401  (re-exported)
from doq.errors import ValidationError
from doq.estimation import (CSV_HEADER, DEFAULT_DT, DEFAULT_WINDOW, MIN_PRICES, EstimateResult,
                            estimate_ergodic, estimate_qv_ratio, log_returns)
from doq.pricing import bs_call, do_call, fbm_call

ROW_FIELDS = ["date", "spot", "tau", "h_ergodic", "h_qv", "sigma_ergodic", "sigma_qv", "sigma_bs",
              "price_bs", "price_fbm", "price_do", "price_market"]


@dataclass(frozen=True)
class BacktestRow:
    date: _dt.date
    spot: float
    tau: float
    h_ergodic: float
    h_qv: float
    sigma_ergodic: float
    sigma_qv: float
    sigma_bs: float
    price_bs: float
    price_fbm: float
    price_do: float
    price_market: float | None = None
    estimates: tuple = field(default=(), compare=False, repr=False)

    def csv_row(self) -> list[str]:
        out = []
        for name in ROW_FIELDS:
            value = getattr(self, name)
            if name == "date":
                out.append(value.isoformat())
            elif value is None:
                out.append("")
            else:
                out.append(format(float(value), ".17g"))
        return out


def trading_days_between(start: _dt.date, end: _dt.date) -> int:
    """Weekdays in ``[start, end)``."""
    return int(np.busday_count(start, end))


def run_backtest(series: PriceSeries, strike: float, expiry: _dt.date, r: float,
                 window: int = DEFAULT_WINDOW, market_quotes: dict | None = None,
                 dt: float = DEFAULT_DT, paper_literal: bool = False) -> list[BacktestRow]:
    """One :class:`BacktestRow` per day from index ``window - 1`` onward."""
    if window < MIN_PRICES:
        raise ValidationError(f"window must be >= {MIN_PRICES}, got {window}")
    if len(series) < window:
        raise ValidationError(f"series has {len(series)} closes, fewer than the window of {window}")
    if not strike > 0:
        raise ValidationError(f"strike must be > 0, got {strike}")
    if not expiry > series.dates[-1]:
        raise ValidationError(
            f"expiry {expiry.isoformat()} must fall after the last valuation date {series.dates[-1].isoformat()}"
        )
    quotes = market_quotes or {}
    t_now = (window - 1) * dt
    rows = []
    for d in range(window - 1, len(series)):
        closes = series.closes[d - window + 1:d + 1]
        day = series.dates[d]
        spot = float(closes[-1])
        erg = estimate_ergodic(closes, dt, paper_literal)
        qv = estimate_qv_ratio(closes, dt, paper_literal)
        sigma_bs = float(np.std(log_returns(closes), ddof=1)) / math.sqrt(dt)
        days_left = trading_days_between(day, expiry)
        if days_left < 1:
            raise ValidationError(f"expiry {expiry.isoformat()} is not after valuation date {day.isoformat()}")
        tau = days_left * dt
        t_exp = t_now + tau
        rows.append(BacktestRow(
            date=day, spot=spot, tau=tau,
            h_ergodic=erg.h_hat, h_qv=qv.h_hat,
            sigma_ergodic=erg.sigma_hat, sigma_qv=qv.sigma_hat, sigma_bs=sigma_bs,
            price_bs=bs_call(spot, strike, r, sigma_bs, t_now, t_exp).value,
            price_fbm=fbm_call(spot, strike, r, erg.sigma_hat, erg.h_hat, t_now, t_exp).value,
            price_do=do_call(spot, strike, r, qv.sigma_hat, qv.h_hat, t_now, t_exp).value,
            price_market=quotes.get(day),
            estimates=(_dated(erg, day), _dated(qv, day)),
        ))
    return rows


def _dated(est: EstimateResult, day) -> EstimateResult:
    from dataclasses import replace

    return replace(est, date=day)


# ----------------------------------------------------------------------------
# reports

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#000000")


def _svg_chart(title: str, labels: list[str], traces: dict, y_label: str,
               width: int = 800, height: int = 400) -> str:
    left, right, top, bottom = 70, 20, 40, 60
    pw, ph = width - left - right, height - top - bottom
    ys = [y for vals in traces.values() for y in vals if y is not None]
    lo, hi = min(ys), max(ys)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    n = len(labels)

    def px(i):
        return left + (pw * i / (n - 1) if n > 1 else pw / 2)

    def py(y):
        return top + ph * (hi - y) / (hi - lo)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-family="sans-serif" '
        f'font-size="15">{title}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#888888"/>',
    ]
    for j in range(5):
        y = lo + (hi - lo) * j / 4
        out.append(f'<text x="{left - 6}" y="{py(y) + 4:.1f}" text-anchor="end" font-family="sans-serif" '
                   f'font-size="11">{y:.4g}</text>')
    for i in sorted({0, n // 2, n - 1}):
        out.append(f'<text x="{px(i):.1f}" y="{top + ph + 18}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{labels[i]}</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.1f}" transform="rotate(-90 16 {top + ph / 2:.1f})" '
               f'text-anchor="middle" font-family="sans-serif" font-size="12">{y_label}</text>')
    for idx, (name, vals) in enumerate(traces.items()):
        color = _COLORS[idx % len(_COLORS)]
        pts = " ".join(f"{px(i):.2f},{py(y):.2f}" for i, y in enumerate(vals) if y is not None)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = top + ph + 38
        lx = left + 150 * idx
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 25}" y="{ly + 4}" font-family="sans-serif" font-size="12">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_report(rows: list[BacktestRow], out_dir, metadata: dict | None = None, svg: bool = False) -> list[Path]:
    """Write ``backtest.csv``, ``h_estimates.csv`` and ``metadata.json``.

    With ``svg=True`` also writes ``h_estimates.svg`` and ``prices.svg``;
    the market trace is drawn only if some row carries a market quote.
    Output is a pure function of the inputs.
    """
    if not rows:
        raise ValidationError("no backtest rows to report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    path = out / "backtest.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ROW_FIELDS)
        writer.writerows(row.csv_row() for row in rows)
    written.append(path)

    path = out / "h_estimates.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerows(est.csv_row() for est in row.estimates)
    written.append(path)

    meta = dict(metadata or {})
    meta["rows"] = len(rows)
    meta["first_date"] = rows[0].date.isoformat()
    meta["last_date"] = rows[-1].date.isoformat()
    path = out / "metadata.json"
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    written.append(path)

    if svg:
        labels = [row.date.isoformat() for row in rows]
        path = out / "h_estimates.svg"
        path.write_text(_svg_chart("Rolling Hurst estimates", labels, {
            "ergodic (fBm)": [row.h_ergodic for row in rows],
            "QV ratio (DO)": [row.h_qv for row in rows],
        }, "H"))
        written.append(path)

        traces = {
            "Black-Scholes": [row.price_bs for row in rows],
            "fBm": [row.price_fbm for row in rows],
            "DO": [row.price_do for row in rows],
        }
        if any(row.price_market is not None for row in rows):
            traces["market"] = [row.price_market for row in rows]
        path = out / "prices.svg"
        path.write_text(_svg_chart("Call prices", labels, traces, "price"))
        written.append(path)
    return written
