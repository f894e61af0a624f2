"""Drift, Hurst index and volatility estimators from daily closes.

Two ratio estimators are provided:

* ``estimate_ergodic`` assumes geometric fBm and compares second moments of
  one-step and two-step centred log returns.
* ``estimate_qv_ratio`` assumes a geometric DO process and compares the
  sample quadratic variation of the first half of the window with that of the
  whole window.

Both default to the forms consistent with the limits they are built on.
``paper_literal=True`` switches to the formulas exactly as originally printed
(inverted ratio for the Hurst index, single-step returns in the half-sampled
moment, and ``2 / (C H T^{2H})`` in the volatility), which are kept only for
comparison runs.
"""

from __future__ import annotations

import datetime as _dt
import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from doq.constants import clamp_hurst, derive_constants
from doq.data import PriceSeries
from doq.errors import DegenerateInputError, ValidationError

TRADING_DAYS = 252
DEFAULT_DT = 1.0 / TRADING_DAYS
DEFAULT_WINDOW = 62
MIN_PRICES = 8


class Method(str, enum.Enum):
    ERGODIC = "ergodic"
    QV = "qv"


@dataclass(frozen=True)
class EstimateResult:
    """Output of one estimator run over one window of closes.

    ``h_raw`` is the unclamped ratio estimate; ``h_hat`` is clipped to
    ``[0.01, 0.99]`` and ``clamped`` records whether that happened.
    ``mu_hat`` is ``None`` for the quadratic-variation method.
    """

    method: Method
    mu_hat: float | None
    h_hat: float
    sigma_hat: float
    window_len: int
    dt: float
    clamped: bool
    h_raw: float
    paper_literal: bool = False
    date: _dt.date | None = None

    def csv_row(self) -> list[str]:
        def fmt(x):
            return "" if x is None else format(float(x), ".17g")

        return [
            "" if self.date is None else self.date.isoformat(),
            self.method.value,
            fmt(self.mu_hat),
            fmt(self.h_hat),
            fmt(self.sigma_hat),
            str(self.clamped).lower(),
        ]


CSV_HEADER = ["date", "method", "mu_hat", "h_hat", "sigma_hat", "clamped"]


def log_returns(prices) -> np.ndarray:
    """``y_i = ln(s_i / s_{i-1})``."""
    s = np.asarray(prices, dtype=float)
    if s.ndim != 1 or s.size < 2:
        raise ValidationError("need at least two prices")
    if not np.all(np.isfinite(s)) or np.any(s <= 0):
        raise ValidationError("prices must be finite and strictly positive")
    return np.log(s[1:] / s[:-1])


def _check_inputs(prices, dt: float) -> np.ndarray:
    y = log_returns(prices)
    if y.size + 1 < MIN_PRICES:
        raise ValidationError(f"need at least {MIN_PRICES} prices, got {y.size + 1}")
    if not (math.isfinite(dt) and dt > 0):
        raise ValidationError(f"dt must be > 0, got {dt}")
    return y


def estimate_ergodic(prices, dt: float = DEFAULT_DT, paper_literal: bool = False) -> EstimateResult:
    """Ratio-of-second-moments estimator under a geometric fBm assumption.

    ``mu_hat`` is the mean log return per unit time. With centred one-step
    returns ``SS1`` and centred non-overlapping two-step returns ``SS2``,
    ``SS1 / SS2 -> 4^{-H}``, so ``h = log_4(SS2 / SS1)`` and
    ``sigma^2 = SS1 / dt^{2h}``.
    """
    y = _check_inputs(prices, dt)
    n = y.size
    mu_hat = float(np.mean(y)) / dt
    ss1 = float(np.mean((y - mu_hat * dt) ** 2))

    k = n // 2
    if paper_literal:
        paired = y[1:2 * k:2]
    else:
        paired = y[0:2 * k:2] + y[1:2 * k:2]
    ss2 = float(np.mean((paired - mu_hat * 2.0 * dt) ** 2))
    if ss1 == 0.0 or ss2 == 0.0:
        raise DegenerateInputError("log returns have no dispersion (constant prices?)")

    ratio = ss1 / ss2 if paper_literal else ss2 / ss1
    h_raw = math.log(ratio) / math.log(4.0)
    h_hat, clamped = clamp_hurst(h_raw)
    sigma_hat = math.sqrt(ss1 / dt ** (2.0 * h_hat))
    return EstimateResult(Method.ERGODIC, mu_hat, h_hat, sigma_hat, n + 1, dt, clamped, h_raw, paper_literal)


def estimate_qv_ratio(prices, dt: float = DEFAULT_DT, paper_literal: bool = False) -> EstimateResult:
    """Ratio-of-quadratic-variations estimator under a geometric DO assumption.

    The window ``[0, T]`` with ``T = m * dt`` is the process clock. The QV of
    the log price over ``[0, t]`` is ``sigma^2 C^2 t^{2H} / (2H)``, so the
    first ``k = floor(m/2)`` returns against all ``m`` give
    ``h = ln(QV_m / QV_k) / (2 ln(m / k))`` (``log_4`` of the ratio for even
    ``m``) and ``sigma^2 = 2h QV_m / (C(h)^2 T^{2h})``.
    """
    y = _check_inputs(prices, dt)
    m = y.size
    k = m // 2
    sq = y * y
    full = float(np.sum(sq))
    half = float(np.sum(sq[:k]))
    if half == 0.0 or full == 0.0:
        raise DegenerateInputError("zero quadratic variation in the half window (constant prices?)")

    if paper_literal:
        h_raw = math.log(half / full) / math.log(4.0)
    else:
        h_raw = math.log(full / half) / (2.0 * math.log(m / k))
    h_hat, clamped = clamp_hurst(h_raw)
    big_c = derive_constants(h_hat).big_c
    horizon = m * dt
    if paper_literal:
        sigma_sq = 2.0 * full / (big_c * h_hat * horizon ** (2.0 * h_hat))
    else:
        sigma_sq = 2.0 * h_hat * full / (big_c ** 2 * horizon ** (2.0 * h_hat))
    return EstimateResult(Method.QV, None, h_hat, math.sqrt(sigma_sq), m + 1, dt, clamped, h_raw, paper_literal)


_ESTIMATORS = {Method.ERGODIC: estimate_ergodic, Method.QV: estimate_qv_ratio}


def estimate(prices, method, dt: float = DEFAULT_DT, paper_literal: bool = False) -> EstimateResult:
    return _ESTIMATORS[Method(method)](prices, dt, paper_literal)


def rolling_estimates(series: PriceSeries, window: int = DEFAULT_WINDOW, method=Method.QV,
                      dt: float = DEFAULT_DT, paper_literal: bool = False) -> list[EstimateResult]:
    """One estimate per day from index ``window`` onward.

    The result dated ``series.dates[d]`` uses exactly the ``window`` closes
    strictly before day ``d``.
    """
    if window < MIN_PRICES:
        raise ValidationError(f"window must be >= {MIN_PRICES}, got {window}")
    if len(series) < window:
        raise ValidationError(f"series has {len(series)} closes, fewer than the window of {window}")
    method = Method(method)
    out = []
    for d in range(window, len(series)):
        est = estimate(series.closes[d - window:d], method, dt, paper_literal)
        out.append(replace(est, date=series.dates[d]))
    return out

