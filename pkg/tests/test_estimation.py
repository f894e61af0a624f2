import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from doq.errors import DegenerateInputError, ValidationError
from doq.estimation import (Method, estimate, estimate_ergodic, estimate_qv_ratio, log_returns,
                            rolling_estimates)
from doq.paths import Model, ModelParams, TimeGrid, simulate_fbm_paths, simulate_stock_paths
from doq.data import PriceSeries

from conftest import business_days, synthetic_series

DT = 1.0 / 252


def do_prices(h, n, seed, sigma=0.2):
    params = ModelParams(mu=0.05, sigma=sigma, h=h, eps=0.1, s0=100.0)
    return simulate_stock_paths(params, TimeGrid(0.0, n * DT, n), seed)[0]


def fbm_prices(h, n, seed, sigma=0.2):
    z = simulate_fbm_paths(TimeGrid(0.0, n * DT, n), h, seed, method="davies-harte")[0]
    t = np.arange(n + 1) * DT
    return 100.0 * np.exp(0.05 * t + sigma * z - 0.5 * sigma ** 2 * t ** (2 * h))


def test_log_returns():
    assert np.allclose(log_returns([1.0, math.e, math.e ** 2]), [1.0, 1.0])
    assert np.array_equal(log_returns([100.0, 100.0, 100.0]), [0.0, 0.0])
    assert np.allclose(log_returns([100, 101, 99.5]), [math.log(1.01), math.log(99.5 / 101)])
    with pytest.raises(ValidationError):
        log_returns([1.0, 0.0, 2.0])
    with pytest.raises(ValidationError):
        log_returns([1.0])


@pytest.mark.parametrize("fn", [estimate_ergodic, estimate_qv_ratio])
def test_constant_prices_are_degenerate(fn):
    with pytest.raises(DegenerateInputError):
        fn(np.full(20, 50.0))


@pytest.mark.parametrize("fn", [estimate_ergodic, estimate_qv_ratio])
def test_too_few_prices(fn):
    with pytest.raises(ValidationError):
        fn([1.0, 1.1, 1.2, 1.1, 1.0, 1.05, 1.02])


def test_ergodic_recovers_fbm_parameters():
    h_hat, s_hat = zip(*[(r.h_hat, r.sigma_hat) for r in
                         (estimate_ergodic(fbm_prices(0.7, 1 << 14, seed)) for seed in range(50))])
    assert 0.65 <= np.median(h_hat) <= 0.75
    assert 0.18 <= np.median(s_hat) <= 0.22


def test_qv_ratio_recovers_do_parameters():
    h_hat, s_hat = zip(*[(r.h_hat, r.sigma_hat) for r in
                         (estimate_qv_ratio(do_prices(0.7, 1 << 14, seed)) for seed in range(50))])
    assert 0.65 <= np.median(h_hat) <= 0.75
    assert 0.18 <= np.median(s_hat) <= 0.22


def test_paper_literal_forms_do_not_recover():
    # the printed formulas invert the ratio, so h=0.7 maps near 0.3
    erg = np.median([estimate_ergodic(fbm_prices(0.7, 1 << 12, s), paper_literal=True).h_raw for s in range(10)])
    qv = np.median([estimate_qv_ratio(do_prices(0.7, 1 << 12, s), paper_literal=True).h_raw for s in range(10)])
    assert erg < 0.5 and qv < 0 and qv > -1


def test_estimators_agree_on_brownian_data():
    params = ModelParams(mu=0.05, sigma=0.2, h=0.5, model=Model.BLACK_SCHOLES)
    series = [simulate_stock_paths(params, TimeGrid(0.0, 4096 * DT, 4096), s)[0] for s in range(20)]
    erg = np.median([estimate_ergodic(p).h_hat for p in series])
    qv = np.median([estimate_qv_ratio(p).h_hat for p in series])
    assert abs(erg - 0.5) < 0.05 and abs(qv - 0.5) < 0.05
    assert abs(erg - qv) < 0.1


def test_qv_ratio_consistency_improves_with_length():
    short = np.median([abs(estimate_qv_ratio(do_prices(0.7, 1 << 10, s)).h_hat - 0.7) for s in range(40)])
    long = np.median([abs(estimate_qv_ratio(do_prices(0.7, 1 << 14, s)).h_hat - 0.7) for s in range(40)])
    assert long < short


def test_qv_ratio_odd_length_uses_actual_split():
    # with m odd the first floor(m/2) returns cover less than half the window
    y = np.full(9, 0.01)
    prices = 100.0 * np.exp(np.concatenate([[0.0], np.cumsum(y)]))
    # equal squared returns: QV grows linearly, so h = 1/2 exactly
    assert estimate_qv_ratio(prices).h_raw == pytest.approx(0.5, abs=1e-12)


def test_clamping_flag():
    # a quiet first half and a violent second half push the raw ratio estimate above 1
    y = np.concatenate([np.full(10, 1e-4), np.full(10, 0.05)]) * np.tile([1, -1], 10)
    prices = 100 * np.exp(np.concatenate([[0.0], np.cumsum(y)]))
    res = estimate_qv_ratio(prices)
    assert res.clamped and res.h_hat == 0.99 and res.h_raw > 0.99


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=1e-3, max_value=1e3), st.integers(min_value=0, max_value=10_000))
def test_scale_invariance(k, seed):
    prices = do_prices(0.6, 64, seed)
    for method in Method:
        a = estimate(prices, method)
        b = estimate(prices * k, method)
        assert a.h_hat == pytest.approx(b.h_hat, rel=1e-9, abs=1e-9)
        assert a.sigma_hat == pytest.approx(b.sigma_hat, rel=1e-7)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=-2.0, max_value=2.0), st.integers(min_value=0, max_value=10_000))
def test_drift_shift_is_exact(a, seed):
    prices = do_prices(0.6, 64, seed)
    shifted = prices * np.exp(a * np.arange(prices.size) * DT)
    diff = estimate_ergodic(shifted).mu_hat - estimate_ergodic(prices).mu_hat
    assert diff == pytest.approx(a, abs=1e-9)


def test_rolling_count_and_no_look_ahead():
    series = synthetic_series(n_days=100)
    out = rolling_estimates(series, 62, Method.QV)
    assert len(out) == 38
    assert out[0].date == series.dates[62]
    direct = estimate_qv_ratio(series.closes[0:62])
    assert out[0].h_hat == direct.h_hat and out[0].sigma_hat == direct.sigma_hat


def test_rolling_window_validation():
    series = synthetic_series(n_days=30)
    with pytest.raises(ValidationError):
        rolling_estimates(series, 7)
    with pytest.raises(ValidationError):
        rolling_estimates(series, 40)


def test_rolling_tracks_regime_shift():
    # Brownian returns followed by fBm(h=0.8) returns; the ergodic method
    # suits this because fBm increments are stationary
    n = 2048
    bs = ModelParams(mu=0.0, sigma=0.2, h=0.5, model=Model.BLACK_SCHOLES)
    first = simulate_stock_paths(bs, TimeGrid(0.0, n * DT, n), 1)[0]
    second = fbm_prices(0.8, n, 2)
    closes = np.concatenate([first, first[-1] * second[1:] / second[0]])
    series = PriceSeries("X", business_days("2000-01-03", closes.size), closes)
    h = np.array([e.h_hat for e in rolling_estimates(series, 256, Method.ERGODIC)])
    before = np.median(h[: n - 256])
    after = np.median(h[n:])
    assert after > before + 0.1


def test_qv_ratio_needs_window_at_process_origin():
    # far from t = 0 the DO variance clock t^{2h} is locally linear, so a
    # late window reads as h = 1/2; documents the estimator's assumption
    late = np.median([estimate_qv_ratio(do_prices(0.8, 8192, s)[-257:]).h_raw for s in range(20)])
    early = np.median([estimate_qv_ratio(do_prices(0.8, 256, s)).h_raw for s in range(20)])
    assert abs(late - 0.5) < 0.05
    assert abs(early - 0.8) < 0.05


def test_csv_row_format():
    res = estimate_ergodic(do_prices(0.6, 64, 0))
    row = res.csv_row()
    assert row[0] == "" and row[1] == "ergodic" and row[5] in ("true", "false")
    assert float(row[3]) == res.h_hat
