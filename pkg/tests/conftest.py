import numpy as np
import pytest

from doq.data import PriceSeries
from doq.paths import Model, ModelParams, TimeGrid, simulate_stock_paths


def business_days(start: str, n: int) -> tuple:
    return tuple(np.busday_offset(start, np.arange(n), roll="forward").astype(object))


def synthetic_series(n_days=160, h=0.7, sigma=0.3, mu=0.05, s0=38.0, seed=11, model=Model.DOBRIC_OJEDA,
                     eps=0.1, symbol="SYN", start="2019-01-02") -> PriceSeries:
    """Daily closes from a simulated geometric price path (dt = 1/252)."""
    params = ModelParams(mu=mu, sigma=sigma, h=h, eps=eps, s0=s0, model=model)
    grid = TimeGrid(0.0, (n_days - 1) / 252.0, n_days - 1)
    closes = simulate_stock_paths(params, grid, seed)[0]
    return PriceSeries(symbol, business_days(start, n_days), closes)


@pytest.fixture
def series160():
    return synthetic_series()
