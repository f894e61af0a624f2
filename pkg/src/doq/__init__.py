"""Dobric-Ojeda process toolkit.

Simulation of the DO process and its modified (drift cut-on) variant,
quadratic-variation checks, closed-form / PDE / Monte Carlo call pricing,
Hurst and volatility estimation from daily closes, and rolling backtests.
"""

__version__ = "0.1.0"

from doq.constants import HurstConstants, check_hurst, derive_constants, gamma_fn  # noqa: E402
from doq.data import PriceSeries, load_price_series, load_quotes, write_price_series  # noqa: E402
from doq.errors import (AdmissibilityError, DataFormatError, DegenerateHurstError,  # noqa: E402
                        DegenerateInputError, DomainError, GridTooCoarseError, NumericalError,
                        ResourceCapError, ValidationError)
from doq.estimation import (EstimateResult, Method, estimate, estimate_ergodic,  # noqa: E402
                            estimate_qv_ratio, rolling_estimates)
from doq.paths import (Model, ModelParams, PathKind, SamplePath, Scheme, TimeGrid,  # noqa: E402
                       simulate_bm_path, simulate_do_path, simulate_do_paths, simulate_fbm_path,
                       simulate_fbm_paths, simulate_martingale_path, simulate_martingale_paths,
                       simulate_modified_do_path, simulate_modified_do_paths, simulate_stock_path,
                       simulate_stock_paths)
from doq.pricing import (OptionSpec, PriceQuote, bs_call, call_price, check_admissible,  # noqa: E402
                         do_call, do_call_pde, fbm_call, mc_call)
from doq.qv import QVReport, qv_convergence_harness, sample_qv, theoretical_qv_do  # noqa: E402
from doq.backtest import BacktestRow, emit_report, run_backtest  # noqa: E402

__all__ = [
    "HurstConstants", "check_hurst", "derive_constants", "gamma_fn",
    "PriceSeries", "load_price_series", "load_quotes", "write_price_series",
    "AdmissibilityError", "DataFormatError", "DegenerateHurstError", "DegenerateInputError",
    "DomainError", "GridTooCoarseError", "NumericalError", "ResourceCapError", "ValidationError",
    "EstimateResult", "Method", "estimate", "estimate_ergodic", "estimate_qv_ratio", "rolling_estimates",
    "Model", "ModelParams", "PathKind", "SamplePath", "Scheme", "TimeGrid",
    "simulate_bm_path", "simulate_do_path", "simulate_do_paths", "simulate_fbm_path",
    "simulate_fbm_paths", "simulate_martingale_path", "simulate_martingale_paths",
    "simulate_modified_do_path", "simulate_modified_do_paths", "simulate_stock_path",
    "simulate_stock_paths",
    "OptionSpec", "PriceQuote", "bs_call", "call_price", "check_admissible", "do_call",
    "do_call_pde", "fbm_call", "mc_call",
    "QVReport", "qv_convergence_harness", "sample_qv", "theoretical_qv_do",
    "BacktestRow", "emit_report", "run_backtest",
]
