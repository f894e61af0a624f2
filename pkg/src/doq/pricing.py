"""European call prices under Black-Scholes, geometric fBm and the DO model.

All three closed forms are lognormal evaluations that differ only in the
total standard deviation of the log price between valuation time ``t`` and
expiry ``T``:

* Black-Scholes: ``sigma * sqrt(T - t)``
* fBm: ``sigma * sqrt(T^{2H} - t^{2H})``
* DO: ``sigma * C * sqrt((T^{2H} - t^{2H}) / (2H))``

Times are model-clock times (years since the process started), so for
``H != 1/2`` the price depends on ``t`` and ``T`` separately, not only on
``T - t``.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded

from doq.constants import derive_constants
from doq.errors import AdmissibilityError, GridTooCoarseError, ValidationError
from doq.paths import Model, ModelParams, max_workers, path_rng

MC_BLOCK = 1 << 16
PDE_WIDTH = 6.0
_SQRT2 = math.sqrt(2.0)


class OptionKind(str, enum.Enum):
    EUROPEAN_CALL = "european_call"


@dataclass(frozen=True)
class OptionSpec:
    strike: float
    expiry: float
    kind: OptionKind = OptionKind.EUROPEAN_CALL

    def __post_init__(self):
        if not self.strike > 0:
            raise ValidationError(f"strike must be > 0, got {self.strike}")
        if not self.expiry > 0:
            raise ValidationError(f"expiry must be > 0, got {self.expiry}")
        object.__setattr__(self, "kind", OptionKind(self.kind))


@dataclass(frozen=True)
class PriceQuote:
    """A call value.

    ``d1`` is the exercise threshold of the standard normal driver:
    the option ends in the money when ``z >= d1``, so
    ``value = S Phi(v - d1) - K e^{-r tau} Phi(-d1)``. It is ``None`` at
    expiry. ``stderr`` is set only by Monte Carlo.
    """

    value: float
    model: Model
    d1: float | None = None
    stderr: float | None = None

    def to_dict(self) -> dict:
        return {"model": self.model.value, "value": self.value, "d1": self.d1, "stderr": self.stderr}


def norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def _check_market(s, k, sigma, t, t_exp) -> None:
    if not s > 0:
        raise ValidationError(f"spot must be > 0, got {s}")
    if not k > 0:
        raise ValidationError(f"strike must be > 0, got {k}")
    if not sigma > 0:
        raise ValidationError(f"sigma must be > 0, got {sigma}")
    if not t >= 0:
        raise ValidationError(f"valuation time must be >= 0, got {t}")
    if not t <= t_exp:
        raise ValidationError(f"valuation time {t} is after expiry {t_exp}")


def total_std(model, sigma: float, h: float, t: float, t_exp: float) -> float:
    """Standard deviation of ``log(S_T / S_t)`` under the pricing measure."""
    model = Model(model)
    if model is Model.BLACK_SCHOLES:
        return sigma * math.sqrt(t_exp - t)
    hc = derive_constants(h)
    two_h = 2.0 * hc.h
    if model is Model.FRACTIONAL_BM:
        return sigma * math.sqrt(t_exp ** two_h - t ** two_h)
    return sigma * hc.big_c * math.sqrt((t_exp ** two_h - t ** two_h) / two_h)


def _lognormal_call(s, k, r, tau, v, model: Model) -> PriceQuote:
    discount = math.exp(-r * tau)
    lower = max(s - k * discount, 0.0)
    if tau == 0.0 or v == 0.0:
        return PriceQuote(lower if tau else max(s - k, 0.0), model)
    d1 = (math.log(k / s) - r * tau + 0.5 * v * v) / v
    value = s * norm_cdf(v - d1) - k * discount * norm_cdf(-d1)
    return PriceQuote(min(max(value, lower), s), model, d1)


def bs_call(s, k, r, sigma, t, t_exp) -> PriceQuote:
    _check_market(s, k, sigma, t, t_exp)
    tau = t_exp - t
    return _lognormal_call(s, k, r, tau, total_std(Model.BLACK_SCHOLES, sigma, 0.5, t, t_exp),
                           Model.BLACK_SCHOLES)


def fbm_call(s, k, r, sigma, h, t, t_exp) -> PriceQuote:
    _check_market(s, k, sigma, t, t_exp)
    return _lognormal_call(s, k, r, t_exp - t, total_std(Model.FRACTIONAL_BM, sigma, h, t, t_exp),
                           Model.FRACTIONAL_BM)


def do_call(s_eps, k, r, sigma, h, t, t_exp) -> PriceQuote:
    """Closed-form call on the modified DO stock; ``s_eps`` is its price at ``t``.

    The drift cut-on time plays no part here: the price depends only on the
    variance of the martingale part between ``t`` and expiry.
    """
    _check_market(s_eps, k, sigma, t, t_exp)
    return _lognormal_call(s_eps, k, r, t_exp - t, total_std(Model.DOBRIC_OJEDA, sigma, h, t, t_exp),
                           Model.DOBRIC_OJEDA)


def call_price(model, s, k, r, sigma, h, t, t_exp) -> PriceQuote:
    model = Model(model)
    if model is Model.BLACK_SCHOLES:
        return bs_call(s, k, r, sigma, t, t_exp)
    if model is Model.FRACTIONAL_BM:
        return fbm_call(s, k, r, sigma, h, t, t_exp)
    return do_call(s, k, r, sigma, h, t, t_exp)


# ----------------------------------------------------------------------------
# finite differences

def _cn_solve(log_s, k, r, sigma, hc, t, t_exp, n_x, n_t, v) -> float:
    y = np.linspace(log_s - PDE_WIDTH * v, log_s + PDE_WIDTH * v, n_x)
    dy = y[1] - y[0]
    x = np.exp(y)
    times = np.linspace(t, t_exp, n_t + 1)
    two_h = 2.0 * hc.h
    scale = sigma ** 2 * hc.big_c ** 2 / two_h
    # Integrated variance per step; exact even where t^{2H-1} is singular.
    w_steps = scale * np.diff(times ** two_h)

    f = np.maximum(x - k, 0.0)
    ab = np.zeros((3, n_x - 2))
    for n in range(n_t - 1, -1, -1):
        w = w_steps[n]
        rdt = r * (times[n + 1] - times[n])
        lo = w / (2 * dy * dy) - (rdt - 0.5 * w) / (2 * dy)
        di = -w / (dy * dy) - rdt
        up = w / (2 * dy * dy) + (rdt - 0.5 * w) / (2 * dy)
        # Two fully implicit steps first damp the payoff kink (Rannacher start).
        theta = 1.0 if n >= n_t - 2 else 0.5

        f_hi_new = x[-1] - k * math.exp(-r * (t_exp - times[n]))
        inner = f[1:-1]
        rhs = inner + (1 - theta) * (lo * f[:-2] + di * inner + up * f[2:])
        rhs[-1] += theta * up * f_hi_new

        ab[0, 1:] = -theta * up
        ab[1, :] = 1.0 - theta * di
        ab[2, :-1] = -theta * lo
        new = np.empty_like(f)
        new[0] = 0.0
        new[-1] = f_hi_new
        new[1:-1] = solve_banded((1, 1), ab, rhs)
        f = new
    return float(CubicSpline(y, f)(log_s))


def do_call_pde(s_eps, k, r, sigma, h, t, t_exp, x_nodes: int = 400, t_steps: int = 400,
                check: bool = True, check_tol: float = 1e-2) -> PriceQuote:
    """DO call price from the pricing PDE, solved backward from the payoff.

    The PDE ``r f = r x f_x + f_t + sigma^2 C^2 t^{2H-1} x^2 f_xx / 2`` is
    solved in log price on ``[s e^{-6v}, s e^{6v}]`` (``v`` the total standard
    deviation to expiry) with a Crank-Nicolson scheme. Each time step uses the
    exact integral of the time-dependent diffusion coefficient over the step.
    Boundaries: ``f = 0`` below, ``f = x - K e^{-r(T - t)}`` above.

    With ``check=True`` the problem is re-solved on a grid halved in both
    directions; if the implied error estimate ``|fine - coarse| / 3`` exceeds
    ``check_tol`` relative to the price, :class:`GridTooCoarseError` is raised.
    """
    _check_market(s_eps, k, sigma, t, t_exp)
    if x_nodes < 50 or t_steps < 50:
        raise ValidationError(f"PDE grid needs x_nodes >= 50 and t_steps >= 50, got {x_nodes}x{t_steps}")
    hc = derive_constants(h)
    tau = t_exp - t
    if tau == 0.0:
        return PriceQuote(max(s_eps - k, 0.0), Model.DOBRIC_OJEDA)
    v = total_std(Model.DOBRIC_OJEDA, sigma, h, t, t_exp)
    log_s = math.log(s_eps)
    value = _cn_solve(log_s, k, r, sigma, hc, t, t_exp, x_nodes, t_steps, v)
    if check:
        coarse = _cn_solve(log_s, k, r, sigma, hc, t, t_exp, x_nodes // 2, max(t_steps // 2, 1), v)
        err = abs(value - coarse) / 3.0
        if err > check_tol * max(abs(value), 1e-8 * s_eps):
            raise GridTooCoarseError(
                f"PDE grid {x_nodes}x{t_steps} looks unresolved: fine={value:.8g}, coarse={coarse:.8g}"
            )
    lower = max(s_eps - k * math.exp(-r * tau), 0.0)
    return PriceQuote(min(max(value, lower), s_eps), Model.DOBRIC_OJEDA)


# ----------------------------------------------------------------------------
# Monte Carlo

def check_admissible(h: float, eps: float, t_exp: float) -> None:
    """Require ``eps > delta(H) * T`` for ``H != 1/2``.

    Without a drift cut-on, the Girsanov kernel of the DO model fails
    Novikov's condition (its exponential moment is infinite because of the
    ``1/t`` drift at the origin); the cut-on restores it only for
    ``eps > delta(H) * T``.
    """
    hc = derive_constants(h)
    if hc.h == 0.5:
        return
    bound = hc.delta_h * t_exp
    if not eps > bound:
        raise AdmissibilityError(
            f"eps={eps} is not admissible for H={hc.h}, T={t_exp}: need eps > delta(H)*T = "
            f"{hc.delta_h:.6g}*{t_exp} = {bound:.6g} (Novikov's condition)"
        )


def mc_call(params: ModelParams, spec: OptionSpec, t: float = 0.0, n_paths: int = 100_000,
            seed: int = 0) -> PriceQuote:
    """Monte Carlo call price from exact lognormal terminal draws.

    ``params.s0`` is the price at ``t``. Paths are drawn in blocks of
    ``MC_BLOCK``; block ``b`` uses stream ``(seed, b)``, so the estimate does
    not depend on how many threads evaluate the blocks.
    """
    if n_paths < 1000:
        raise ValidationError(f"n_paths must be >= 1000, got {n_paths}")
    t_exp = spec.expiry
    _check_market(params.s0, spec.strike, params.sigma, t, t_exp)
    if params.model is Model.DOBRIC_OJEDA:
        check_admissible(params.h, params.eps, t_exp)
    tau = t_exp - t
    v = total_std(params.model, params.sigma, params.h, t, t_exp)
    discount = math.exp(-params.r * tau)
    drift = params.r * tau - 0.5 * v * v
    k = spec.strike

    sizes = [MC_BLOCK] * (n_paths // MC_BLOCK)
    if n_paths % MC_BLOCK:
        sizes.append(n_paths % MC_BLOCK)

    def block(b: int) -> tuple[float, float]:
        z = path_rng(seed, b).standard_normal(sizes[b])
        payoff = discount * np.maximum(params.s0 * np.exp(drift + v * z) - k, 0.0)
        return float(payoff.sum()), float((payoff * payoff).sum())

    workers = min(max_workers(), len(sizes))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(block, range(len(sizes))))
    else:
        parts = [block(b) for b in range(len(sizes))]
    total = math.fsum(p[0] for p in parts)
    total_sq = math.fsum(p[1] for p in parts)
    mean = total / n_paths
    var = max(total_sq / n_paths - mean * mean, 0.0) * n_paths / (n_paths - 1)
    return PriceQuote(mean, params.model, stderr=math.sqrt(var / n_paths))
