"""Sample-path simulation on uniform grids.

Randomness is keyed by ``(seed, path_index)``: path ``k`` of a batch always
draws from its own ``SeedSequence([seed, k])`` stream, so a batch is
reproducible no matter how it is split across threads, and row 0 of any batch
equals the single-path result for the same seed.

Conventions
-----------
* All processes start at 0 at ``grid.t0`` (stock paths start at ``s0``).
  Increment laws use absolute model time, so a grid with ``t0 > 0`` yields the
  process restarted at ``t0``.
* Integrands that would be evaluated at ``t = 0`` use the first positive grid
  point instead.
"""

from __future__ import annotations

import csv
import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.linalg import toeplitz

from doq.constants import HurstConstants, check_hurst, derive_constants
from doq.errors import NumericalError, ResourceCapError, ValidationError

FBM_CHOLESKY_MAX_STEPS = 4096


class PathKind(str, enum.Enum):
    M = "M"
    V = "V"
    V_EPS = "V_eps"
    FBM = "fBm"
    BM = "BM"
    STOCK = "stock"


class Scheme(str, enum.Enum):
    EXACT = "exact"
    PAPER_EULER = "paper-euler"


class Model(str, enum.Enum):
    BLACK_SCHOLES = "bs"
    FRACTIONAL_BM = "fbm"
    DOBRIC_OJEDA = "do"


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition ``t_i = t0 + i * dt`` of ``[t0, t_end]``."""

    t0: float
    t_end: float
    n_steps: int

    def __post_init__(self):
        if not (math.isfinite(self.t0) and math.isfinite(self.t_end)):
            raise ValidationError("grid bounds must be finite")
        if self.t0 < 0:
            raise ValidationError(f"grid t0 must be >= 0, got {self.t0}")
        if not self.t_end > self.t0:
            raise ValidationError(f"grid needs t_end > t0, got [{self.t0}, {self.t_end}]")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValidationError(f"n_steps must be a positive integer, got {self.n_steps}")

    @property
    def dt(self) -> float:
        return (self.t_end - self.t0) / self.n_steps

    def points(self) -> np.ndarray:
        t = self.t0 + self.dt * np.arange(self.n_steps + 1, dtype=float)
        t[-1] = self.t_end
        return t


@dataclass(frozen=True)
class SamplePath:
    grid: TimeGrid
    values: np.ndarray
    label: PathKind

    def __post_init__(self):
        if self.values.shape != (self.grid.n_steps + 1,):
            raise ValidationError("path length does not match its grid")

    @property
    def times(self) -> np.ndarray:
        return self.grid.points()

    def to_csv(self, path) -> None:
        write_path_csv(self, path)


@dataclass(frozen=True)
class ModelParams:
    """Market and model parameters for stock simulation and pricing.

    ``eps`` is the drift cut-on time of the modified DO process; pricing
    under the modified risk-neutral measure additionally requires
    ``eps > delta_h(h) * T`` (checked where that measure is used).
    """

    mu: float = 0.0
    sigma: float = 0.2
    h: float = 0.5
    eps: float = 0.0
    s0: float = 100.0
    r: float = 0.0
    model: Model = Model.DOBRIC_OJEDA
    constants: HurstConstants = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValidationError(f"sigma must be > 0, got {self.sigma}")
        if not self.s0 > 0:
            raise ValidationError(f"s0 must be > 0, got {self.s0}")
        if not self.eps >= 0:
            raise ValidationError(f"eps must be >= 0, got {self.eps}")
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "constants", derive_constants(self.h))


def max_workers() -> int:
    """Thread cap from ``DOQ_MAX_THREADS`` (defaults to the CPU count)."""
    raw = os.environ.get("DOQ_MAX_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValidationError(f"DOQ_MAX_THREADS must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


def path_rng(seed: int, path_index: int) -> np.random.Generator:
    if int(seed) != seed or seed < 0:
        raise ValidationError(f"seed must be a non-negative integer, got {seed!r}")
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(path_index)]))


def standard_normals(seed: int, n_paths: int, n_cols: int) -> np.ndarray:
    """``(n_paths, n_cols)`` standard normals, row ``k`` from stream ``(seed, k)``."""
    if n_paths < 1:
        raise ValidationError("n_paths must be >= 1")
    out = np.empty((n_paths, n_cols))

    def fill(rows: range) -> None:
        for k in rows:
            out[k] = path_rng(seed, k).standard_normal(n_cols)

    workers = min(max_workers(), n_paths)
    if workers <= 1 or n_paths * n_cols < 200_000:
        fill(range(n_paths))
    else:
        bounds = np.linspace(0, n_paths, workers + 1).astype(int)
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(fill, [range(a, b) for a, b in zip(bounds[:-1], bounds[1:])]))
    return out


def _left_points(t: np.ndarray) -> np.ndarray:
    left = t[:-1].copy()
    if left[0] == 0.0:
        left[0] = t[1]
    return left


def _prepend_zero(increments: np.ndarray) -> np.ndarray:
    out = np.zeros((increments.shape[0], increments.shape[1] + 1))
    np.cumsum(increments, axis=1, out=out[:, 1:])
    return out


def _martingale_increments(t, hc: HurstConstants, z, scheme: Scheme, dt: float) -> np.ndarray:
    h = hc.h
    if scheme is Scheme.EXACT:
        var = hc.c_m * (t[1:] ** (2.0 - 2.0 * h) - t[:-1] ** (2.0 - 2.0 * h))
        return np.sqrt(var) * z
    return hc.martingale_scale * _left_points(t) ** (0.5 - h) * math.sqrt(dt) * z


def _modified_do_from_martingale(t, hc: HurstConstants, eps: float, dm: np.ndarray) -> np.ndarray:
    """Euler-Maruyama for the modified DO SDE driven by the W that represents M."""
    h = hc.h
    left = _left_points(t)
    m = _prepend_zero(dm)
    dw = dm / (hc.martingale_scale * left ** (0.5 - h))
    diffusion = hc.big_c * left ** (h - 0.5) * dw
    on = (t[:-1] >= eps).astype(float)
    drift = hc.c_psi * (2.0 * h - 1.0) * left ** (2.0 * h - 2.0) * m[:, :-1] * on * np.diff(t)
    return _prepend_zero(diffusion + drift)


def _psi_times(t, hc: HurstConstants, m: np.ndarray) -> np.ndarray:
    v = np.zeros_like(m)
    pos = t > 0
    v[:, pos] = hc.c_psi * t[pos] ** (2.0 * hc.h - 1.0) * m[:, pos]
    return v


def modified_do_second_moment(h: float, eps: float, t: float) -> float:
    """Closed-form ``E[(V^eps_t)^2]``.

    For ``t <= eps`` only the martingale integral has accumulated, giving
    ``C^2 t^{2h} / (2h)``. For ``t > eps`` the drift adds cross and square
    terms::

        C^2 t^{2h}/(2h) + 2 C^2 (2h-1) (t^{2h} - eps^{2h})/(2h)
        + 2 c_m c_psi^2 (2h-1)^2 [(t^{2h} - eps^{2h})/(2h)
                                  - eps (t^{2h-1} - eps^{2h-1})/(2h-1)]

    which reduces to ``c_psi^2 c_m t^{2h}`` (the unmodified process) at ``eps = 0``.
    """
    hc = derive_constants(h)
    if not (eps >= 0 and t >= 0):
        raise ValidationError(f"need eps >= 0 and t >= 0, got eps={eps}, t={t}")
    two_h = 2.0 * hc.h
    base = hc.big_c ** 2 * t ** two_h / two_h
    if t <= eps:
        return base
    k = two_h - 1.0
    grown = (t ** two_h - eps ** two_h) / two_h
    # eps (t^{k} - eps^{k}) / k, written so that k = 0 needs no special case
    if eps == 0.0:
        tail = 0.0
    elif abs(k) < 1e-12:
        tail = eps * math.log(t / eps)
    else:
        tail = eps * (t ** k - eps ** k) / k
    return base + 2.0 * hc.big_c ** 2 * k * grown + 2.0 * hc.c_m * hc.c_psi ** 2 * k * k * (grown - tail)


def simulate_martingale_paths(grid: TimeGrid, h: float, seed: int, n_paths: int = 1,
                              scheme: Scheme = Scheme.EXACT) -> np.ndarray:
    """Batch of ``M_H`` paths, shape ``(n_paths, n_steps + 1)``.

    ``Scheme.EXACT`` samples the exact Gaussian increments with variance
    ``c_m (t_i^{2-2h} - t_{i-1}^{2-2h})``. ``Scheme.PAPER_EULER`` uses the
    first-order rule ``sqrt(c_m (2-2h)) t^{1/2-h} sqrt(dt) X`` with ``t`` at
    the left endpoint (right endpoint on a step that starts at 0).
    """
    hc = derive_constants(h)
    scheme = Scheme(scheme)
    t = grid.points()
    z = standard_normals(seed, n_paths, grid.n_steps)
    return _prepend_zero(_martingale_increments(t, hc, z, scheme, grid.dt))


def simulate_martingale_path(grid: TimeGrid, h: float, seed: int,
                             scheme: Scheme = Scheme.EXACT) -> SamplePath:
    values = simulate_martingale_paths(grid, h, seed, 1, scheme)[0]
    return SamplePath(grid, values, PathKind.M)


def simulate_do_paths(grid: TimeGrid, h: float, seed: int, n_paths: int = 1,
                      scheme: Scheme = Scheme.EXACT) -> np.ndarray:
    """``V_H(t) = c_psi t^{2h-1} M_H(t)`` built pointwise from the M batch."""
    hc = derive_constants(h)
    m = simulate_martingale_paths(grid, h, seed, n_paths, scheme)
    return _psi_times(grid.points(), hc, m)


def simulate_do_path(grid: TimeGrid, h: float, seed: int,
                     scheme: Scheme = Scheme.EXACT) -> SamplePath:
    return SamplePath(grid, simulate_do_paths(grid, h, seed, 1, scheme)[0], PathKind.V)


def simulate_modified_do_paths(grid: TimeGrid, h: float, eps: float, seed: int, n_paths: int = 1,
                               scheme: Scheme = Scheme.EXACT) -> np.ndarray:
    """Batch of modified DO paths (drift switched on from ``eps``).

    The Brownian increments are recovered from the same M increments that
    :func:`simulate_do_paths` uses for this seed, so the two batches are
    coupled path by path.
    """
    if not eps >= 0:
        raise ValidationError(f"eps must be >= 0, got {eps}")
    hc = derive_constants(h)
    scheme = Scheme(scheme)
    t = grid.points()
    z = standard_normals(seed, n_paths, grid.n_steps)
    dm = _martingale_increments(t, hc, z, scheme, grid.dt)
    return _modified_do_from_martingale(t, hc, eps, dm)


def simulate_modified_do_path(grid: TimeGrid, h: float, eps: float, seed: int,
                              scheme: Scheme = Scheme.EXACT) -> SamplePath:
    values = simulate_modified_do_paths(grid, h, eps, seed, 1, scheme)[0]
    return SamplePath(grid, values, PathKind.V_EPS)


def simulate_bm_paths(grid: TimeGrid, seed: int, n_paths: int = 1) -> np.ndarray:
    t = grid.points()
    z = standard_normals(seed, n_paths, grid.n_steps)
    return _prepend_zero(np.sqrt(t[1:] - t[:-1]) * z)


def simulate_bm_path(grid: TimeGrid, seed: int) -> SamplePath:
    return SamplePath(grid, simulate_bm_paths(grid, seed, 1)[0], PathKind.BM)


def _martingale_integral_paths(grid: TimeGrid, hc: HurstConstants, seed: int, n_paths: int) -> np.ndarray:
    """Exact samples of ``C * int_0^t s^{h-1/2} dW_s`` (independent Gaussian increments)."""
    t = grid.points()
    two_h = 2.0 * hc.h
    var = hc.big_c ** 2 * (t[1:] ** two_h - t[:-1] ** two_h) / two_h
    z = standard_normals(seed, n_paths, grid.n_steps)
    return _prepend_zero(np.sqrt(var) * z)


# ----------------------------------------------------------------------------
# fractional Brownian motion

def fgn_autocovariance(n: int, h: float) -> np.ndarray:
    """Autocovariance of unit-step fractional Gaussian noise at lags ``0..n-1``."""
    k = np.arange(n, dtype=float)
    two_h = 2.0 * h
    return 0.5 * (np.abs(k + 1) ** two_h - 2.0 * k ** two_h + np.abs(k - 1) ** two_h)


@lru_cache(maxsize=8)
def _fgn_cholesky(n: int, h: float) -> np.ndarray:
    cov = toeplitz(fgn_autocovariance(n, h))
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"fGn covariance (n={n}, h={h}) is not positive definite") from exc
    chol.setflags(write=False)
    return chol


def _fgn_davies_harte(n: int, h: float, seed: int, n_paths: int) -> np.ndarray:
    acov = fgn_autocovariance(n + 1, h)
    row = np.concatenate([acov, acov[-2:0:-1]])
    size = row.size  # 2n
    lam = np.fft.fft(row).real
    if lam.min() < -1e-10 * lam.max():
        raise NumericalError(f"circulant embedding has negative eigenvalues (n={n}, h={h})")
    lam = np.clip(lam, 0.0, None)

    z = standard_normals(seed, n_paths, size)
    w = np.empty((n_paths, size), dtype=complex)
    w[:, 0] = math.sqrt(lam[0] / size) * z[:, 0]
    w[:, n] = math.sqrt(lam[n] / size) * z[:, 1]
    scale = np.sqrt(lam[1:n] / (2.0 * size))
    w[:, 1:n] = scale * (z[:, 2:n + 1] + 1j * z[:, n + 1:2 * n])
    w[:, n + 1:] = np.conj(w[:, n - 1:0:-1])
    return np.fft.fft(w, axis=1).real[:, :n]


def simulate_fbm_paths(grid: TimeGrid, h: float, seed: int, n_paths: int = 1,
                       method: str = "cholesky", max_steps: int = FBM_CHOLESKY_MAX_STEPS) -> np.ndarray:
    """Exact-in-law fBm samples, shape ``(n_paths, n_steps + 1)``.

    ``method="cholesky"`` factors the Toeplitz covariance of the increments
    and is capped at ``max_steps``. ``method="davies-harte"`` uses circulant
    embedding and has no cap.
    """
    h = check_hurst(h)
    n = grid.n_steps
    if method == "cholesky":
        if n > max_steps:
            raise ResourceCapError(
                f"fBm Cholesky simulation is capped at {max_steps} steps, got {n}; "
                "use method='davies-harte' for longer paths"
            )
        z = standard_normals(seed, n_paths, n)
        noise = z @ _fgn_cholesky(n, h).T
    elif method == "davies-harte":
        noise = _fgn_davies_harte(n, h, seed, n_paths)
    else:
        raise ValidationError(f"unknown fBm method {method!r}")
    return _prepend_zero(grid.dt ** h * noise)


def simulate_fbm_path(grid: TimeGrid, h: float, seed: int, method: str = "cholesky",
                      max_steps: int = FBM_CHOLESKY_MAX_STEPS) -> SamplePath:
    values = simulate_fbm_paths(grid, h, seed, 1, method, max_steps)[0]
    return SamplePath(grid, values, PathKind.FBM)


# ----------------------------------------------------------------------------
# stock prices

def elapsed_variance(model: Model, hc: HurstConstants, t: np.ndarray, t0: float) -> np.ndarray:
    """Variance-correction clock of the log price, so ``log S`` has the
    ``-sigma^2/2 * elapsed_variance`` term of each model's explicit solution."""
    model = Model(model)
    if model is Model.BLACK_SCHOLES:
        return t - t0
    two_h = 2.0 * hc.h
    if model is Model.FRACTIONAL_BM:
        return (t - t0) ** two_h
    return hc.big_c ** 2 * (t ** two_h - t0 ** two_h) / two_h


def simulate_stock_paths(params: ModelParams, grid: TimeGrid, seed: int, n_paths: int = 1, *,
                         scheme: Scheme = Scheme.EXACT, fbm_method: str = "cholesky",
                         measure: str = "physical") -> np.ndarray:
    """Geometric price paths driven by BM, fBm or the (modified) DO process.

    ``measure="physical"`` uses drift ``mu``; for the DO model the driver is
    the modified DO path with cut-on ``params.eps``. ``measure="risk_neutral"``
    uses drift ``r``; for the DO model the driver becomes the exact
    martingale integral ``C int s^{h-1/2} dW``, under which the discounted
    price is a martingale.
    """
    if measure not in ("physical", "risk_neutral"):
        raise ValidationError(f"measure must be 'physical' or 'risk_neutral', got {measure!r}")
    hc = params.constants
    t = grid.points()
    if params.model is Model.BLACK_SCHOLES:
        driver = simulate_bm_paths(grid, seed, n_paths)
    elif params.model is Model.FRACTIONAL_BM:
        driver = simulate_fbm_paths(grid, params.h, seed, n_paths, fbm_method)
    elif measure == "risk_neutral":
        driver = _martingale_integral_paths(grid, hc, seed, n_paths)
    else:
        driver = simulate_modified_do_paths(grid, params.h, params.eps, seed, n_paths, scheme)

    rate = params.r if measure == "risk_neutral" else params.mu
    u = elapsed_variance(params.model, hc, t, grid.t0)
    log_growth = rate * (t - grid.t0) + params.sigma * driver - 0.5 * (params.sigma ** 2 * u)
    return params.s0 * np.exp(log_growth)


def simulate_stock_path(params: ModelParams, grid: TimeGrid, seed: int, *,
                        scheme: Scheme = Scheme.EXACT, fbm_method: str = "cholesky",
                        measure: str = "physical") -> SamplePath:
    values = simulate_stock_paths(params, grid, seed, 1, scheme=scheme,
                                  fbm_method=fbm_method, measure=measure)[0]
    return SamplePath(grid, values, PathKind.STOCK)


def write_path_csv(path: SamplePath, target) -> None:
    """Dump ``t,value`` rows with 17 significant digits to a path or open text file."""
    if hasattr(target, "write"):
        _write_path_rows(path, target)
        return
    with Path(target).open("w", newline="") as fh:
        _write_path_rows(path, fh)


def _write_path_rows(path: SamplePath, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["t", "value"])
    for t, v in zip(path.times, path.values):
        writer.writerow([format(float(t), ".17g"), format(float(v), ".17g")])
