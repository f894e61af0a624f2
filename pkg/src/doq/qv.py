"""Sample quadratic variation and its convergence for DO paths."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from doq.constants import derive_constants
from doq.errors import ResourceCapError, ValidationError
from doq.paths import SamplePath, TimeGrid, simulate_do_paths

QV_MAX_STEPS = 1 << 22
DEFAULT_DELTA = 0.5


def sample_qv(path) -> float:
    """Sum of squared increments of a path (``SamplePath`` or array-like)."""
    values = path.values if isinstance(path, SamplePath) else np.asarray(path, dtype=float)
    if values.ndim != 1 or values.size < 2:
        raise ValidationError("sample_qv needs a 1-D path with at least two points")
    return float(np.sum(np.diff(values) ** 2))


def theoretical_qv_do(h: float, t0: float, t_end: float) -> float:
    """Quadratic variation ``C^2 (t_end^{2h} - t0^{2h}) / (2h)`` of the DO process."""
    if not 0 <= t0 < t_end:
        raise ValidationError(f"need 0 <= t0 < t_end, got t0={t0}, t_end={t_end}")
    hc = derive_constants(h)
    two_h = 2.0 * hc.h
    return hc.big_c ** 2 * (t_end ** two_h - t0 ** two_h) / two_h


@dataclass(frozen=True)
class QVReport:
    h: float
    t0: float
    t_end: float
    n_values: tuple
    steps: tuple
    qv_estimates: tuple
    target: float
    l2_errors: tuple
    sampling_exponent: float
    n_seeds: int
    slope: float | None

    def to_csv(self, target) -> None:
        """Write ``n,qv_mean,qv_target,l2_error`` to a path or open text file."""
        if hasattr(target, "write"):
            self._write_rows(target)
            return
        with Path(target).open("w", newline="") as fh:
            self._write_rows(fh)

    def _write_rows(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "qv_mean", "qv_target", "l2_error"])
        for n, q, e in zip(self.n_values, self.qv_estimates, self.l2_errors):
            writer.writerow([n, format(q, ".17g"), format(self.target, ".17g"), format(e, ".17g")])


def qv_convergence_harness(h: float, t0: float, t_end: float, n_list, delta: float = DEFAULT_DELTA,
                           n_seeds: int = 20, seed: int = 0, max_steps: int = QV_MAX_STEPS) -> QVReport:
    """Check ``sum (dV)^2 -> I`` on partitions of ``floor(n^{1+delta})`` steps.

    For each ``n`` the DO process is simulated (exact law) on ``[0, t_end]``
    with ``m = floor(n^{1+delta})`` steps, and squared increments are summed
    from grid index ``i0 = ceil(t0 * m / t_end)``. ``l2_errors`` are the
    root-mean-square deviations from the target across seeds; ``slope`` is the
    least-squares slope of ``log(error)`` against ``log(n)``.

    Seed ``j`` of every ``n`` uses batch row ``j`` of stream ``seed``.
    """
    n_list = [int(n) for n in n_list]
    if not n_list or any(n < 1 for n in n_list):
        raise ValidationError("n_list must be a non-empty list of positive integers")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValidationError("n_list must be strictly increasing")
    if not delta > 0:
        raise ValidationError(f"delta must be > 0, got {delta}")
    if n_seeds < 1:
        raise ValidationError("n_seeds must be >= 1")
    target = theoretical_qv_do(h, t0, t_end)

    steps = [math.floor(n ** (1.0 + delta)) for n in n_list]
    if max(steps) > max_steps:
        raise ResourceCapError(f"floor(n^(1+delta)) = {max(steps)} exceeds the cap of {max_steps} steps")

    means, errors = [], []
    for m in steps:
        grid = TimeGrid(0.0, t_end, m)
        i0 = math.ceil(t0 * m / t_end - 1e-12)
        v = simulate_do_paths(grid, h, seed, n_seeds)
        qv = np.sum(np.diff(v[:, i0:], axis=1) ** 2, axis=1)
        means.append(float(qv.mean()))
        errors.append(float(np.sqrt(np.mean((qv - target) ** 2))))

    slope = None
    if len(n_list) >= 2 and all(e > 0 for e in errors):
        slope = float(np.polyfit(np.log(n_list), np.log(errors), 1)[0])
    return QVReport(
        h=float(h), t0=float(t0), t_end=float(t_end), n_values=tuple(n_list), steps=tuple(steps),
        qv_estimates=tuple(means), target=target, l2_errors=tuple(errors),
        sampling_exponent=1.0 + delta, n_seeds=n_seeds, slope=slope,
    )
