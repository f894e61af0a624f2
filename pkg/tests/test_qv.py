import io

import numpy as np
import pytest

from doq.constants import derive_constants
from doq.errors import ResourceCapError, ValidationError
from doq.paths import ModelParams, TimeGrid, simulate_bm_paths, simulate_do_paths, simulate_stock_paths
from doq.qv import qv_convergence_harness, sample_qv, theoretical_qv_do


def test_sample_qv_small_cases():
    assert sample_qv(np.full(10, 3.0)) == 0.0
    assert sample_qv([0, 1, 0, 1]) == 3.0
    with pytest.raises(ValidationError):
        sample_qv([1.0])


def test_bm_qv_is_elapsed_time():
    b = simulate_bm_paths(TimeGrid(0.0, 1.0, 10_000), 0)[0]
    assert sample_qv(b) == pytest.approx(1.0, abs=0.05)


def test_theoretical_qv():
    assert theoretical_qv_do(0.5, 0.0, 1.0) == 1.0
    assert theoretical_qv_do(0.5, 0.25, 1.0) == 0.75
    assert theoretical_qv_do(0.7, 0.0, 1.0) == pytest.approx(0.7693652454801769 ** 2 / 1.4, rel=1e-12)
    with pytest.raises(ValidationError):
        theoretical_qv_do(0.7, 1.0, 1.0)


@pytest.mark.parametrize("h", [0.4, 0.5, 0.6, 0.7])
def test_do_qv_close_to_target_at_fine_resolution(h):
    v = simulate_do_paths(TimeGrid(0.0, 1.0, 32768), h, 3, 20)
    qv = np.sum(np.diff(v, axis=1) ** 2, axis=1)
    target = theoretical_qv_do(h, 0.0, 1.0)
    assert abs(qv.mean() - target) / target < 0.05


def test_log_stock_qv_scales_with_sigma_squared():
    h, sigma = 0.7, 0.3
    params = ModelParams(mu=0.05, sigma=sigma, h=h, eps=0.2)
    s = simulate_stock_paths(params, TimeGrid(0.0, 1.0, 32768), 1, 5)
    qv = np.sum(np.diff(np.log(s), axis=1) ** 2, axis=1).mean()
    target = sigma ** 2 * theoretical_qv_do(h, 0.0, 1.0)
    assert abs(qv - target) / target < 0.05


def test_linear_drift_barely_moves_qv():
    n = 32768
    grid = TimeGrid(0.0, 1.0, n)
    b = simulate_bm_paths(grid, 4)[0]
    drifted = b + 0.7 * grid.points()
    base = sample_qv(b)
    assert abs(sample_qv(drifted) - base) < 1e-3 * base


def test_harness_errors_decrease():
    for h in (0.5, 0.7):
        report = qv_convergence_harness(h, 0.0, 1.0, [64, 256, 1024], delta=0.5, n_seeds=50, seed=2)
        assert report.steps == (512, 4096, 32768)
        assert all(b < a for a, b in zip(report.l2_errors, report.l2_errors[1:]))
        assert report.slope < 0


def test_harness_window_start():
    report = qv_convergence_harness(0.7, 0.25, 1.0, [100], n_seeds=4, seed=0)
    assert report.target == pytest.approx(theoretical_qv_do(0.7, 0.25, 1.0))
    assert report.slope is None


def test_harness_degenerate_input():
    report = qv_convergence_harness(0.6, 0.0, 1.0, [1], n_seeds=1)
    assert report.n_values == (1,) and len(report.l2_errors) == 1


def test_harness_validation():
    with pytest.raises(ValidationError):
        qv_convergence_harness(0.6, 0.0, 1.0, [64, 32])
    with pytest.raises(ValidationError):
        qv_convergence_harness(0.6, 0.0, 1.0, [64], delta=0.0)
    with pytest.raises(ResourceCapError):
        qv_convergence_harness(0.6, 0.0, 1.0, [1 << 16], delta=0.5)


def test_report_csv():
    report = qv_convergence_harness(0.6, 0.0, 1.0, [4, 8], n_seeds=2)
    buf = io.StringIO()
    report.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "n,qv_mean,qv_target,l2_error"
    assert len(lines) == 3
    assert float(lines[1].split(",")[2]) == report.target
    assert derive_constants(0.6).big_c > 0
