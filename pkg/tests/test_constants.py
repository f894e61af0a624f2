import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from doq.constants import H_MAX, H_MIN, check_hurst, clamp_hurst, derive_constants, gamma_fn
from doq.errors import DegenerateHurstError, DomainError

# Reference values computed with mpmath at 30 digits, rounded to double.
GOLDEN = {
    0.61: (0.89922521234927455, 0.81334657360097727, 1.1055867714153903,
           0.88059852909899383, 0.07634461803851547, 0.00031660638615486493),
    0.7: (0.68953561299077633, 0.48194727071599787, 1.4307283283633454,
          0.7693652454801769, 0.1160252777575296, 0.15335496684492846),
    0.4: (0.91628137557248457, 0.84796479254174053, 1.0805653532217627,
          1.0900102246746153, 0.099489153951552062, 3.0590232050182579e-7),
    0.6: (0.91628137557248457, 0.8437892083704978, 1.0859126503193631,
          0.89218901001354569, 0.070699809149753557, 4.5399929762484852e-5),
}
FIELDS = ("a_h", "c_m", "c_psi", "big_c", "d_h", "delta_h")


@pytest.mark.parametrize("x, expected", [(1.0, 1.0), (0.5, math.sqrt(math.pi)), (4.0, 6.0)])
def test_gamma_known_values(x, expected):
    assert gamma_fn(x) == pytest.approx(expected, rel=1e-13)


def test_gamma_matches_stdlib_on_working_range():
    xs = np.concatenate([np.linspace(1e-3, 0.5, 200), np.linspace(0.5, 10.0, 800)])
    worst = max(abs(gamma_fn(x) / math.gamma(x) - 1.0) for x in xs)
    assert worst < 1e-12


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5, float("nan"), float("inf")])
def test_gamma_rejects_bad_arguments(x):
    with pytest.raises(DomainError):
        gamma_fn(x)


def test_half_gives_exact_limits():
    hc = derive_constants(0.5)
    assert (hc.a_h, hc.c_m, hc.c_psi, hc.big_c, hc.d_h, hc.delta_h) == (1.0, 1.0, 1.0, 1.0, 0.0, 0.0)


@pytest.mark.parametrize("h", sorted(GOLDEN))
def test_golden_constants(h):
    hc = derive_constants(h)
    for name, want in zip(FIELDS, GOLDEN[h]):
        assert getattr(hc, name) == pytest.approx(want, rel=1e-11), name


def test_diffusion_coefficient_identity_on_grid():
    for h in np.round(np.arange(1, 100) / 100.0, 2):
        hc = derive_constants(h)
        lhs = hc.big_c ** 2
        rhs = hc.c_psi ** 2 * hc.c_m * (2.0 - 2.0 * h)
        assert abs(lhs / rhs - 1.0) < 1e-12


def test_d_h_is_continuous_at_half():
    for h in (0.5 - 1e-8, 0.5 + 1e-8):
        assert derive_constants(h).d_h < 1e-6


def test_delta_in_unit_interval():
    for h in np.round(np.arange(1, 100) / 100.0, 2):
        assert 0.0 <= derive_constants(h).delta_h < 1.0


def test_delta_closed_form():
    # 1 / (2 B^2 c_M) simplifies to (1 - h) / (2h - 1)^2
    for h in (0.3, 0.45, 0.55, 0.7, 0.9):
        assert derive_constants(h).delta_h == pytest.approx(math.exp(-(1 - h) / (2 * h - 1) ** 2), rel=1e-12)


def _discrete_d_h(h: float, n: int) -> float:
    # q = s' Sigma^{-1} s with Sigma the fBm covariance on t_i = i/n and s_i = t_i;
    # the relative L2 error satisfies d^2 = 1 - 1/q in the limit
    s = np.arange(1, n + 1) / n
    a, b = np.meshgrid(s, s)
    cov = 0.5 * (a ** (2 * h) + b ** (2 * h) - np.abs(a - b) ** (2 * h))
    q = s @ np.linalg.solve(cov, s)
    return math.sqrt(1.0 - 1.0 / q)


@pytest.mark.parametrize("h", [0.7, 0.82])
def test_d_h_against_discrete_projection(h):
    # first-order convergence in n, so one Richardson step
    extrapolated = 2.0 * _discrete_d_h(h, 2000) - _discrete_d_h(h, 1000)
    assert derive_constants(h).d_h == pytest.approx(extrapolated, rel=1e-5)


def test_d_h_peak_exceeds_twelve_percent():
    # the advertised 12% ceiling does not hold near h = 0.82; see test_acceptance
    grid = np.round(np.arange(40, 100) / 100.0, 2)
    values = [derive_constants(h).d_h for h in grid]
    assert grid[int(np.argmax(values))] == pytest.approx(0.82)
    assert max(values) == pytest.approx(0.1364959800408, rel=1e-9)


@pytest.mark.parametrize("h", [0.0, 1.0, -0.2, 1.5, float("nan")])
def test_outside_unit_interval_is_domain_error(h):
    with pytest.raises(DomainError):
        derive_constants(h)


@pytest.mark.parametrize("h", [0.005, 0.995])
def test_degenerate_endpoints(h):
    with pytest.raises(DegenerateHurstError):
        check_hurst(h)


def test_clamp():
    assert clamp_hurst(1.3) == (H_MAX, True)
    assert clamp_hurst(-0.2) == (H_MIN, True)
    assert clamp_hurst(0.6) == (0.6, False)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=0.01, max_value=0.99))
def test_constants_finite_and_positive(h):
    hc = derive_constants(h)
    for name in FIELDS:
        value = getattr(hc, name)
        assert math.isfinite(value)
        assert value >= 0.0
    assert hc.a_h > 0 and hc.c_m > 0 and hc.c_psi > 0 and hc.big_c > 0
