"""Hurst-dependent constants of the Dobric-Ojeda construction.

Every scalar here is a closed-form function of the Hurst index ``h`` alone.
The construction pairs the fractional field components ``H`` and ``H' = 1 - H``;
only that case is supported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from doq.errors import DegenerateHurstError, DomainError

H_MIN = 0.01
H_MAX = 0.99

# Lanczos approximation, g = 7, nine terms (relative error ~1e-15 on x >= 0.5).
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def gamma_fn(x: float) -> float:
    """Gamma function for real ``x > 0``.

    Uses a Lanczos series; arguments below 1/2 are shifted up with
    ``Gamma(x) = Gamma(x + 1) / x`` so the series is only ever evaluated on
    ``[1/2, inf)``.

    Raises
    ------
    DomainError
        If ``x <= 0`` or ``x`` is not finite.
    """
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"gamma_fn requires a finite x > 0, got {x!r}")
    if x < 0.5:
        return gamma_fn(x + 1.0) / x
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _SQRT_2PI * math.exp((z + 0.5) * math.log(t) - t) * acc


@dataclass(frozen=True)
class HurstConstants:
    """All deterministic constants derived from a Hurst index.

    Attributes
    ----------
    h : Hurst index.
    a_h : covariance constant of the fractional field for ``H + H' = 1``.
    c_m : ``E[M_H(t)^2] = c_m * t**(2 - 2h)``.
    c_psi : ``Psi_H(t) = c_psi * t**(2h - 1)``.
    big_c : diffusion coefficient, ``c_psi * sqrt(c_m * (2 - 2h))``.
    d_h : relative L2 distance between the DO process and fBm.
    delta_h : admissibility factor; the drift cut-on time must exceed
        ``delta_h * T``.
    """

    h: float
    a_h: float
    c_m: float
    c_psi: float
    big_c: float
    d_h: float
    delta_h: float

    @property
    def martingale_scale(self) -> float:
        """``sqrt(c_m * (2 - 2h))``, the ``dM = scale * t**(1/2-h) dW`` factor."""
        return math.sqrt(self.c_m * (2.0 - 2.0 * self.h))

    @property
    def drift_b(self) -> float:
        """Coefficient ``B = c_psi (2h - 1) / C`` of the Girsanov kernel."""
        return self.c_psi * (2.0 * self.h - 1.0) / self.big_c


def check_hurst(h: float) -> float:
    """Validate ``h`` against the open unit interval and the clamp band."""
    h = float(h)
    if not math.isfinite(h) or not 0.0 < h < 1.0:
        raise DomainError(f"Hurst index must lie in (0, 1), got {h!r}")
    if h < H_MIN or h > H_MAX:
        raise DegenerateHurstError(
            f"Hurst index {h!r} is within the degenerate band of an endpoint; "
            f"supported range is [{H_MIN}, {H_MAX}]"
        )
    return h


def clamp_hurst(h: float) -> tuple[float, bool]:
    """Clip ``h`` to ``[H_MIN, H_MAX]``; return ``(value, was_clamped)``."""
    if not math.isfinite(h):
        return (H_MIN if h < 0 else H_MAX), True
    clipped = min(max(h, H_MIN), H_MAX)
    return clipped, clipped != h


def derive_constants(h: float) -> HurstConstants:
    """Compute every Hurst-dependent constant for ``h``.

    ``h = 0.5`` short-circuits to the Brownian limits (all ones, ``d_h = 0``,
    ``delta_h = 0``) without touching the Gamma function, so downstream
    formulas collapse bit-for-bit onto their Black-Scholes counterparts.
    """
    h = check_hurst(h)
    if h == 0.5:
        return HurstConstants(h=0.5, a_h=1.0, c_m=1.0, c_psi=1.0, big_c=1.0, d_h=0.0, delta_h=0.0)

    g_2h1 = gamma_fn(2.0 * h + 1.0)
    g_3m2h = gamma_fn(3.0 - 2.0 * h)
    g_hp = gamma_fn(h + 0.5)
    g_hm = gamma_fn(1.5 - h)

    a_h = math.sqrt(g_2h1 * g_3m2h) * math.sin(math.pi * h) ** 2
    c_m = a_h * a_h * g_hm / (2.0 * h * g_hp * g_3m2h)
    c_psi = 2.0 * h * g_3m2h * g_hp / (a_h * g_hm)
    big_c = c_psi * math.sqrt(c_m * (2.0 - 2.0 * h))

    # Rounding can push 1 - (~1) just below zero near h = 1/2.
    d_sq = 1.0 - 2.0 * h * g_hp * g_3m2h / g_hm
    d_h = math.sqrt(max(d_sq, 0.0))

    b = c_psi * (2.0 * h - 1.0) / big_c
    b2cm = b * b * c_m
    delta_h = math.exp(-1.0 / (2.0 * b2cm)) if b2cm > 0.0 else 0.0

    return HurstConstants(h=h, a_h=a_h, c_m=c_m, c_psi=c_psi, big_c=big_c, d_h=d_h, delta_h=delta_h)
