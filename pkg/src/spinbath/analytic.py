"""
Closed-form and semi-analytic decoherence factors.

All formulas carry V explicitly; at V = 1 they reduce to the dimensionless forms.
The model-2 results are built on the full-period mode average

    M(x) = (1/2pi) int_{-pi}^{pi} sin^2(x cos k) / cos^2 k dk = x^2 1F2(1/2; 3/2, 2; -x^2),

evaluated three ways: extended-precision series (with an asymptotic tail), adaptive
quadrature, and the Bessel closed form M(x) = x int_0^{2x} J0 - x J1(2x).
"""
import logging
import math
from typing import Optional

import mpmath
import numpy as np
from scipy import integrate, special

from .core import ArrayLike, ConfigError, NumericalError, scalar_or_array
from .schema import Hyp1F2Result, SeriesMethod

logger = logging.getLogger("spinbath")

X_SWITCH = 30.0
SERIES_RTOL = 1e-14
MAX_SERIES_TERMS = 500

BAND_AVERAGE_METHODS = ("series", "quadrature", "bessel")

_ROOT_PI = math.sqrt(math.pi)


def _require_positive_v(V: float) -> None:
    if not V > 0.0:
        raise ConfigError(f"V must be positive, got {V!r}")


def kappa_model1_exact(J: float, V: float, t: ArrayLike) -> ArrayLike:
    """Open-chain model 1: only bath spin 0 and 1 matter, Omega = sqrt(V^2 + J^2)."""
    _require_positive_v(V)
    t = np.asarray(t, dtype=float)
    omega2 = V * V + J * J
    return scalar_or_array(1.0 - 2.0 * J * J * np.sin(np.sqrt(omega2) * t) ** 2 / omega2)


def kappa_model1_ring(J: float, V: float, t: ArrayLike) -> ArrayLike:
    """
    Model 1 on a ring (N >= 3): bath spin 0 has two neighbours whose sigma^z sum to
    s/V in {-2, 0, 2} with weights 1/4, 1/2, 1/4.
    """
    _require_positive_v(V)
    t = np.asarray(t, dtype=float)
    if J == 0.0:
        return scalar_or_array(np.ones(t.shape))

    def two_level(s: float) -> np.ndarray:
        omega2 = J * J + s * s
        return 1.0 - 2.0 * J * J * np.sin(np.sqrt(omega2) * t) ** 2 / omega2

    return scalar_or_array(0.25 * two_level(2.0 * V) + 0.5 * two_level(0.0) + 0.25 * two_level(-2.0 * V))


def kappa_model1_limit(J: float, V: float, t: ArrayLike) -> ArrayLike:
    _require_positive_v(V)
    t = np.asarray(t, dtype=float)
    return scalar_or_array(np.exp(-2.0 * J * J * np.sin(V * t) ** 2 / (V * V)))


def kappa_model1_adiabatic(J0: float, V: float) -> float:
    """Plateau left by an adiabatic switch-off of the two-spin model-1 problem."""
    _require_positive_v(V)
    return V / math.sqrt(V * V + J0 * J0)


def kappa_model2_finiteN(J: float, V: float, t: ArrayLike, N: int) -> ArrayLike:
    """
    Large-N reduced product over the uniform grid k_n = 2 pi n / N.

    sin^2(V t cos k) / (V cos k)^2 is written as t^2 sinc^2, so modes at cos k = 0 take the
    limit value and contribute 2 J^2 t^2 / N to the exponent.
    """
    _require_positive_v(V)
    if N < 2:
        raise ConfigError(f"N must be at least 2, got {N}")
    t = np.asarray(t, dtype=float)
    cosines = np.cos(2.0 * np.pi * np.arange(N) / N)
    shape = t.shape
    flat = t.reshape(-1, 1)
    per_mode = flat ** 2 * np.sinc(V * flat * cosines / np.pi) ** 2
    exponent = 2.0 * J * J / N * per_mode.sum(axis=1)
    return scalar_or_array(np.exp(-exponent).reshape(shape))


def _series(x: float) -> Optional[Hyp1F2Result]:
    # alternating terms peak near e^{2x}, so carry that many extra digits
    digits = 25 + int(math.ceil(2.0 * x / math.log(10.0)))
    # private context; the global mpmath precision is never touched
    ctx = mpmath.MPContext()
    ctx.dps = digits
    z = -ctx.mpf(x) ** 2
    half = ctx.mpf(1) / 2
    term = ctx.mpf(1)
    total = ctx.mpf(1)
    m = 0
    while True:
        term *= z * (m + half) / ((m + 3 * half) * (m + 2) * (m + 1))
        m += 1
        total += term
        if abs(term) < SERIES_RTOL * abs(total) and m > x:
            break
        if m >= MAX_SERIES_TERMS:
            return None
    value = float(total)
    last = float(abs(term))
    return Hyp1F2Result(value=value, method=SeriesMethod.SERIES,
                        est_error=last + 2.0 * np.finfo(float).eps * abs(value), terms=m)


def _asymptotic(x: float) -> Hyp1F2Result:
    if x < 1.0:
        raise ConfigError(f"asymptotic 1F2 expansion needs x >= 1, got {x!r}")
    phase = 2.0 * x - math.pi / 4.0
    c, s = math.cos(phase), math.sin(phase)
    last = 345.0 / 1024.0 / (_ROOT_PI * x ** 2.5)
    average = (x
               - 0.5 * c / (_ROOT_PI * math.sqrt(x))
               - 9.0 / 32.0 * s / (_ROOT_PI * x ** 1.5)
               + last * c)
    return Hyp1F2Result(value=average / (x * x), method=SeriesMethod.ASYMPTOTIC,
                        est_error=last / (x * x), terms=4)


def hyp1f2_special(x: float, method: Optional[SeriesMethod] = None) -> Hyp1F2Result:
    """
    1F2(1/2; 3/2, 2; -x^2).

    Args:
        x: argument, x = V t >= 0.
        method: force SERIES or ASYMPTOTIC; by default the series is used up to X_SWITCH.
    """
    if not (x >= 0.0 and math.isfinite(x)):
        raise ConfigError(f"1F2 argument must be finite and non-negative, got {x!r}")
    chosen = method or (SeriesMethod.SERIES if x <= X_SWITCH else SeriesMethod.ASYMPTOTIC)
    if chosen is SeriesMethod.SERIES:
        result = _series(x)
        if result is not None:
            return result
        logger.warning(f"1F2 series did not settle within {MAX_SERIES_TERMS} terms at x={x!r}; "
                       f"using the asymptotic expansion")
    return _asymptotic(x)


def _band_average_quadrature(x: float, tolerance: float) -> float:
    if x == 0.0:
        return 0.0
    # sin^2(x cos k)/cos^2 k = x^2 sinc^2, finite at cos k = 0
    def integrand(k: float) -> float:
        return x * x * np.sinc(x * math.cos(k) / math.pi) ** 2

    # integrand is even about 0 and pi/2, so a quarter period carries the full mean
    panels = max(4, math.ceil(x))
    edges = np.linspace(0.0, math.pi / 2.0, panels + 1)
    panel_tol = tolerance / panels
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        value, abserr = integrate.quad(integrand, a, b, epsabs=panel_tol, epsrel=1e-12, limit=200)
        if abserr > 10.0 * max(panel_tol, 1e-12 * abs(value)):
            raise NumericalError(f"quadrature on [{a:.6g}, {b:.6g}] did not converge at x={x!r} "
                                 f"(error estimate {abserr:.3g})")
        total += value
    logger.debug(f"band average quadrature at x={x!r}: {panels} panels")
    return 2.0 / math.pi * total


def _integral_j0(z: float) -> float:
    """int_0^z J0, through the Struve functions H0 and H1."""
    j0, j1 = special.j0(z), special.j1(z)
    return z * j0 + 0.5 * math.pi * z * (j1 * special.struve(0, z) - j0 * special.struve(1, z))


def band_average(x: float, method: str = "series", quad_tolerance: float = 1e-11) -> float:
    """M(x), the full-period mean of sin^2(x cos k)/cos^2 k."""
    if x < 0.0:
        raise ConfigError(f"band average needs x >= 0, got {x!r}")
    if method == "series":
        return x * x * hyp1f2_special(x).value
    if method == "quadrature":
        return _band_average_quadrature(x, quad_tolerance)
    if method == "bessel":
        return float(x * _integral_j0(2.0 * x) - x * special.j1(2.0 * x))
    raise ConfigError(f"Unknown band-average method: '{method}'. Available: {list(BAND_AVERAGE_METHODS)}")


def _band_averages(x: np.ndarray, method: str, quad_tolerance: float) -> np.ndarray:
    flat = [band_average(float(xi), method, quad_tolerance) for xi in x.reshape(-1)]
    return np.array(flat, dtype=float).reshape(x.shape)


def kappa_model2_integral(J: float, V: float, t: ArrayLike,
                          method: str = "series", quad_tolerance: float = 1e-11) -> ArrayLike:
    """N -> infinity model-2 factor exp(-2 J^2 t^2 1F2(1/2; 3/2, 2; -V^2 t^2))."""
    _require_positive_v(V)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ConfigError("kappa_model2_integral is defined for t >= 0")
    if J == 0.0:
        return scalar_or_array(np.ones(t.shape))
    averages = _band_averages(V * t, method, quad_tolerance)
    return scalar_or_array(np.exp(-2.0 * J * J * averages / (V * V)))


def kappa_model2_edge_integral(J: float, V: float, t: ArrayLike,
                               method: str = "series", quad_tolerance: float = 1e-11) -> ArrayLike:
    """
    N -> infinity limit for a qubit on the end spin of an open XX chain.

    The end spin weights mode theta with 2 sin^2(theta), which turns the mode average into
    2 M(x) - 1 + J0(2x) and doubles the long-time decay rate.
    """
    _require_positive_v(V)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ConfigError("kappa_model2_edge_integral is defined for t >= 0")
    if J == 0.0:
        return scalar_or_array(np.ones(t.shape))
    x = V * t
    averages = _band_averages(x, method, quad_tolerance)
    weighted = 2.0 * averages - 1.0 + special.j0(2.0 * x)
    return scalar_or_array(np.exp(-2.0 * J * J * weighted / (V * V)))


def model2_decay_rate(J: float, V: float) -> float:
    """Long-time rate: ln kappa_model2_integral ~ -rate * t."""
    _require_positive_v(V)
    return 2.0 * J * J / V
