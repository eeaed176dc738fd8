"""Special functions used by the harness: log-gamma, the truncated exponential
series Phi_p and a quadrature oracle for the logarithmic moment integral."""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

# Bernoulli-number coefficients B_{2k} / (2k (2k-1)) of the Stirling series
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_SHIFT = 16.0

PHI_REL_TOL = 1e-15
PHI_MAX_TERMS = 512


def log_gamma(x: float) -> float:
    """``log Γ(x)`` for ``x > 0`` from the asymptotic Stirling series.

    Small arguments are shifted past ``_SHIFT`` with ``Γ(x+1) = x Γ(x)`` so the
    truncated series is accurate to about machine precision.
    """
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise ValueError(f"log_gamma needs a finite positive argument, got {x!r}")
    shift = 0.0
    while x < _SHIFT:
        shift += math.log(x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    power = inv
    for c in _STIRLING:
        series += c * power
        power *= inv2
    return (x - 0.5) * math.log(x) - x + _HALF_LOG_2PI + series - shift


def gamma_root_ratio(q: float) -> float:
    """``Γ(q+1)^{1/q} / q``, which tends to ``1/e``."""
    return math.exp(log_gamma(q + 1.0) / q) / q


def log_moment_quadrature(t: float, q: float) -> float:
    """``∫_0^t log(t/s)^q ds`` by adaptive quadrature (substituting ``s = t u``)."""

    def integrand(u: float) -> float:
        return (-math.log(u)) ** q if u > 0 else 0.0

    # the integrand is singular at 0 for q > 0; split at 1e-8 to help QUADPACK
    head, _ = integrate.quad(integrand, 0.0, 1e-8, limit=200)
    body, _ = integrate.quad(integrand, 1e-8, 1.0, limit=200, epsabs=0.0, epsrel=1e-12)
    return t * (head + body)


def log_moment_closed(t: float, q: float) -> float:
    return t * math.exp(log_gamma(q + 1.0))


def phi_series(p: int, x: np.ndarray) -> tuple[np.ndarray, int]:
    """``Φ_p(x) = Σ_{j≥p} x^j/j!`` summed term by term.

    Stops once every new term is below ``PHI_REL_TOL`` times its partial sum,
    or after ``PHI_MAX_TERMS`` terms.  Returns the sums and the terms used.
    """
    p = _integer_order(p)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("Φ_p is evaluated at non-negative arguments only")
    # first term x^p / p! in log space, then the ratio x / (j+1)
    with np.errstate(divide="ignore"):
        logx = np.log(x)
    term = np.where(x > 0, np.exp(p * logx - math.lgamma(p + 1.0)), 0.0)
    total = term.copy()
    used = 1
    j = p
    while used < PHI_MAX_TERMS:
        j += 1
        term = term * x / j
        total = total + term
        used += 1
        if np.all(term <= PHI_REL_TOL * total):
            break
    return total, used


def _integer_order(p) -> int:
    if isinstance(p, bool) or float(p) != int(p) or int(p) < 1:
        raise ValueError(
            f"Φ_p sums x^j/j! from j = p, so p must be a positive integer (got {p!r})"
        )
    return int(p)


def gamma_ratio_term(j: int) -> float:
    """``γ_{j+1}/γ_j`` for ``γ_j = j^j / j!``, i.e. ``(1 + 1/j)^j``."""
    return math.exp(j * math.log1p(1.0 / j))


def elementary_power_mean(a: np.ndarray, b: np.ndarray, q: float) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of ``A^{1/q} + B^{1/q} <= 2^{1-1/q} (A + B)^{1/q}`` for ``q >= 1``."""
    lhs = a ** (1.0 / q) + b ** (1.0 / q)
    rhs = 2.0 ** (1.0 - 1.0 / q) * (a + b) ** (1.0 / q)
    return lhs, rhs
