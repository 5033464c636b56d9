"""Two-dimensional Brownian risk model.

Sharp tail bounds, large-capital asymptotics of the simultaneous ruin
probability, the early-window upper bound, and the limiting law of the
rescaled conditional ruin time.  All parameters are in the normalized model
(unit volatilities, unit horizon); use :func:`ruin2d.single.normalize` first
for general parameters.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .errors import (
    InvalidInput,
    MissingConstant,
    RegimeBoundaryWarning,
    RegimeError,
)
from .numerics import (
    GaussianPair,
    bivariate_normal_pdf,
    bivariate_normal_tail,
    std_normal_cdf,
    std_normal_sf,
)
from .single import SinglePortfolio, ruin_finite

REGIME_BOUNDARY_EPS = 1e-9


@dataclass(frozen=True)
class BivariateBRM:
    """Normalized two-portfolio Brownian model on the unit horizon.

    Second capital is ``a * u`` unless an explicit ``v`` is passed to the
    bound queries.
    """

    c1: float
    c2: float
    rho: float
    a: float
    u: float

    def __post_init__(self):
        if not (-1.0 < self.rho < 1.0):
            raise InvalidInput(f"rho must lie in (-1, 1), got {self.rho}")
        if self.a > 1.0:
            raise InvalidInput(f"capital ratio must be <= 1, got {self.a}")

    @property
    def v(self) -> float:
        return self.a * self.u

    @property
    def pair(self) -> GaussianPair:
        return GaussianPair(self.rho)


class Regime(enum.Enum):
    ABOVE_RHO = "above_rho"
    BELOW_RHO = "below_rho"
    AT_RHO = "at_rho"


def classify_regime(a: float, rho: float) -> Regime:
    """Exact classification of the capital ratio against the correlation.

    Inputs within ``1e-9`` of the boundary (but not exactly on it) trigger a
    :class:`RegimeBoundaryWarning`: the two asymptotic branches have
    different powers of u and both degrade near ``a == rho``.
    """
    if a == rho:
        return Regime.AT_RHO
    if abs(a - rho) < REGIME_BOUNDARY_EPS:
        warnings.warn(
            "capital ratio is within 1e-9 of the correlation; both "
            "asymptotic branches degrade here",
            RegimeBoundaryWarning,
        )
    return Regime.ABOVE_RHO if a > rho else Regime.BELOW_RHO


def lambda_pair(a: float, rho: float):
    """Positive tilting exponents of the prefactor-constant integral.

    Only defined for ``a > rho``; satisfies ``l1 + rho*l2 == 1`` and
    ``l1 + a*l2 == q_exponent(a, rho)``.
    """
    if not (-1.0 < rho < 1.0):
        raise InvalidInput(f"rho must lie in (-1, 1), got {rho}")
    if a <= rho:
        raise RegimeError(
            f"lambda pair requires a > rho (got a={a}, rho={rho})"
        )
    omr2 = 1.0 - rho * rho
    return (1.0 - a * rho) / omr2, (a - rho) / omr2


def q_exponent(a: float, rho: float) -> float:
    """Gaussian decay exponent of the simultaneous ruin probability.

    Equals ``(1 - 2*a*rho + a**2) / (1 - rho**2)`` above the correlation
    and 1 at or below it; continuous across the boundary.
    """
    if not (-1.0 < rho < 1.0):
        raise InvalidInput(f"rho must lie in (-1, 1), got {rho}")
    if a <= rho:
        return 1.0
    return (1.0 - 2.0 * a * rho + a * a) / (1.0 - rho * rho)


def prop1_bounds(m: BivariateBRM, v: Optional[float] = None):
    """Sharp two-sided bounds for the simultaneous ruin probability.

    ``lower = P(W1(1) > u+c1, W2(1) > v+c2)`` and ``upper`` is the same
    tail divided by ``P(W1(1) > max(c1,0), W2(1) > max(c2,0))``, capped at 1.
    """
    if v is None:
        v = m.v
    if m.u <= 0.0 and v <= 0.0 and not (m.u == 0.0 and v == 0.0):
        raise InvalidInput(
            "bounds require (u, v) outside the negative quadrant"
        )
    pair = m.pair
    lower = bivariate_normal_tail(m.u + m.c1, v + m.c2, pair)
    denom = bivariate_normal_tail(max(m.c1, 0.0), max(m.c2, 0.0), pair)
    # the divisor can underflow for strongly negative correlation with large
    # drifts; 1 is always a valid (if useless) upper bound there
    upper = min(1.0, lower / denom) if denom > 0.0 else 1.0
    return lower, upper


def crude_upper_bound(m: BivariateBRM) -> float:
    """Minimum of the two exact marginal ruin probabilities."""
    p1 = ruin_finite(SinglePortfolio(c=m.c1, sigma=1.0, u=m.u, T=1.0))
    p2 = ruin_finite(SinglePortfolio(c=m.c2, sigma=1.0, u=m.v, T=1.0))
    return min(p1, p2)


def _phi_star(x: float, a: float, rho: float) -> float:
    """The boundary distribution factor: 1 below the correlation, the df of
    sqrt(1-rho^2) * W1(1) exactly at it."""
    if a < rho:
        return 1.0
    return std_normal_cdf(x / math.sqrt(1.0 - rho * rho))


def asym_approx(m: BivariateBRM, C_hat: Optional[float] = None) -> float:
    """Leading-order approximation of the simultaneous ruin probability.

    Above the correlation the prefactor constant estimate ``C_hat`` must be
    supplied (see :mod:`ruin2d.tail_constant`); at or below it the
    approximation is fully explicit.
    """
    regime = classify_regime(m.a, m.rho)
    pair = m.pair
    if regime is Regime.ABOVE_RHO:
        if C_hat is None:
            raise MissingConstant(
                "asymptotics above the correlation need an estimated constant"
            )
        return (C_hat / (m.u * m.u)
                * bivariate_normal_pdf(m.u + m.c1, m.v + m.c2, pair))
    omr2 = 1.0 - m.rho * m.rho
    factor = (2.0 * math.sqrt(2.0 * math.pi * omr2)
              * _phi_star(m.c1 * m.rho - m.c2, m.a, m.rho)
              * math.exp((m.c2 - m.rho * m.c1) ** 2 / (2.0 * omr2)))
    return (factor / m.u
            * bivariate_normal_pdf(m.u + m.c1, m.rho * m.u + m.c2, pair))


def tail_equivalent_form(m: BivariateBRM, C_hat: Optional[float] = None) -> float:
    """Asymptotically equivalent form written through the bivariate tail.

    Above the correlation: ``C_hat * l1 * l2 * P(W1(1) > u+c1, W2(1) > v+c2)``.
    At or below it: ``2 * Phi*(c1*rho - c2) * P(W1(1) > u+c1)``.
    """
    regime = classify_regime(m.a, m.rho)
    if regime is Regime.ABOVE_RHO:
        if C_hat is None:
            raise MissingConstant(
                "tail-equivalent form above the correlation needs a constant"
            )
        l1, l2 = lambda_pair(m.a, m.rho)
        return (C_hat * l1 * l2
                * bivariate_normal_tail(m.u + m.c1, m.v + m.c2, m.pair))
    return (2.0 * _phi_star(m.c1 * m.rho - m.c2, m.a, m.rho)
            * std_normal_sf(m.u + m.c1))


class EarlyWindowBound(NamedTuple):
    bound: float
    valid: bool


def early_window_bound(m: BivariateBRM, T_window: float) -> EarlyWindowBound:
    """Upper bound for ruin restricted to ``[0, 1 - T/u**2]``.

    The bound ``exp(-T/8) * upper`` (with ``upper`` the sharp tail bound
    numerator/denominator) holds for sufficiently large u; the ``valid``
    flag reports whether the proof's step inequalities already hold at the
    given u, rather than hiding the "sufficiently large" caveat.
    """
    if not T_window > 0.0:
        raise InvalidInput("window length must be positive")
    delta = 1.0 - T_window / (m.u * m.u)
    if delta <= 0.0:
        raise InvalidInput(
            f"window 1 - T/u^2 = {delta} is empty; decrease T or increase u"
        )
    pair = m.pair
    num = bivariate_normal_tail(m.u + m.c1, m.v + m.c2, pair)
    den = bivariate_normal_tail(max(m.c1, 0.0), max(m.c2, 0.0), pair)
    bound = math.exp(-T_window / 8.0) * num / den

    # Validity: nu*u + c/nu >= nubar*(u + c) for both coordinates, where
    # nu, nubar are the rescaling factors of the window and half-window.
    nu = delta ** -0.5
    half = 1.0 - 0.5 * T_window / (m.u * m.u)
    nubar = half ** -0.5
    ok1 = nu * m.u + m.c1 / nu >= nubar * (m.u + m.c1)
    ok2 = nu * m.v + m.c2 / nu >= nubar * (m.v + m.c2)
    return EarlyWindowBound(bound=min(bound, 1.0), valid=bool(ok1 and ok2))


def ruin_time_limit_cdf(x: float, a: float, rho: float) -> float:
    """Limiting df of ``u^2 * (1 - ruin time)`` conditioned on ruin.

    Exponential with rate ``q_exponent(a, rho) / 2``.
    """
    if x < 0.0:
        raise InvalidInput(f"x must be >= 0, got {x}")
    q = q_exponent(a, rho)
    return 1.0 - math.exp(-0.5 * q * x)
