"""Exact one-dimensional Brownian ruin probabilities.

The finite-horizon display in the source convention assumes the normalized
model (unit volatility, unit horizon).  The general-parameter entry point
first rescales through :func:`normalize`, which makes the finite- and
infinite-horizon exponents consistent (``exp(-2*c*u/sigma**2)``); this
reading is confirmed by the Monte Carlo engine in the test suite.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import DegenerateModelWarning, InvalidInput
from .numerics import std_normal_cdf


@dataclass(frozen=True)
class SinglePortfolio:
    """One insurance portfolio driven by Brownian motion.

    Reserve: ``u + c*t - sigma*W(t)``.  ``T`` may be ``inf`` for the
    infinite-horizon formula.
    """

    c: float
    sigma: float
    u: float
    T: float

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise InvalidInput(f"sigma must be positive, got {self.sigma}")
        if not self.T > 0.0:
            raise InvalidInput(f"T must be positive, got {self.T}")

    @property
    def infinite_horizon(self) -> bool:
        return math.isinf(self.T)


def normalize(c1: float, c2: float, sigma1: float, sigma2: float,
              u: float, v: float, T: float):
    """Rescale to unit horizon and unit volatilities.

    Returns ``(c1n, c2n, un, vn)`` such that the (simultaneous) ruin
    probability with the original parameters on ``[0, T]`` equals the one
    with the returned parameters on ``[0, 1]`` with unit volatilities.
    """
    if not (sigma1 > 0.0 and sigma2 > 0.0):
        raise InvalidInput("volatilities must be positive")
    if not (T > 0.0 and math.isfinite(T)):
        raise InvalidInput("normalization requires a finite positive horizon")
    st = math.sqrt(T)
    return (c1 * st / sigma1, c2 * st / sigma2,
            u / (sigma1 * st), v / (sigma2 * st))


def _ruin_finite_normalized(c: float, u: float) -> float:
    """Finite-horizon ruin probability with sigma = T = 1."""
    val = std_normal_cdf(-u - c) + math.exp(-2.0 * c * u) * std_normal_cdf(-u + c)
    if val < 0.0 or val > 1.0:
        if val < -1e-12 or val > 1.0 + 1e-12:
            raise InvalidInput(f"ruin probability {val} outside [0,1]")
        val = min(1.0, max(0.0, val))
    return val


def ruin_finite(p: SinglePortfolio) -> float:
    """Ruin probability of a single portfolio on a finite horizon."""
    if p.infinite_horizon:
        raise InvalidInput("use ruin_infinite for an infinite horizon")
    if p.u < 0.0:
        raise InvalidInput(f"initial capital must be >= 0, got {p.u}")
    cn, _, un, _ = normalize(p.c, 0.0, p.sigma, 1.0, p.u, 0.0, p.T)
    return _ruin_finite_normalized(cn, un)


def ruin_infinite(p: SinglePortfolio) -> float:
    """Infinite-horizon ruin probability ``exp(-2*c*u/sigma**2)``.

    With non-positive safety loading ruin is certain; the value 1 is
    returned with a :class:`DegenerateModelWarning` rather than silently.
    """
    if p.u < 0.0:
        raise InvalidInput(f"initial capital must be >= 0, got {p.u}")
    if p.c <= 0.0:
        warnings.warn(
            "non-positive premium rate: infinite-horizon ruin is certain",
            DegenerateModelWarning,
        )
        return 1.0
    return math.exp(-2.0 * p.c * p.u / (p.sigma * p.sigma))
