"""Special functions and adaptive quadrature shared by all other modules.

Everything here is pure and reentrant.  The bivariate normal tail uses an
Owen's-T based evaluation for moderate arguments and switches to a
log-scaled conditional quadrature deep in the tail, where relative (not
just absolute) accuracy matters for the downstream asymptotic checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import integrate, special

from .errors import InvalidInput, NonConvergence

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and policies for 1-D adaptive integration.

    Attributes
    ----------
    abs_tol, rel_tol:
        Absolute / relative error targets; the integral is accepted when
        the error estimate is below ``max(abs_tol, rel_tol * |value|)``.
    max_subdivisions:
        Subdivision budget of the adaptive rule.
    truncation_tail_mass:
        Mass bound used when a semi-infinite domain is truncated through a
        caller-supplied envelope.  Must lie in ``(0, abs_tol]``.
    singularity_transform:
        ``"none"`` or ``"sqrt_endpoint"``.  The latter substitutes
        ``s = upper - w**2`` and is appropriate for integrands diverging
        like ``(upper - s)**-0.5`` at the upper endpoint.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 200
    truncation_tail_mass: float = 1e-12
    singularity_transform: str = "none"

    def __post_init__(self):
        if not (self.abs_tol > 0.0 and self.rel_tol > 0.0):
            raise InvalidInput("abs_tol and rel_tol must be positive")
        if self.max_subdivisions < 1:
            raise InvalidInput("max_subdivisions must be >= 1")
        if not (0.0 < self.truncation_tail_mass <= self.abs_tol):
            raise InvalidInput(
                "truncation_tail_mass must lie in (0, abs_tol]"
            )
        if self.singularity_transform not in ("none", "sqrt_endpoint"):
            raise InvalidInput(
                f"unknown singularity_transform {self.singularity_transform!r}"
            )


@dataclass(frozen=True)
class GaussianPair:
    """A correlated standard Gaussian pair with correlation in (-1, 1)."""

    rho: float

    def __post_init__(self):
        if not (-1.0 < self.rho < 1.0):
            raise InvalidInput(f"correlation must lie in (-1, 1), got {self.rho}")

    @property
    def rho_star(self) -> float:
        """sqrt(1 - rho**2), the conditional standard deviation."""
        return math.sqrt(1.0 - self.rho * self.rho)


def std_normal_cdf(x: float) -> float:
    """Standard normal distribution function."""
    return float(special.ndtr(x))


def std_normal_sf(x: float) -> float:
    """Standard normal tail 1 - Phi(x), accurate relatively in the far tail.

    Computed through the complementary error-function branch rather than by
    subtraction, so it keeps relative accuracy beyond x ~ 6.
    """
    return float(special.ndtr(-x))


def std_normal_pdf(x: float) -> float:
    """Standard normal density."""
    return math.exp(-0.5 * x * x) / _SQRT_2PI


def log_std_normal_sf(x: float) -> float:
    """log(1 - Phi(x)) without underflow."""
    return float(special.log_ndtr(-x))


def log_gamma(t: float) -> float:
    """ln Gamma(t) for t > 0."""
    if not t > 0.0:
        raise InvalidInput(f"log_gamma requires t > 0, got {t}")
    return float(special.gammaln(t))


def bivariate_normal_pdf(x: float, y: float, pair: GaussianPair) -> float:
    """Joint density of a standard Gaussian pair with correlation rho."""
    rho = pair.rho
    omr2 = 1.0 - rho * rho
    q = (x * x - 2.0 * rho * x * y + y * y) / (2.0 * omr2)
    return math.exp(-q) / (2.0 * math.pi * math.sqrt(omr2))


def log_bivariate_normal_pdf(x: float, y: float, pair: GaussianPair) -> float:
    """Log of :func:`bivariate_normal_pdf`, safe far in the tail."""
    rho = pair.rho
    omr2 = 1.0 - rho * rho
    q = (x * x - 2.0 * rho * x * y + y * y) / (2.0 * omr2)
    return -q - math.log(2.0 * math.pi) - 0.5 * math.log(omr2)


def _bvn_cdf_owen(h: float, k: float, rho: float) -> float:
    """P(X <= h, Y <= k) via Owen's T function; absolute error ~1e-14."""
    # The Owen decomposition is singular at h == 0 or k == 0; nudging by an
    # ulp-scale amount keeps the error far below the 1e-10 contract.
    if h == 0.0:
        h = 1e-15
    if k == 0.0:
        k = 1e-15
    rs = math.sqrt(1.0 - rho * rho)
    ah = (k - rho * h) / (h * rs)
    ak = (h - rho * k) / (k * rs)
    # compare signs directly: the product h*k underflows for subnormal
    # arguments and would misclassify same-sign pairs
    delta = 0.0 if (h > 0.0) == (k > 0.0) else 0.5
    val = (
        0.5 * (special.ndtr(h) + special.ndtr(k))
        - special.owens_t(h, ah)
        - special.owens_t(k, ak)
        - delta
    )
    return float(min(1.0, max(0.0, val)))


def _bvn_tail_cond_quad(h: float, k: float, rho: float) -> float:
    """P(X > h, Y > k) via conditioning on X, with log scaling.

    Requires max(h, k) >= 0 after the symmetric swap; keeps relative
    accuracy even when the result underflows towards 1e-300.
    """
    if k > h:
        h, k = k, h
    rs = math.sqrt(1.0 - rho * rho)

    def log_integrand(s):
        z = (k - rho * (h + s)) / rs
        return -h * s - 0.5 * s * s + special.log_ndtr(-z)

    # The factor exp(-h*s - s^2/2) confines the mass; solve h*s + s^2/2 = 80.
    s_max = -h + math.sqrt(h * h + 160.0)
    grid = np.linspace(0.0, s_max, 257)
    m = float(np.max(log_integrand(grid)))

    def integrand(s):
        return math.exp(log_integrand(s) - m)

    val, _ = integrate.quad(integrand, 0.0, s_max, epsabs=1e-14, epsrel=1e-11,
                            limit=200)
    log_result = -0.5 * h * h - _LOG_SQRT_2PI + m + math.log(val)
    return math.exp(log_result)


def bivariate_normal_tail(h: float, k: float, pair: GaussianPair) -> float:
    """P(W1 > h, W2 > k) for a standard Gaussian pair with correlation rho.

    Absolute error <= 1e-10 everywhere and relative accuracy deep in the
    joint tail (needed by the asymptotic cross-checks at large capital).
    """
    rho = pair.rho
    if rho == 0.0:
        return std_normal_sf(h) * std_normal_sf(k)
    if h <= 0.0 and k <= 0.0 and min(h, k) < 0.0:
        # Reduce to a tail with a nonnegative argument via central symmetry:
        # P(X>h, Y>k) = 1 - Phi(h) - Phi(k) + P(X>-h, Y>-k).
        comp = bivariate_normal_tail(-h, -k, pair)
        return min(1.0, max(0.0,
                            1.0 - std_normal_cdf(h) - std_normal_cdf(k) + comp))
    if max(h, k) < 3.0:
        return _bvn_cdf_owen(-h, -k, rho)
    return _bvn_tail_cond_quad(h, k, rho)


def _sqrt_endpoint_wrap(f: Callable[[float], float],
                        lower: float, upper: float):
    """Substitute s = upper - w**2 so an (upper-s)^-1/2 singularity vanishes."""
    w_hi = math.sqrt(upper - lower)

    def g(w):
        return 2.0 * w * f(upper - w * w)

    return g, 0.0, w_hi


def _truncate_semi_infinite(lower: float,
                            envelope_tail_mass: Callable[[float], float],
                            budget: float) -> float:
    """Find a cutoff where the caller's envelope tail mass drops below budget."""
    hi = max(lower + 1.0, 2.0 * abs(lower) + 1.0)
    for _ in range(200):
        if envelope_tail_mass(hi) <= budget:
            break
        hi *= 1.5
    else:
        raise NonConvergence("could not satisfy the truncation tail-mass budget")
    return hi


def integrate_1d(
    f: Callable[[float], float],
    lower: float,
    upper: float,
    spec: QuadratureSpec = QuadratureSpec(),
    envelope_tail_mass: Optional[Callable[[float], float]] = None,
) -> Tuple[float, float]:
    """Adaptive 1-D integration of ``f`` over ``[lower, upper]``.

    ``upper`` may be ``inf``; in that case an ``envelope_tail_mass``
    callable (mapping a cutoff to the integrable envelope's remaining tail
    mass) triggers truncation within the spec's tail-mass budget, otherwise
    the semi-infinite rule of the underlying adaptive integrator is used.

    Returns ``(value, err_est)`` and raises :class:`NonConvergence`
    (carrying the best value) if the subdivision budget is exhausted with
    the error estimate above tolerance.
    """
    if not lower < upper:
        raise InvalidInput(f"empty or inverted interval [{lower}, {upper}]")
    a, b = lower, upper
    g = f
    if math.isinf(b):
        if spec.singularity_transform == "sqrt_endpoint":
            raise InvalidInput("sqrt_endpoint requires a finite upper endpoint")
        if envelope_tail_mass is not None:
            b = _truncate_semi_infinite(a, envelope_tail_mass,
                                        spec.truncation_tail_mass)
    elif spec.singularity_transform == "sqrt_endpoint":
        g, a, b = _sqrt_endpoint_wrap(f, a, b)

    value, err, *rest = integrate.quad(
        g, a, b,
        epsabs=spec.abs_tol, epsrel=spec.rel_tol,
        limit=spec.max_subdivisions, full_output=1,
    )
    ier = 0
    if rest and isinstance(rest[-1], str):
        # quad appends an explanation message on failure
        info = rest[0]
        ier = 1
    tol = max(spec.abs_tol, spec.rel_tol * abs(value))
    if ier and err > tol:
        raise NonConvergence(
            f"quadrature failed to converge (err_est={err:.3g} > tol={tol:.3g})",
            value=value, err_est=err,
        )
    return float(value), float(err)
