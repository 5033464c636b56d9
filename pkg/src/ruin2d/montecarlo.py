"""Monte Carlo oracles for the closed-form, bound and asymptotic modules.

Paths are simulated in fixed-size blocks; each block owns a counter-based
(Philox) stream keyed by ``(seed, block_index)``, and block size is a pure
function of the configuration, so results are bit-identical for any worker
count.  Merging is a sum of per-block partials in block order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .bivariate import BivariateBRM
from .errors import DegenerateIS, EmptySample, InvalidInput
from .single import SinglePortfolio

_BLOCK_ELEMS = 1 << 22  # floats per per-block array; keeps blocks ~32 MB


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo configuration.

    ``is_drift`` is an optional tilt for the *independent* driving pair;
    when set, estimates are reweighted by the exact Gaussian likelihood
    ratio.  ``window_end`` restricts the simulated horizon (used by the
    early-window bound checks).
    """

    n_paths: int
    n_steps: int
    seed: int
    workers: int = 1
    is_drift: Optional[Tuple[float, float]] = None
    window_end: float = 1.0

    def __post_init__(self):
        if self.n_paths < 1:
            raise InvalidInput("n_paths must be positive")
        if self.n_steps < 2:
            raise InvalidInput("n_steps must be >= 2")
        if self.workers < 1:
            raise InvalidInput("workers must be positive")
        if not (0.0 < self.window_end <= 1.0):
            raise InvalidInput("window_end must lie in (0, 1]")


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo value with its statistical error."""

    value: float
    stderr: float
    ci_low: float
    ci_high: float
    n_effective: float
    method: str
    coarse_value: Optional[float] = None  # same paths on the half-rate grid


@dataclass(frozen=True)
class RuinTimeSample:
    """Weighted sample of ``u^2 * (window_end - ruin_time)`` given ruin."""

    values: np.ndarray
    weights: np.ndarray
    u: float
    method: str


def block_size(n_steps: int) -> int:
    """Paths per block; depends only on the step count, never on workers."""
    return max(16, _BLOCK_ELEMS // n_steps)


def stream(seed: int, block_index: int) -> np.random.Generator:
    """Counter-based stream for one path block."""
    key = (int(seed) % (1 << 64)) << 64 | int(block_index)
    return np.random.Generator(np.random.Philox(key=key))


def _run_blocks(n_paths: int, n_steps: int, workers: int,
                worker: Callable[[int, int], tuple]) -> list:
    """Run ``worker(block_index, paths_in_block)`` over all blocks.

    Results are returned in block order regardless of scheduling, keeping
    the merged estimate deterministic.
    """
    bs = block_size(n_steps)
    blocks = [(i, min(bs, n_paths - i * bs))
              for i in range((n_paths + bs - 1) // bs)]
    if workers == 1:
        return [worker(i, m) for i, m in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futs = [pool.submit(worker, i, m) for i, m in blocks]
        return [f.result() for f in futs]


def _pooled_estimate(n: int, s_w: float, s_w2: float,
                     sum_all_w: float, sum_all_w2: float,
                     method: str, coarse_value: Optional[float] = None,
                     min_n_eff: float = 100.0) -> Estimate:
    value = s_w / n
    var = max(0.0, s_w2 / n - value * value)
    stderr = math.sqrt(var / n)
    n_eff = sum_all_w ** 2 / sum_all_w2 if sum_all_w2 > 0.0 else 0.0
    if n_eff < min_n_eff:
        raise DegenerateIS(
            f"effective sample size {n_eff:.1f} < {min_n_eff:g}; "
            "adjust the importance-sampling tilt or increase n_paths"
        )
    return Estimate(
        value=value, stderr=stderr,
        ci_low=value - 1.96 * stderr, ci_high=value + 1.96 * stderr,
        n_effective=n_eff, method=method, coarse_value=coarse_value,
    )


def default_tilt(m: BivariateBRM, v: Optional[float] = None,
                 window_end: float = 1.0) -> Tuple[float, float]:
    """Tilt making the driving pair's endpoint mean hit the ruin corner.

    Solves for a drift of the independent pair such that the portfolio
    coordinates have mean ``(u + c1*w, v + c2*w)`` at the window end ``w``
    (the conditional ruin mass concentrates at the endpoint).
    """
    if v is None:
        v = m.v
    w = window_end
    m1 = (m.u + m.c1 * w) / w
    m2 = (v + m.c2 * w) / w
    rs = math.sqrt(1.0 - m.rho * m.rho)
    return (m1, (m2 - m.rho * m1) / rs)


def simulate_psi(m: BivariateBRM, cfg: SimConfig,
                 v: Optional[float] = None) -> Estimate:
    """Estimate of the simultaneous ruin probability on the discrete grid.

    With ``cfg.is_drift`` set, the estimator is the unbiased
    importance-sampling reweighting of the tilted paths.  The same paths on
    the half-rate grid are reported in ``coarse_value`` as a discretization
    bias diagnostic.
    """
    if v is None:
        v = m.v
    w = cfg.window_end
    n_steps = cfg.n_steps
    dt = w / n_steps
    t = np.linspace(0.0, w, n_steps + 1)
    theta = cfg.is_drift
    rho, rs = m.rho, math.sqrt(1.0 - m.rho * m.rho)
    b1_barrier = m.u + m.c1 * t
    b2_barrier = v + m.c2 * t

    def worker(block_index, paths):
        rng = stream(cfg.seed, block_index)
        z1 = rng.standard_normal((paths, n_steps))
        z2 = rng.standard_normal((paths, n_steps))
        sdt = math.sqrt(dt)
        d1 = z1 * sdt
        d2 = z2 * sdt
        if theta is not None:
            d1 += theta[0] * dt
            d2 += theta[1] * dt
        b1 = np.empty((paths, n_steps + 1))
        b2 = np.empty((paths, n_steps + 1))
        b1[:, 0] = 0.0
        b2[:, 0] = 0.0
        np.cumsum(d1, axis=1, out=b1[:, 1:])
        np.cumsum(d2, axis=1, out=b2[:, 1:])
        w1 = b1
        w2 = rho * b1 + rs * b2
        hit = (w1 > b1_barrier) & (w2 > b2_barrier)
        ind = hit.any(axis=1)
        ind_coarse = hit[:, ::2].any(axis=1)
        if theta is not None:
            lw = (-theta[0] * b1[:, -1] - theta[1] * b2[:, -1]
                  + 0.5 * (theta[0] ** 2 + theta[1] ** 2) * w)
            wt = np.exp(lw)
        else:
            wt = np.ones(paths)
        wi = wt * ind
        return (float(wi.sum()), float((wi * wi).sum()),
                float((wt * ind_coarse).sum()))

    parts = _run_blocks(cfg.n_paths, n_steps, cfg.workers, worker)
    s_w, s_w2, s_wc = (sum(p[i] for p in parts) for i in range(3))
    tag = "is-grid-sup" if theta is not None else "grid-sup"
    # the effective-size gate watches the contributing (ruined) weights:
    # a rare-event tilt leaves most raw weights near zero by design, which
    # says nothing about the quality of the weighted hit sum
    return _pooled_estimate(cfg.n_paths, s_w, s_w2, s_w, s_w2,
                            method=f"{tag}(steps={n_steps})",
                            coarse_value=s_wc / cfg.n_paths,
                            min_n_eff=100.0 if theta is not None else 0.0)


def simulate_one_dim(p: SinglePortfolio, cfg: SimConfig,
                     bridge: bool = True) -> Estimate:
    """One-dimensional ruin estimate with Brownian-bridge crossing correction.

    Between grid points the exact bridge crossing probability
    ``exp(-2*(u-a)*(u-b)/(sigma^2*dt))`` is sampled, removing first-order
    discretization bias; with ``bridge=False`` the raw grid-sup estimate on
    the same paths is returned.
    """
    if p.infinite_horizon:
        raise InvalidInput("simulation requires a finite horizon")
    n_steps = cfg.n_steps
    dt = p.T / n_steps
    t = np.linspace(0.0, p.T, n_steps + 1)
    drift = -p.c * t

    def worker(block_index, paths):
        rng = stream(cfg.seed, block_index)
        z = rng.standard_normal((paths, n_steps))
        x = np.empty((paths, n_steps + 1))
        x[:, 0] = 0.0
        np.cumsum(z * (p.sigma * math.sqrt(dt)), axis=1, out=x[:, 1:])
        x += drift
        if bridge:
            uu = rng.random((paths, n_steps))
            a = p.u - x[:, :-1]
            b = p.u - x[:, 1:]
            with np.errstate(over="ignore"):
                p_cross = np.exp(-2.0 * a * b / (p.sigma ** 2 * dt))
            hit = (a <= 0.0) | (b <= 0.0) | (uu < p_cross)
            ind = hit.any(axis=1)
        else:
            ind = (x > p.u).any(axis=1)
        k = int(ind.sum())
        return (float(k), float(k), float(paths), float(paths))

    parts = _run_blocks(cfg.n_paths, n_steps, cfg.workers, worker)
    s_w, s_w2, s_all, s_all2 = (sum(q[i] for q in parts) for i in range(4))
    tag = "bridge-mc" if bridge else "grid-sup-1d"
    return _pooled_estimate(cfg.n_paths, s_w, s_w2, s_all, s_all2,
                            method=f"{tag}(steps={n_steps})")


def simulate_levy_psi(model, barrier, cfg: SimConfig) -> Estimate:
    """Same-path two-barrier ruin estimate for a one-sided Levy model.

    ``model`` must expose ``sample_increments(rng, shape, dt)`` with exact
    increment laws (see :mod:`ruin2d.levy`).  Grid-sup estimator; the
    half-rate grid value is reported as the bias diagnostic.
    """
    return simulate_levy_psi_many(model, [barrier], cfg)[0]


def simulate_levy_psi_many(model, barriers, cfg: SimConfig) -> list:
    """Grid-sup estimates for several barrier geometries on shared paths.

    Path generation dominates the cost for jump models, so evaluating a
    batch of barriers against one set of paths is nearly as cheap as a
    single estimate.  The barriers do not influence the draws, hence each
    entry equals what a separate :func:`simulate_levy_psi` call with the
    same config would return.  All barriers must share one horizon.
    """
    barriers = list(barriers)
    T = barriers[0].T
    if any(b.T != T for b in barriers):
        raise InvalidInput("shared-path barriers must have a common horizon")
    n_steps = cfg.n_steps
    dt = T / n_steps
    t = np.linspace(0.0, T, n_steps + 1)
    lines = [(b.x + b.c1 * t, b.y + b.c2 * t) for b in barriers]

    def worker(block_index, paths):
        rng = stream(cfg.seed, block_index)
        d = model.sample_increments(rng, (paths, n_steps), dt)
        z = np.empty((paths, n_steps + 1))
        z[:, 0] = 0.0
        np.cumsum(d, axis=1, out=z[:, 1:])
        out = []
        for bx, by in lines:
            hit = (z > bx) & (z > by)
            ind = hit.any(axis=1)
            ind_c = hit[:, ::2].any(axis=1)
            k = int(ind.sum())
            out.append((float(k), float(k), float(ind_c.sum()),
                        float(paths), float(paths)))
        return out

    parts = _run_blocks(cfg.n_paths, n_steps, cfg.workers, worker)
    results = []
    for j in range(len(barriers)):
        s_w, s_w2, s_wc, s_all, s_all2 = (sum(q[j][i] for q in parts)
                                          for i in range(5))
        results.append(_pooled_estimate(
            cfg.n_paths, s_w, s_w2, s_all, s_all2,
            method=f"levy-grid-sup(steps={n_steps})",
            coarse_value=s_wc / cfg.n_paths))
    return results


def sample_ruin_time(m: BivariateBRM, cfg: SimConfig,
                     min_effective: float = 1e3) -> RuinTimeSample:
    """Weighted sample of the rescaled conditional ruin time.

    Ruin time is the first grid time with both barrier clearances positive;
    returned values are ``u^2 * (window_end - tau)`` with the
    importance-sampling weights of the ruined paths.
    """
    w = cfg.window_end
    n_steps = cfg.n_steps
    dt = w / n_steps
    t = np.linspace(0.0, w, n_steps + 1)
    theta = cfg.is_drift
    rho, rs = m.rho, math.sqrt(1.0 - m.rho * m.rho)
    b1_barrier = m.u + m.c1 * t
    b2_barrier = m.v + m.c2 * t

    def worker(block_index, paths):
        rng = stream(cfg.seed, block_index)
        z1 = rng.standard_normal((paths, n_steps))
        z2 = rng.standard_normal((paths, n_steps))
        sdt = math.sqrt(dt)
        d1 = z1 * sdt
        d2 = z2 * sdt
        if theta is not None:
            d1 += theta[0] * dt
            d2 += theta[1] * dt
        b1 = np.empty((paths, n_steps + 1))
        b2 = np.empty((paths, n_steps + 1))
        b1[:, 0] = 0.0
        b2[:, 0] = 0.0
        np.cumsum(d1, axis=1, out=b1[:, 1:])
        np.cumsum(d2, axis=1, out=b2[:, 1:])
        hit = (b1 > b1_barrier) & ((rho * b1 + rs * b2) > b2_barrier)
        ruined = hit.any(axis=1)
        first = hit.argmax(axis=1)
        tau = t[first[ruined]]
        if theta is not None:
            lw = (-theta[0] * b1[:, -1] - theta[1] * b2[:, -1]
                  + 0.5 * (theta[0] ** 2 + theta[1] ** 2) * w)
            wt = np.exp(lw[ruined])
        else:
            wt = np.ones(int(ruined.sum()))
        return (m.u * m.u * (w - tau), wt)

    parts = _run_blocks(cfg.n_paths, n_steps, cfg.workers, worker)
    values = np.concatenate([p[0] for p in parts])
    weights = np.concatenate([p[1] for p in parts])
    if weights.size == 0:
        raise DegenerateIS("no ruined paths; increase n_paths or tilt")
    n_eff = weights.sum() ** 2 / (weights ** 2).sum()
    if n_eff < min_effective:
        raise DegenerateIS(
            f"effective conditional sample {n_eff:.1f} < {min_effective:g}"
        )
    return RuinTimeSample(values=values, weights=weights, u=m.u,
                          method=f"ruin-time(steps={n_steps})")


def ks_statistic(sample: RuinTimeSample,
                 cdf: Callable[[float], float]) -> float:
    """Weighted Kolmogorov-Smirnov distance to a reference df."""
    if sample.values.size == 0:
        raise EmptySample("cannot compute a KS statistic on an empty sample")
    order = np.argsort(sample.values, kind="stable")
    x = sample.values[order]
    cw = np.cumsum(sample.weights[order])
    cw /= cw[-1]
    ref = np.array([cdf(float(xi)) for xi in x])
    pre = np.concatenate(([0.0], cw[:-1]))
    return float(max(np.max(np.abs(cw - ref)), np.max(np.abs(pre - ref))))
