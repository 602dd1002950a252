"""
Query-selection rules on a fixed grid: GP-UCB and maximum variance reduction.

``run_policy`` drives the select / observe / update loop and records every
quantity the regret diagnostics need, so nothing downstream re-runs inference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, InputError
from .gp import GpState
from .kernels import KernelSpec, cross_kernel
from .sampler import Grid, SamplePath, noisy_observe


@dataclass(frozen=True)
class BetaSchedule:
    """Confidence-width schedule

        beta_t = 2 ln(2 t^2 pi^2 / (3 delta)) + 2 d ln(t^2 d b r sqrt(ln(4 d a / delta)))

    with Lipschitz-tail constants ``a``, ``b`` taken as configuration.
    """

    delta: float
    d: int
    a: float = 1.0
    b: float = 1.0
    r: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if self.d < 1:
            raise ConfigError("d must be >= 1")
        for name in ("a", "b", "r"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive, got {v}")
        if not 4.0 * self.d * self.a / self.delta > 1.0:
            raise ConfigError("beta schedule needs 4*d*a/delta > 1 so that ln(4da/delta) > 0")

    def __call__(self, t: int) -> float:
        return beta(self, t)


def beta(schedule: BetaSchedule, t: int) -> float:
    if t < 1:
        raise InputError(f"beta_t is defined for t >= 1, got {t}")
    s = schedule
    inner = math.sqrt(math.log(4.0 * s.d * s.a / s.delta))
    return 2.0 * math.log(2.0 * t * t * math.pi**2 / (3.0 * s.delta)) + 2.0 * s.d * math.log(
        t * t * s.d * s.b * s.r * inner
    )


@dataclass(frozen=True)
class GpUcb:
    schedule: BetaSchedule
    name: str = field(default="gp-ucb", init=False)


@dataclass(frozen=True)
class Mvr:
    name: str = field(default="mvr", init=False)


PolicyKind = GpUcb | Mvr


def _first_argmax(values: np.ndarray) -> int:
    return int(np.argmax(values))


def ucb_select(state: GpState, grid: Grid, beta_t: float) -> int:
    """Lowest grid index maximizing ``mu + sqrt(beta_t) * sigma``."""
    mean, var = state.posterior_batch(grid.points)
    return _first_argmax(mean + math.sqrt(beta_t) * np.sqrt(var))


def mvr_select(state: GpState, grid: Grid) -> int:
    """Lowest grid index maximizing the posterior standard deviation."""
    _, var = state.posterior_batch(grid.points)
    return _first_argmax(np.sqrt(var))


class _GridPosterior:
    """Posterior over every grid point, updated in O(t n) per observation.

    Keeps ``V = L^{-1} K(X_t, grid)``; the row for a new point is
    ``(k(x, grid) - V[:, i]^T V) / L_tt`` where ``V[:, i]`` is exactly the
    bordering vector of the Cholesky factor.
    """

    def __init__(self, spec: KernelSpec, grid: Grid, noise_variance: float, capacity: int):
        self.spec = spec
        self.points = grid.points
        self.noise_variance = noise_variance
        self.V = np.zeros((capacity, len(grid)))
        self.alpha = np.zeros(capacity)
        self.mean = np.zeros(len(grid))
        self.var = np.ones(len(grid))
        self.t = 0

    def sigma(self) -> np.ndarray:
        return np.sqrt(np.clip(self.var, 0.0, 1.0))

    def update(self, index: int, y: float) -> None:
        t = self.t
        ell = self.V[:t, index]
        diag = math.sqrt(max(1.0 - float(ell @ ell), 0.0) + self.noise_variance)
        k_row = cross_kernel(self.spec, self.points[index : index + 1], self.points)[0]
        row = (k_row - ell @ self.V[:t]) / diag
        a = (y - float(ell @ self.alpha[:t])) / diag
        self.V[t] = row
        self.alpha[t] = a
        self.mean = self.mean + a * row
        self.var = self.var - row * row
        self.t = t + 1


_TRACE_FIELDS = ("index", "x", "y", "f", "mu", "sigma", "beta", "inst_regret", "info_gain")


@dataclass(frozen=True)
class RunRecord:
    """Per-step trace of one policy run (arrays are indexed by t - 1)."""

    policy: str
    seed: int
    spec: KernelSpec
    noise_variance: float
    grid: Grid
    f_star: float
    maximizer_index: int
    index: np.ndarray
    x: np.ndarray
    y: np.ndarray
    f: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    beta: np.ndarray
    inst_regret: np.ndarray
    info_gain: np.ndarray

    @property
    def T(self) -> int:
        return len(self.index)

    @property
    def x_star(self) -> np.ndarray:
        return self.grid.points[self.maximizer_index]

    def truncate(self, T: int) -> "RunRecord":
        """The first ``T`` steps; identical to a fresh run of length ``T``."""
        if not 1 <= T <= self.T:
            raise InputError(f"cannot truncate a {self.T}-step run to {T} steps")
        arrays = {k: getattr(self, k)[:T].copy() for k in _TRACE_FIELDS}
        return replace(self, **arrays)


def run_policy(
    path: SamplePath,
    policy: PolicyKind,
    noise_variance: float,
    T: int,
    seed: int,
    forced_indices=None,
) -> RunRecord:
    """Run ``policy`` for ``T`` steps against ``path`` with Gaussian noise.

    ``forced_indices`` overrides the selection rule (testing hook); the
    recorded mu, sigma and beta are still those of the policy's state.
    """
    if T < 1:
        raise InputError("T must be >= 1")
    if not noise_variance > 0:
        raise InputError("noise variance must be positive")
    if path.spec is None:
        raise InputError("run_policy needs a path that carries its kernel spec")
    grid = path.grid
    rng = np.random.default_rng([seed, 1])
    state = GpState(path.spec, noise_variance, dim=grid.d)
    post = _GridPosterior(path.spec, grid, noise_variance, T)

    rec = {k: np.empty(T) for k in ("y", "f", "mu", "sigma", "beta", "inst_regret", "info_gain")}
    idx = np.empty(T, dtype=int)
    f_star = path.f_star
    for t in range(1, T + 1):
        sigma = post.sigma()
        if isinstance(policy, GpUcb):
            b = policy.schedule(t)
            i = _first_argmax(post.mean + math.sqrt(b) * sigma)
        else:
            b = math.nan
            i = _first_argmax(sigma)
        if forced_indices is not None:
            i = int(forced_indices[t - 1])
        y = noisy_observe(path, i, noise_variance, rng)
        rec["mu"][t - 1] = post.mean[i]
        rec["sigma"][t - 1] = sigma[i]
        state.observe(grid.points[i], y)
        post.update(i, y)
        idx[t - 1] = i
        rec["y"][t - 1] = y
        rec["f"][t - 1] = path.values[i]
        rec["beta"][t - 1] = b
        rec["inst_regret"][t - 1] = f_star - path.values[i]
        rec["info_gain"][t - 1] = state.info_gain

    return RunRecord(
        policy=policy.name,
        seed=seed,
        spec=path.spec,
        noise_variance=noise_variance,
        grid=grid,
        f_star=f_star,
        maximizer_index=path.maximizer_index,
        index=idx,
        x=grid.points[idx].copy(),
        **rec,
    )


def sigma_sum_bound(run: RunRecord) -> tuple[float, float]:
    """(sum of sigma_{t-1}(x_t), sqrt(C T I(X_T))) with C = 2 / ln(1 + 1/s2)."""
    C = 2.0 / math.log1p(1.0 / run.noise_variance)
    return float(math.fsum(run.sigma)), math.sqrt(C * run.T * run.info_gain[-1])
