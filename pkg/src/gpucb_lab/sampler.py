"""
Sample paths of GP(0, k) on a fixed grid over ``[0, r]^d`` and empirical
regularity diagnostics for a tabulated path.

The regularity fits are diagnostics only.  They are checked against
analytic plug-in functions (parabola, ramp), never against GP draws.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InputError, NumericError
from .kernels import KernelSpec, gram_matrix


@dataclass(frozen=True)
class Grid:
    """Regular tensor grid with ``points_per_dim`` nodes per axis on ``[0, r]``.

    Points are ordered lexicographically (last coordinate varies fastest).
    """

    d: int
    r: float
    points_per_dim: int
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.d < 1:
            raise InputError("grid dimension must be >= 1")
        if not (math.isfinite(self.r) and self.r > 0):
            raise InputError("grid edge length r must be positive")
        if self.points_per_dim < 1:
            raise InputError("points_per_dim must be >= 1")
        axis = self.axis
        pts = np.array(list(itertools.product(axis, repeat=self.d)), dtype=float).reshape(-1, self.d)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def axis(self) -> np.ndarray:
        if self.points_per_dim == 1:
            return np.zeros(1)
        return np.linspace(0.0, self.r, self.points_per_dim)

    @property
    def spacing(self) -> float:
        return self.r / (self.points_per_dim - 1) if self.points_per_dim > 1 else 0.0

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_dim,) * self.d

    def __len__(self) -> int:
        return self.points.shape[0]

    def multi_index(self, index: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(index, self.shape))

    def is_boundary(self, index: int) -> bool:
        n = self.points_per_dim
        return any(i == 0 or i == n - 1 for i in self.multi_index(index))


@dataclass(frozen=True)
class SamplePath:
    """Function values tabulated on a grid.

    ``seed`` is ``None`` for analytic plug-ins built with ``from_function``.
    """

    grid: Grid
    values: np.ndarray
    seed: int | None = None
    spec: KernelSpec | None = None
    jitter: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).copy()
        if values.shape != (len(self.grid),):
            raise InputError(f"expected {len(self.grid)} values, got shape {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def maximizer_index(self) -> int:
        # np.argmax returns the first occurrence: lowest index wins ties
        return int(np.argmax(self.values))

    @property
    def f_star(self) -> float:
        return float(self.values[self.maximizer_index])

    @property
    def x_star(self) -> np.ndarray:
        return self.grid.points[self.maximizer_index]

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "SamplePath":
        values = np.array([fn(p if grid.d > 1 else p[0]) for p in grid.points], dtype=float)
        return cls(grid, values)


def sample_prior(spec: KernelSpec, grid: Grid, jitter: float = 1e-8, seed: int = 0) -> SamplePath:
    """Draw ``f = L z`` with ``L L^T = K(grid, grid) + jitter I`` and ``z ~ N(0, I)``."""
    if jitter < 0:
        raise InputError("jitter must be nonnegative")
    K = gram_matrix(spec, grid.points)
    K[np.diag_indices_from(K)] += jitter
    try:
        L = np.linalg.cholesky(K)
    except np.linalg.LinAlgError as exc:
        raise NumericError(
            f"Cholesky of the grid covariance failed ({exc}); increase the sampling "
            "jitter or coarsen the grid"
        ) from exc
    z = np.random.default_rng(seed).standard_normal(len(grid))
    return SamplePath(grid, L @ z, seed=seed, spec=spec, jitter=jitter)


def noisy_observe(path: SamplePath, index: int, noise_variance: float, rng: np.random.Generator) -> float:
    """``y = f(x_index) + sqrt(noise_variance) * z`` with ``z`` drawn from ``rng``."""
    return float(path.values[index] + math.sqrt(noise_variance) * rng.standard_normal())


class MaximizerLocation(str, Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class RegularityReport:
    """Empirical stand-ins for the sample-path regularity constants.

    Only the fit matching ``maximizer_location`` is populated: ``c_quad`` and
    ``rho_quad`` for an interior maximizer, ``c_lin`` and ``rho_lin`` for a
    boundary one.  ``c_gap`` is ``inf`` when no other strict local maximum
    exists.
    """

    c_sup: float
    lipschitz_L: float
    c_gap: float
    maximizer_location: MaximizerLocation
    maximizer_index: int
    c_quad: float | None = None
    rho_quad: float | None = None
    c_lin: float | None = None
    rho_lin: float | None = None

    def to_dict(self) -> dict:
        return {
            "c_sup": self.c_sup,
            "lipschitz_L": self.lipschitz_L,
            "c_gap": self.c_gap,
            "maximizer_location": self.maximizer_location.value,
            "maximizer_index": self.maximizer_index,
            "c_quad": self.c_quad,
            "rho_quad": self.rho_quad,
            "c_lin": self.c_lin,
            "rho_lin": self.rho_lin,
        }


def _neighbour_offsets(d: int) -> list[tuple[int, ...]]:
    return [o for o in itertools.product((-1, 0, 1), repeat=d) if any(o)]


def strict_local_maxima(path: SamplePath) -> np.ndarray:
    """Indices strictly greater than every axis and diagonal grid neighbour."""
    grid = path.grid
    F = path.values.reshape(grid.shape)
    n = grid.points_per_dim
    is_max = np.ones(grid.shape, dtype=bool)
    pad = np.pad(F, 1, mode="constant", constant_values=-np.inf)
    for off in _neighbour_offsets(grid.d):
        sl = tuple(slice(1 + o, 1 + o + n) for o in off)
        is_max &= F > pad[sl]
    return np.flatnonzero(is_max.ravel())


def _fit_growth(dist: np.ndarray, gap: np.ndarray, power: int) -> tuple[float, float]:
    """Best (c, rho) with ``gap >= c * dist**power`` on the ball of radius rho.

    For every candidate radius the best constant is the running minimum of
    ``gap / dist**power``; the radius reported maximizes ``c * rho**power``
    (the quantity the epsilon threshold uses), ties going to the larger radius.
    """
    order = np.argsort(dist, kind="stable")
    dist, gap = dist[order], gap[order]
    keep = dist > 0
    dist, gap = dist[keep], gap[keep]
    if dist.size == 0:
        return 0.0, 0.0
    c_run = np.minimum.accumulate(gap / dist**power)
    # a radius is only valid once every point at that distance is included
    last_of_radius = np.r_[dist[1:] != dist[:-1], True]
    c_run, radii = c_run[last_of_radius], dist[last_of_radius]
    c_run = np.maximum(c_run, 0.0)
    score = c_run * radii**power
    best = len(score) - 1 - int(np.argmax(score[::-1]))
    return float(c_run[best]), float(radii[best])


def estimate_regularity(path: SamplePath) -> RegularityReport:
    """Grid estimates of c_sup, L, c_gap and the local growth constant at x*."""
    grid = path.grid
    if grid.points_per_dim < 3:
        raise InputError("regularity estimation needs at least 3 points per dimension")
    F = path.values.reshape(grid.shape)
    h = grid.spacing

    c_sup = float(np.max(np.abs(path.values)))
    lip = 0.0
    for axis in range(grid.d):
        lip = max(lip, float(np.max(np.abs(np.diff(F, axis=axis)))) / h)

    i_star = path.maximizer_index
    f_star = path.f_star
    others = [i for i in strict_local_maxima(path) if i != i_star]
    c_gap = float(f_star - max(path.values[i] for i in others)) if others else math.inf

    dist = np.linalg.norm(grid.points - grid.points[i_star], axis=1)
    gap = f_star - path.values
    if grid.is_boundary(i_star):
        c_lin, rho_lin = _fit_growth(dist, gap, 1)
        return RegularityReport(c_sup, lip, c_gap, MaximizerLocation.BOUNDARY, i_star, c_lin=c_lin, rho_lin=rho_lin)
    c_quad, rho_quad = _fit_growth(dist, gap, 2)
    return RegularityReport(c_sup, lip, c_gap, MaximizerLocation.INTERIOR, i_star, c_quad=c_quad, rho_quad=rho_quad)
