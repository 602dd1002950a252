"""
Empirical MIG on finite point sets, plus the point sets and the ball-to-sphere
lift used to compare empirical values with the analytic bounds.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from ..gp import GpState
from ..kernels import KernelSpec, _as_points, cross_kernel

GREEDY_FACTOR = 1.0 / (1.0 - 1.0 / math.e)
BRUTE_FORCE_CAP = 500_000


@dataclass(frozen=True)
class GreedyResult:
    info_gain: float
    lower: float
    upper: float
    indices: tuple[int, ...]
    gains: np.ndarray

    def upper_at(self, t: int) -> float:
        """Certified upper end for horizon ``t <= T`` (greedy prefixes are greedy)."""
        return GREEDY_FACTOR * float(self.gains[t - 1])


def greedy_mig(spec: KernelSpec, points, T: int, noise_variance: float) -> GreedyResult:
    """Maximum-variance sequence over ``points`` (lowest index wins ties).

    Its information gain I and ``I / (1 - 1/e)`` bracket the MIG of the set,
    repeated points allowed.
    """
    X = _as_points(points)
    if T < 1:
        raise InputError("T must be >= 1")
    state = GpState(spec, noise_variance, dim=X.shape[1])
    chosen = []
    gains = np.empty(T)
    for t in range(T):
        _, var = state.posterior_batch(X)
        i = int(np.argmax(var))
        chosen.append(i)
        state.observe(X[i], 0.0)
        gains[t] = state.info_gain
    I = float(gains[-1])
    return GreedyResult(I, I, GREEDY_FACTOR * I, tuple(chosen), gains)


def brute_force_mig(spec: KernelSpec, points, T: int, noise_variance: float, cap: int = BRUTE_FORCE_CAP) -> float:
    """Exact MIG over all size-T multisets of ``points`` (order does not matter)."""
    X = _as_points(points)
    n = X.shape[0]
    if T < 1:
        raise InputError("T must be >= 1")
    count = math.comb(n + T - 1, T)
    if count > cap:
        raise InputError(f"{count} multisets exceed the enumeration cap of {cap}")
    K = cross_kernel(spec, X, X)
    np.fill_diagonal(K, 1.0)
    eye = np.eye(T)
    best = -math.inf
    combos = itertools.combinations_with_replacement(range(n), T)
    while True:
        chunk = np.array(list(itertools.islice(combos, 50_000)), dtype=int)
        if chunk.size == 0:
            break
        sub = K[chunk[:, :, None], chunk[:, None, :]]
        _, logdet = np.linalg.slogdet(eye + sub / noise_variance)
        best = max(best, float(np.max(logdet)))
    return 0.5 * best


def sphere_lift(X) -> np.ndarray:
    """Append sqrt(1 - |x|^2) so that points of the unit d-ball land on S^d."""
    X = _as_points(X)
    sq = np.einsum("ij,ij->i", X, X)
    if np.any(sq > 1.0 + 1e-12):
        raise InputError("sphere_lift needs points with norm <= 1")
    return np.hstack([X, np.sqrt(np.clip(1.0 - sq, 0.0, None))[:, None]])


def sphere_fibonacci_points(n: int) -> np.ndarray:
    """n nearly uniform points on S^2 (Fibonacci lattice)."""
    if n < 1:
        raise InputError("n must be >= 1")
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    phi = math.pi * (1.0 + math.sqrt(5.0)) * k
    rho = np.sqrt(1.0 - z * z)
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])


def circle_points(n: int) -> np.ndarray:
    """n equally spaced points on S^1."""
    if n < 1:
        raise InputError("n must be >= 1")
    a = 2.0 * math.pi * np.arange(n) / n
    return np.column_stack([np.cos(a), np.sin(a)])
