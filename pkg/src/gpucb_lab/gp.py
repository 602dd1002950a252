"""
Exact GP posterior with a Cholesky factor grown one row at a time.

``GpState`` keeps the lower-triangular factor ``L`` of ``K(X_t, X_t) + s2 I``
and the whitened targets ``alpha = L^{-1} y``; both are extended by bordering
on every ``observe`` so the factor is never recomputed from scratch.  The
per-step information gain increments ``0.5 * ln(1 + s2^{-1} var_{t-1}(x_t))``
are stored as they are produced, which makes ``I(X_t)`` an O(1) lookup.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import solve_triangular

from .errors import InputError, NumericError
from .kernels import KernelSpec, cross_kernel, gram_matrix

# squared Cholesky pivots at or below this are treated as a breakdown
_MIN_PIVOT = 1e-12


class GpState:
    """Observation history plus incremental factorization.

    ``observe`` mutates the state in place and returns it; use ``copy`` when
    a branch is needed.  No concurrent mutation.
    """

    def __init__(self, spec: KernelSpec, noise_variance: float, jitter: float = 0.0, dim: int | None = None):
        if not (math.isfinite(noise_variance) and noise_variance >= 0):
            raise InputError(f"noise variance must be nonnegative, got {noise_variance}")
        if jitter < 0:
            raise InputError("jitter must be nonnegative")
        self.spec = spec
        self.noise_variance = float(noise_variance)
        self.jitter = float(jitter)
        self._dim = dim
        self._X = np.empty((0, dim or 0))
        self._y = np.empty(0)
        self._L = np.empty((0, 0))
        self._alpha = np.empty(0)
        self._gains: list[float] = []
        self._n = 0

    # -- read-only views ---------------------------------------------------

    @property
    def t(self) -> int:
        return self._n

    @property
    def inputs(self) -> np.ndarray:
        return self._X[: self.t].copy()

    @property
    def outputs(self) -> np.ndarray:
        return self._y[: self.t].copy()

    @property
    def factor(self) -> np.ndarray:
        n = self.t
        return self._L[:n, :n].copy()

    @property
    def info_gain_terms(self) -> list[float]:
        return list(self._gains)

    @property
    def info_gain(self) -> float:
        """I(X_t) as the running sum of stored increments."""
        return math.fsum(self._gains)

    def copy(self) -> "GpState":
        other = GpState(self.spec, self.noise_variance, self.jitter, self._dim)
        other._X = self._X.copy()
        other._y = self._y.copy()
        other._L = self._L.copy()
        other._alpha = self._alpha.copy()
        other._gains = list(self._gains)
        other._n = self._n
        return other

    # -- inference ---------------------------------------------------------

    def _check_points(self, Xq) -> np.ndarray:
        Xq = np.asarray(Xq, dtype=float)
        if Xq.ndim == 1:
            # a flat array is a batch of scalars in 1-D, otherwise a single point
            Xq = Xq[:, None] if self._dim == 1 else Xq[None, :]
        if not np.all(np.isfinite(Xq)):
            raise InputError("query points must be finite")
        if self._dim is not None and Xq.shape[1] != self._dim:
            raise InputError(f"expected dimension {self._dim}, got {Xq.shape[1]}")
        return Xq

    def _whiten(self, Xq: np.ndarray) -> np.ndarray:
        """V = L^{-1} K(X_t, Xq), shape (t, q)."""
        n = self.t
        Kxq = cross_kernel(self.spec, self._X[:n], Xq)
        return solve_triangular(self._L[:n, :n], Kxq, lower=True, check_finite=False)

    def posterior_batch(self, Xq) -> tuple[np.ndarray, np.ndarray]:
        """Posterior means and variances at the rows of ``Xq``.

        Variances are clamped into ``[0, k(x, x)] = [0, 1]``.
        """
        Xq = self._check_points(Xq)
        q = Xq.shape[0]
        if self.t == 0:
            return np.zeros(q), np.ones(q)
        V = self._whiten(Xq)
        mean = V.T @ self._alpha[: self.t]
        var = 1.0 - np.einsum("ij,ij->j", V, V)
        return mean, np.clip(var, 0.0, 1.0)

    def posterior(self, x) -> tuple[float, float]:
        """Posterior (mean, variance) at a single point."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        mean, var = self.posterior_batch(x[None, :])
        return float(mean[0]), float(var[0])

    def observe(self, x, y: float) -> "GpState":
        """Append ``(x, y)``, border the factor by one row, store the gain increment."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if not (np.all(np.isfinite(x)) and math.isfinite(y)):
            raise InputError("observation must be finite")
        if self._dim is None:
            self._dim = x.size
            self._X = np.empty((0, self._dim))
        if x.size != self._dim:
            raise InputError(f"expected dimension {self._dim}, got {x.size}")
        n = self.t
        if n > 0:
            ell = self._whiten(x[None, :])[:, 0]
            prior_var = 1.0 - float(ell @ ell)
        else:
            ell = np.empty(0)
            prior_var = 1.0
        var = min(max(prior_var, 0.0), 1.0)
        pivot = prior_var + self.noise_variance + self.jitter
        if not pivot > _MIN_PIVOT:
            raise NumericError(
                "Cholesky bordering failed: K + noise*I is not positive definite "
                "(duplicate inputs with zero noise?); set a positive jitter"
            )
        diag = math.sqrt(pivot)
        self._grow(n + 1)
        self._X[n] = x
        self._y[n] = y
        self._L[n, :n] = ell
        self._L[n, n] = diag
        self._alpha[n] = (y - float(ell @ self._alpha[:n])) / diag
        self._n = n + 1
        if self.noise_variance > 0:
            self._gains.append(0.5 * math.log1p(var / self.noise_variance))
        else:
            self._gains.append(math.inf)
        return self

    def _grow(self, size: int) -> None:
        cap = self._L.shape[0]
        if size <= cap:
            return
        new_cap = max(size, 2 * cap, 8)
        X = np.zeros((new_cap, self._dim))
        y = np.zeros(new_cap)
        L = np.zeros((new_cap, new_cap))
        a = np.zeros(new_cap)
        X[:cap] = self._X[:cap]
        y[:cap] = self._y[:cap]
        L[:cap, :cap] = self._L
        a[:cap] = self._alpha[:cap]
        self._X, self._y, self._L, self._alpha = X, y, L, a

    @classmethod
    def from_data(cls, spec: KernelSpec, noise_variance: float, X, y, jitter: float = 0.0) -> "GpState":
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        state = cls(spec, noise_variance, jitter, dim=X.shape[1])
        for xi, yi in zip(X, np.asarray(y, dtype=float)):
            state.observe(xi, float(yi))
        return state


def information_gain(spec: KernelSpec, X, noise_variance: float) -> float:
    """I(X_T) = 0.5 * ln det(I + s2^{-1} K(X_T, X_T)) via a batch Cholesky factor."""
    if not noise_variance > 0:
        raise InputError("noise variance must be positive")
    K = gram_matrix(spec, X)
    A = np.eye(K.shape[0]) + K / noise_variance
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - A is SPD by construction
        raise NumericError(f"Cholesky of I + K/s2 failed: {exc}") from exc
    return float(np.sum(np.log(np.diag(L))))
