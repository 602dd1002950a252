"""
Stationary covariance functions with unit variance.

Two families are supported, squared exponential and Matérn.  Both satisfy
``k(x, x) = 1`` so the prior variance never has to be carried around.

The Matérn family uses the modified Bessel function of the second kind
``K_nu``::

    k(r) = 2^(1-nu) / Gamma(nu) * z^nu * K_nu(z),    z = sqrt(2 nu) r / ell

with exact closed forms for nu in {1/2, 3/2, 5/2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special

from .errors import InputError

# distances below this are treated as exact zeros
ZERO_DISTANCE = 1e-15

_HALF_INTEGER_NU = (0.5, 1.5, 2.5)


class Family(str, Enum):
    SE = "se"
    MATERN = "matern"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus hyperparameters.

    Parameters
    ----------
    family : Family
        ``Family.SE`` or ``Family.MATERN``.
    lengthscale : float
        ``ell > 0``.
    nu : float, optional
        Matérn smoothness, required (and only meaningful) for Matérn.
    """

    family: Family
    lengthscale: float = 1.0
    nu: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not (math.isfinite(self.lengthscale) and self.lengthscale > 0):
            raise InputError(f"lengthscale must be positive, got {self.lengthscale}")
        if self.family is Family.MATERN:
            if self.nu is None or not (math.isfinite(self.nu) and self.nu > 0):
                raise InputError(f"Matérn smoothness nu must be positive, got {self.nu}")
        elif self.nu is not None:
            raise InputError("nu is only used by the Matérn family")

    @classmethod
    def se(cls, lengthscale: float = 1.0) -> "KernelSpec":
        return cls(Family.SE, lengthscale)

    @classmethod
    def matern(cls, nu: float, lengthscale: float = 1.0) -> "KernelSpec":
        return cls(Family.MATERN, lengthscale, nu)

    @property
    def theta(self) -> float:
        """SE width in the ``exp(-|x - x'|^2 / theta)`` convention, ``theta = 2 ell^2``."""
        return 2.0 * self.lengthscale**2

    def to_dict(self) -> dict:
        out = {"family": self.family.value, "lengthscale": self.lengthscale}
        if self.nu is not None:
            out["nu"] = self.nu
        return out


def matern_closed_form(r, nu: float, lengthscale: float) -> np.ndarray:
    """Half-integer Matérn profile; ``nu`` must be 1/2, 3/2 or 5/2."""
    z = math.sqrt(2.0 * nu) * np.asarray(r, dtype=float) / lengthscale
    e = np.exp(-z)
    if nu == 0.5:
        return e
    if nu == 1.5:
        return (1.0 + z) * e
    if nu == 2.5:
        return (1.0 + z + z * z / 3.0) * e
    raise InputError(f"no closed form for nu={nu}")


def matern_bessel(r, nu: float, lengthscale: float) -> np.ndarray:
    """General-``nu`` Matérn profile through ``K_nu``.

    Works in log space with the exponentially scaled ``kve`` so large
    arguments underflow to 0 cleanly instead of producing ``0 * inf``.
    """
    r = np.asarray(r, dtype=float)
    z = math.sqrt(2.0 * nu) * r / lengthscale
    out = np.ones_like(z)
    pos = r >= ZERO_DISTANCE
    zp = z[pos]
    with np.errstate(divide="ignore"):
        log_k = (
            (1.0 - nu) * math.log(2.0)
            - special.gammaln(nu)
            + nu * np.log(zp)
            + np.log(special.kve(nu, zp))
            - zp
        )
    out[pos] = np.exp(log_k)
    return out


def profile(spec: KernelSpec, r) -> np.ndarray:
    """Kernel value as a function of Euclidean distance ``r`` (array-valued)."""
    r = np.asarray(r, dtype=float)
    if spec.family is Family.SE:
        return np.exp(-(r * r) / (2.0 * spec.lengthscale**2))
    if spec.nu in _HALF_INTEGER_NU:
        return matern_closed_form(r, spec.nu, spec.lengthscale)
    return matern_bessel(r, spec.nu, spec.lengthscale)


def _as_points(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise InputError(f"expected a (T, d) array of points, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InputError("points must have finite coordinates")
    return X


def eval_kernel(spec: KernelSpec, x, x_tilde) -> float:
    """k(x, x~) for two single points."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x_tilde = np.atleast_1d(np.asarray(x_tilde, dtype=float))
    if x.shape != x_tilde.shape:
        raise InputError(f"dimension mismatch: {x.shape} vs {x_tilde.shape}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(x_tilde))):
        raise InputError("points must have finite coordinates")
    diff = x - x_tilde
    r = math.sqrt(float(np.dot(diff, diff)))
    return float(profile(spec, r))


def distances(X, Y) -> np.ndarray:
    """Euclidean distance matrix.  ``distances(X, Y) == distances(Y, X).T`` bitwise."""
    diff = X[:, None, :] - Y[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def cross_kernel(spec: KernelSpec, X, Y) -> np.ndarray:
    """Matrix of k(x_i, y_j)."""
    X = _as_points(X)
    Y = _as_points(Y)
    if X.shape[1] != Y.shape[1]:
        raise InputError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    return profile(spec, distances(X, Y))


def gram_matrix(spec: KernelSpec, X) -> np.ndarray:
    """K(X, X) for ``T >= 1`` points; symmetric with unit diagonal."""
    X = _as_points(X)
    if X.shape[0] == 0:
        raise InputError("gram_matrix needs at least one point")
    K = profile(spec, distances(X, X))
    np.fill_diagonal(K, 1.0)
    return K
