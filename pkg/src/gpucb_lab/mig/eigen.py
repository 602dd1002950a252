"""
Mercer eigenvalues of dot-product kernels on S^d and their analytic decay bounds.

On the sphere a stationary kernel depends on x . x~ = t only through the
chordal distance sqrt(2 - 2t), so with k~(t) = profile(sqrt(2 - 2t)) the
Funk-Hecke formula gives

    lambda_m = |S^(d-1)| * int_{-1}^{1} P_{m,d+1}(t) k~(t) (1 - t^2)^((d-2)/2) dt.

Quadrature strategy
-------------------
* SE: m-fold integration by parts (Rodrigues form) turns the oscillating
  integrand into a positive one,

      lambda_m = |S^(d-1)| Gamma(d/2) / (theta^m Gamma(m + d/2))
                 * int_0^pi exp(2 (cos phi - 1) / theta) sin^(2m+d-1)(phi) dphi,

  which avoids catastrophic cancellation for eigenvalues far below machine
  epsilon relative to k~.
* Matérn, d = 1: t = cos phi reduces to a cosine transform,
  lambda_m = 2 int_0^pi k~(cos phi) cos(m phi) dphi.
* Matérn, d >= 2: t = cos phi with the recurrence-evaluated Legendre factor.

The t = cos phi substitution also removes the (1 - t^2)^(-1/2) endpoint
singularity at d = 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ..errors import DomainError, InputError, NumericError
from ..kernels import Family, KernelSpec, profile
from .harmonics import MAX_LEGENDRE_ORDER, harmonic_dim, legendre, sphere_area

QUAD_ABS_TOL = 1e-9


def sphere_profile(spec: KernelSpec, t):
    """k~(t) = k at chordal distance sqrt(2 - 2t) between unit vectors with x . x~ = t."""
    t = np.asarray(t, dtype=float)
    return profile(spec, np.sqrt(np.maximum(2.0 - 2.0 * t, 0.0)))


def _check_quad(value: float, err: float, what: str) -> float:
    if not math.isfinite(value) or err > QUAD_ABS_TOL:
        raise NumericError(f"{what}: quadrature did not converge (estimated error {err:.3g})")
    return value


def _quad(fn) -> tuple[float, float]:
    """Adaptive quadrature over [0, pi]; convergence is judged by ``_check_quad``."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(fn, 0.0, math.pi, epsabs=1e-14, epsrel=1e-12, limit=2000)


def _se_eigenvalue(d: int, theta: float, m: int) -> float:
    a = 2.0 / theta
    k = 2 * m + d - 1

    def integrand(phi):
        s = math.sin(phi)
        if s <= 0.0:
            return 0.0 if k > 0 else math.exp(a * (math.cos(phi) - 1.0))
        return math.exp(a * (math.cos(phi) - 1.0) + k * math.log(s))

    val, err = integrate.quad(integrand, 0.0, math.pi, epsabs=0.0, epsrel=1e-12, limit=500)
    log_c = math.log(sphere_area(d - 1)) + math.lgamma(d / 2) - math.lgamma(m + d / 2) - m * math.log(theta)
    scale = math.exp(log_c)
    return _check_quad(scale * val, scale * err, f"SE eigenvalue m={m}")


def _matern_eigenvalue(spec: KernelSpec, d: int, m: int) -> float:
    def k_phi(phi):
        return float(sphere_profile(spec, math.cos(phi)))

    if d == 1:
        val, err = _quad(lambda phi: k_phi(phi) * math.cos(m * phi))
        return _check_quad(2.0 * val, 2.0 * err, f"Matérn eigenvalue m={m}")

    def integrand(phi):
        c = math.cos(phi)
        return legendre(m, d, c) * k_phi(phi) * math.sin(phi) ** (d - 1)

    val, err = _quad(integrand)
    area = sphere_area(d - 1)
    return _check_quad(area * val, area * err, f"Matérn eigenvalue m={m}")


def funk_hecke_eigenvalue(spec: KernelSpec, d: int, m: int) -> float:
    """lambda_m of ``spec`` restricted to S^d (each of the N_{d+1,m} harmonics shares it)."""
    if d < 1 or m < 0:
        raise InputError(f"need d >= 1 and m >= 0, got d={d}, m={m}")
    if m > MAX_LEGENDRE_ORDER:
        raise DomainError(f"eigenvalues are supported for m <= {MAX_LEGENDRE_ORDER}")
    if spec.family is Family.SE:
        return _se_eigenvalue(d, spec.theta, m)
    return _matern_eigenvalue(spec, d, m)


def log_se_eigen_bound(d: int, theta: float, m: int) -> float:
    if m < 1:
        raise DomainError("the SE eigendecay bound needs m >= 1")
    if not theta > 0:
        raise InputError("theta must be positive")
    return (
        math.log(sphere_area(d))
        + m * math.log(2.0 * math.e / theta)
        + 0.5 * (d + 1) * math.log(2.0 * math.e)
        + math.lgamma(0.5 * (d + 1))
        - 0.5 * math.log(math.pi)
        - (m + 0.5 * d) * math.log(2 * m + d - 1)
        - 2.0 / theta
        + 1.0 / theta**2
    )


def se_eigen_bound(d: int, theta: float, m: int) -> float:
    """Super-exponential decay bound for the SE eigenvalue of order m >= 1."""
    return math.exp(log_se_eigen_bound(d, theta, m))


def log_matern_c(d: int, nu: float) -> float:
    """ln C_{d,nu}, C_{d,nu} = 2^(d+1) pi^((d+1)/2) Gamma(nu + (d+1)/2) (2 nu)^nu / Gamma(nu)."""
    return (
        (d + 1) * math.log(2.0)
        + 0.5 * (d + 1) * math.log(math.pi)
        + math.lgamma(nu + 0.5 * (d + 1))
        + nu * math.log(2.0 * nu)
        - math.lgamma(nu)
    )


def log_matern_c_tilde(d: int, nu: float) -> float:
    """ln C~_{d,nu} = ln C_{d,nu} + ln Gamma(2nu + d) - 2 ln Gamma(nu + (d+1)/2) + 2nu + d + 1/6."""
    return log_matern_c(d, nu) + math.lgamma(2 * nu + d) - 2.0 * math.lgamma(nu + 0.5 * (d + 1)) + 2 * nu + d + 1.0 / 6.0


def log_matern_eigen_bound(d: int, nu: float, lengthscale: float, m: int) -> float:
    if not nu > 0.5:
        raise DomainError(f"the Matérn eigendecay bound needs nu > 1/2, got {nu}")
    if not m > 2 * nu:
        raise DomainError(f"the Matérn eigendecay bound needs m > 2 nu = {2 * nu}, got m={m}")
    return log_matern_c_tilde(d, nu) - 2 * nu * math.log(lengthscale) - (2 * nu + d) * math.log(m)


def matern_eigen_bound(d: int, nu: float, lengthscale: float, m: int) -> float:
    """Power-law decay bound C~_{d,nu} ell^(-2 nu) m^(-2 nu - d), valid for m > 2 nu."""
    return math.exp(log_matern_eigen_bound(d, nu, lengthscale, m))


def eigen_bound_valid(spec: KernelSpec, m: int) -> bool:
    if spec.family is Family.SE:
        return m >= 1
    return spec.nu > 0.5 and m > 2 * spec.nu


def eigen_bound(spec: KernelSpec, d: int, m: int) -> float:
    """Analytic bound on lambda_m for ``spec``; DomainError outside its validity range."""
    if spec.family is Family.SE:
        return se_eigen_bound(d, spec.theta, m)
    return matern_eigen_bound(d, spec.nu, spec.lengthscale, m)


@dataclass(frozen=True)
class EigenRow:
    m: int
    lambda_quadrature: float
    lambda_bound: float
    bound_valid: bool
    n_dim: int


def eigen_table(spec: KernelSpec, d: int, m_max: int) -> list[EigenRow]:
    """Quadrature eigenvalue, analytic bound (nan where invalid) and N_{d+1,m} for m = 0..m_max."""
    if m_max > MAX_LEGENDRE_ORDER:
        raise DomainError(f"m_max must be <= {MAX_LEGENDRE_ORDER}")
    rows = []
    for m in range(m_max + 1):
        valid = eigen_bound_valid(spec, m)
        bound = eigen_bound(spec, d, m) if valid else math.nan
        rows.append(EigenRow(m, funk_hecke_eigenvalue(spec, d, m), bound, valid, harmonic_dim(d, m)))
    return rows


def mercer_series(spec: KernelSpec, d: int, M: int, t) -> np.ndarray:
    """Truncated Mercer sum sum_{m<=M} lambda_m N_{d+1,m} / |S^d| P_{m,d+1}(t) of k~(t)."""
    t = np.asarray(t, dtype=float)
    area = sphere_area(d)
    out = np.zeros_like(t)
    for m in range(M + 1):
        out = out + funk_hecke_eigenvalue(spec, d, m) * harmonic_dim(d, m) / area * legendre(m, d, t)
    return out

