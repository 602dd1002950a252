"""
Spherical-harmonic bookkeeping on S^d: harmonic dimensions and the
normalized Legendre (Gegenbauer) polynomials P_{m,d+1} with P(1) = 1.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError, InputError

MAX_ORDER = 10_000
MAX_DIM = 16
MAX_LEGENDRE_ORDER = 200


def sphere_area(n: int) -> float:
    """Surface area |S^n| = 2 pi^((n+1)/2) / Gamma((n+1)/2) of the unit n-sphere in R^(n+1)."""
    if n < 0:
        raise InputError("sphere dimension must be >= 0")
    return math.exp(math.log(2.0) + 0.5 * (n + 1) * math.log(math.pi) - math.lgamma(0.5 * (n + 1)))


def harmonic_dim(d: int, m: int) -> int:
    """N_{d+1,m}: dimension of degree-m spherical harmonics on S^d (exact integer)."""
    if d < 1 or m < 0:
        raise InputError(f"need d >= 1 and m >= 0, got d={d}, m={m}")
    if m > MAX_ORDER or d > MAX_DIM:
        raise DomainError(f"harmonic_dim supports m <= {MAX_ORDER} and d <= {MAX_DIM}")
    if m == 0:
        return 1
    return (2 * m + d - 1) * math.comb(m + d - 2, d - 1) // m


def harmonic_count(d: int, M: int) -> int:
    """N_M = sum_{m=0}^{M} N_{d+1,m}."""
    return sum(harmonic_dim(d, m) for m in range(M + 1))


def harmonic_dim_bound(d: int, m: int) -> float:
    """(d+1) e^(d-1) m^(d-1), an upper bound on N_{d+1,m} for m >= 1."""
    if m < 1:
        raise InputError("harmonic_dim_bound needs m >= 1")
    return (d + 1) * math.exp(d - 1) * float(m) ** (d - 1)


def harmonic_count_bound(d: int, M: int) -> float:
    """1 + (d+1) e^(d-1) M^d, an upper bound on N_M for M >= 0."""
    if M < 0:
        raise InputError("harmonic_count_bound needs M >= 0")
    return 1.0 + (d + 1) * math.exp(d - 1) * float(M) ** d


def legendre(m: int, d: int, t):
    """P_{m,d+1}(t) by the three-term recurrence

        (m + d - 1) P_{m+1} = (2m + d - 1) t P_m - m P_{m-1},

    started from P_0 = 1 and P_1 = t.  Scalar in, float out; array in, array out.
    """
    if m < 0 or d < 1:
        raise InputError(f"need m >= 0 and d >= 1, got m={m}, d={d}")
    if m > MAX_LEGENDRE_ORDER:
        raise DomainError(f"legendre is supported for m <= {MAX_LEGENDRE_ORDER}")
    scalar = np.ndim(t) == 0
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0) or not np.all(np.isfinite(t)):
        raise InputError("legendre needs |t| <= 1")
    p_prev = np.ones_like(t)
    if m == 0:
        out = p_prev
    else:
        p = t.copy()
        for k in range(1, m):
            p_prev, p = p, ((2 * k + d - 1) * t * p - k * p_prev) / (k + d - 1)
        out = p
    return float(out) if scalar else out
