import math

import numpy as np
import pytest

from gpucb_lab.errors import DomainError, InputError
from gpucb_lab.mig import (
    harmonic_count,
    harmonic_count_bound,
    harmonic_dim,
    harmonic_dim_bound,
    legendre,
    sphere_area,
)


def legendre_sum(m, d, t):
    """Finite-sum oracle for the normalized Legendre polynomial."""
    total = 0.0
    for k in range(m // 2 + 1):
        total += (-1) ** k * (1 - t * t) ** k * t ** (m - 2 * k) / (
            4**k * math.factorial(k) * math.factorial(m - 2 * k) * math.gamma(k + d / 2)
        )
    return math.factorial(m) * math.gamma(d / 2) * total


class TestHarmonicDim:
    @pytest.mark.parametrize("d", [1, 2, 5, 16])
    def test_order_zero(self, d):
        assert harmonic_dim(d, 0) == 1

    def test_circle(self):
        assert harmonic_dim(1, 5) == 2

    @pytest.mark.parametrize("m", range(0, 30))
    def test_two_sphere_is_odd_count(self, m):
        assert harmonic_dim(2, m) == 2 * m + 1

    def test_factorial_form(self):
        for d in range(1, 8):
            for m in range(1, 25):
                ref = (2 * m + d - 1) * math.factorial(m + d - 2) // (math.factorial(m) * math.factorial(d - 1))
                assert harmonic_dim(d, m) == ref

    def test_large_order_is_exact_integer(self):
        v = harmonic_dim(16, 10_000)
        assert isinstance(v, int) and v > 0

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            harmonic_dim(17, 1)
        with pytest.raises(DomainError):
            harmonic_dim(2, 10_001)

    def test_invalid(self):
        with pytest.raises(InputError):
            harmonic_dim(0, 1)

    def test_count(self):
        assert harmonic_count(2, 4) == sum(2 * m + 1 for m in range(5)) == 25


class TestHarmonicBounds:
    @pytest.mark.parametrize("m", [1, 2, 7, 100])
    def test_circle_bound_is_exact(self, m):
        assert harmonic_dim_bound(1, m) == 2 == harmonic_dim(1, m)

    def test_dominance_d3(self):
        for m in range(1, 51):
            assert harmonic_dim_bound(3, m) >= harmonic_dim(3, m)

    def test_cumulative(self):
        assert harmonic_count_bound(3, 0) == 1.0 == harmonic_count(3, 0)
        for d in (1, 2, 3):
            for M in range(0, 40):
                assert harmonic_count_bound(d, M) >= harmonic_count(d, M)

    def test_needs_positive_order(self):
        with pytest.raises(InputError):
            harmonic_dim_bound(2, 0)


class TestSphereArea:
    def test_known_values(self):
        assert sphere_area(0) == pytest.approx(2.0)
        assert sphere_area(1) == pytest.approx(2 * math.pi)
        assert sphere_area(2) == pytest.approx(4 * math.pi)


class TestLegendre:
    @pytest.mark.parametrize("d", [1, 2, 3, 8])
    def test_unit_at_one(self, d):
        for m in range(0, 60):
            assert legendre(m, d, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_low_orders(self):
        t = np.linspace(-1, 1, 11)
        np.testing.assert_array_equal(legendre(0, 3, t), np.ones(11))
        np.testing.assert_array_equal(legendre(1, 3, t), t)

    def test_hand_value(self):
        assert legendre(2, 2, 0.0) == pytest.approx(-0.5, abs=1e-15)

    def test_circle_is_chebyshev(self):
        t = np.linspace(-1, 1, 41)
        np.testing.assert_allclose(legendre(7, 1, t), np.cos(7 * np.arccos(t)), atol=1e-12)

    @pytest.mark.parametrize("d", [1, 2, 3, 5])
    def test_recurrence_matches_finite_sum(self, d):
        ts = np.random.default_rng(d).uniform(-1, 1, 50)
        for m in range(13):
            for t in ts:
                assert legendre(m, d, float(t)) == pytest.approx(legendre_sum(m, d, float(t)), abs=1e-10)

    def test_scalar_in_scalar_out(self):
        assert isinstance(legendre(3, 2, 0.3), float)

    def test_outside_interval(self):
        with pytest.raises(InputError):
            legendre(2, 2, 1.0001)

    def test_order_cap(self):
        with pytest.raises(DomainError):
            legendre(201, 2, 0.0)
