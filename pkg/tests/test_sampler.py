import math

import numpy as np
import pytest

from gpucb_lab.errors import InputError, NumericError
from gpucb_lab.kernels import KernelSpec, eval_kernel
from gpucb_lab.sampler import (
    Grid,
    MaximizerLocation,
    SamplePath,
    estimate_regularity,
    noisy_observe,
    sample_prior,
    strict_local_maxima,
)

SPEC = KernelSpec.matern(2.5, 0.2)


class TestGrid:
    def test_size_and_bounds(self):
        g = Grid(2, 2.0, 5)
        assert len(g) == 25
        assert g.points.min() == 0.0 and g.points.max() == 2.0

    def test_lexicographic_order(self):
        g = Grid(2, 1.0, 3)
        np.testing.assert_array_equal(g.points[:4], [[0, 0], [0, 0.5], [0, 1], [0.5, 0]])

    def test_points_read_only(self):
        with pytest.raises(ValueError):
            Grid(1, 1.0, 4).points[0, 0] = 3.0

    def test_boundary_flags(self):
        g = Grid(2, 1.0, 3)
        assert g.is_boundary(0) and not g.is_boundary(4)

    @pytest.mark.parametrize("args", [(0, 1.0, 3), (1, 0.0, 3), (1, 1.0, 0)])
    def test_invalid(self, args):
        with pytest.raises(InputError):
            Grid(*args)


class TestSamplePrior:
    def test_deterministic(self):
        g = Grid(1, 1.0, 50)
        np.testing.assert_array_equal(sample_prior(SPEC, g, seed=7).values, sample_prior(SPEC, g, seed=7).values)

    def test_single_point(self):
        g = Grid(1, 1.0, 1)
        path = sample_prior(SPEC, g, jitter=0.5, seed=3)
        z = np.random.default_rng(3).standard_normal(1)
        assert path.values[0] == pytest.approx(math.sqrt(1.5) * z[0], rel=1e-15)

    def test_moments_and_cross_covariance(self):
        g = Grid(1, 1.0, 11)
        draws = np.array([sample_prior(SPEC, g, seed=s).values for s in range(2000)])
        v = draws[:, 5]
        assert abs(v.mean()) <= 3 / math.sqrt(2000)
        assert abs(v.var() - 1.0) <= 0.15
        cov = np.mean(draws[:, 3] * draws[:, 5]) - draws[:, 3].mean() * v.mean()
        assert abs(cov - eval_kernel(SPEC, g.points[3], g.points[5])) <= 0.15

    def test_failure_advises_jitter(self):
        g = Grid(1, 1.0, 400)
        with pytest.raises(NumericError, match="jitter"):
            sample_prior(KernelSpec.se(2.0), g, jitter=0.0, seed=0)

    def test_maximizer_ties_lowest_index(self):
        p = SamplePath(Grid(1, 1.0, 4), [0.0, 2.0, 2.0, 1.0])
        assert p.maximizer_index == 1 and p.f_star == 2.0


class TestNoisyObserve:
    def test_zero_noise_is_exact(self):
        p = SamplePath(Grid(1, 1.0, 3), [0.1, 0.2, 0.3])
        assert noisy_observe(p, 2, 0.0, np.random.default_rng(0)) == 0.3

    def test_noise_moments(self):
        p = SamplePath(Grid(1, 1.0, 3), [0.1, 0.2, 0.3])
        rng = np.random.default_rng(1)
        e = np.array([noisy_observe(p, 1, 3.0, rng) for _ in range(5000)]) - 0.2
        assert abs(e.mean()) <= 3 * math.sqrt(3 / 5000)
        assert abs(e.var() - 3.0) <= 0.3


class TestRegularity:
    def test_parabola_interior(self):
        g = Grid(1, 1.0, 101)
        rep = estimate_regularity(SamplePath.from_function(g, lambda x: -((x - 0.5) ** 2)))
        assert rep.maximizer_location is MaximizerLocation.INTERIOR
        assert rep.c_quad == pytest.approx(1.0, rel=0.05)
        assert rep.c_lin is None and rep.c_gap == math.inf

    def test_ramp_boundary(self):
        g = Grid(1, 1.0, 101)
        rep = estimate_regularity(SamplePath.from_function(g, lambda x: -x))
        assert rep.maximizer_location is MaximizerLocation.BOUNDARY
        assert rep.maximizer_index == 0
        assert rep.c_lin == pytest.approx(1.0, rel=0.05)
        assert rep.c_quad is None

    def test_constant_path(self):
        rep = estimate_regularity(SamplePath(Grid(2, 1.0, 5), np.full(25, -0.7)))
        assert rep.lipschitz_L == 0.0
        assert rep.c_sup == pytest.approx(0.7)
        assert rep.c_gap == math.inf

    def test_gap_between_two_peaks(self):
        g = Grid(1, 1.0, 201)
        f = lambda x: math.exp(-((x - 0.3) ** 2) / 0.005) + 0.6 * math.exp(-((x - 0.7) ** 2) / 0.005)
        rep = estimate_regularity(SamplePath.from_function(g, f))
        assert rep.c_gap == pytest.approx(0.4, abs=1e-3)

    def test_scale_covariance(self):
        path = sample_prior(SPEC, Grid(1, 1.0, 60), seed=5)
        a = estimate_regularity(path)
        b = estimate_regularity(SamplePath(path.grid, 3.0 * path.values))
        for key in ("c_sup", "lipschitz_L", "c_gap", "c_quad", "c_lin"):
            va, vb = getattr(a, key), getattr(b, key)
            if va is None or va == math.inf:
                assert vb == va
            else:
                assert vb == pytest.approx(3.0 * va, rel=1e-12)

    def test_lipschitz_estimate(self):
        rep = estimate_regularity(SamplePath.from_function(Grid(1, 1.0, 11), lambda x: 2.0 * x))
        assert rep.lipschitz_L == pytest.approx(2.0)

    def test_needs_three_points(self):
        with pytest.raises(InputError):
            estimate_regularity(SamplePath(Grid(1, 1.0, 2), [0.0, 1.0]))

    def test_c_sup_dominates_f_star(self):
        rep = estimate_regularity(sample_prior(SPEC, Grid(2, 1.0, 12), seed=2))
        assert rep.c_sup >= 0 and rep.c_gap > 0

    def test_strict_local_maxima_excludes_ties(self):
        p = SamplePath(Grid(1, 1.0, 5), [0.0, 1.0, 1.0, 0.0, 0.5])
        np.testing.assert_array_equal(strict_local_maxima(p), [4])

    def test_strict_local_maxima_diagonal_neighbours(self):
        v = np.zeros(9)
        v[4] = 1.0
        v[8] = 2.0  # diagonal neighbour of the centre
        np.testing.assert_array_equal(strict_local_maxima(SamplePath(Grid(2, 1.0, 3), v)), [8])
