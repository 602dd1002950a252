import math

import numpy as np
import pytest

from gpucb_lab.errors import InputError, NumericError
from gpucb_lab.gp import GpState, information_gain
from gpucb_lab.kernels import KernelSpec, cross_kernel, gram_matrix

SPEC = KernelSpec.matern(2.5, 0.3)


def dense_posterior(spec, X, y, s2, Xq):
    """Independent oracle: dense solve against K + s2 I with no factor reuse."""
    A = gram_matrix(spec, X) + s2 * np.eye(len(X))
    Kq = cross_kernel(spec, X, Xq)
    mean = Kq.T @ np.linalg.solve(A, y)
    var = 1.0 - np.einsum("ij,ij->j", Kq, np.linalg.solve(A, Kq))
    return mean, var


class TestPosterior:
    def test_prior(self):
        mean, var = GpState(SPEC, 3.0).posterior([0.4])
        assert (mean, var) == (0.0, 1.0)

    def test_one_observation_closed_form(self):
        state = GpState(SPEC, 3.0).observe([0.2], 2.0)
        mean, var = state.posterior([0.2])
        assert mean == pytest.approx(0.5, abs=1e-15)
        assert var == pytest.approx(0.75, abs=1e-15)

    def test_matches_dense_solve(self):
        rng = np.random.default_rng(0)
        X = rng.uniform(0, 1, (10, 2))
        y = rng.normal(size=10)
        state = GpState.from_data(SPEC, 0.5, X, y)
        Xq = rng.uniform(0, 1, (50, 2))
        mean, var = state.posterior_batch(Xq)
        m_ref, v_ref = dense_posterior(SPEC, X, y, 0.5, Xq)
        np.testing.assert_allclose(mean, m_ref, atol=1e-8)
        np.testing.assert_allclose(var, v_ref, atol=1e-8)

    def test_one_dimensional_batch(self):
        state = GpState.from_data(SPEC, 1.0, np.array([0.1, 0.5]), [1.0, -1.0])
        mean, var = state.posterior_batch(np.array([0.1, 0.3, 0.5]))
        assert mean.shape == var.shape == (3,)

    def test_rejects_non_finite_query(self):
        state = GpState(SPEC, 1.0, dim=1)
        with pytest.raises(InputError):
            state.posterior_batch(np.array([math.inf]))

    def test_rejects_wrong_dimension(self):
        state = GpState(SPEC, 1.0).observe([0.1, 0.2], 0.0)
        with pytest.raises(InputError):
            state.posterior([0.1])

    def test_variance_clamped(self):
        state = GpState(SPEC, 1e-10)
        for _ in range(3):
            state.observe([0.5], 0.0)
        _, var = state.posterior([0.5])
        assert 0.0 <= var <= 1.0


class TestObserve:
    def test_factor_matches_from_scratch(self):
        rng = np.random.default_rng(1)
        X = rng.uniform(0, 1, (50, 1))
        state = GpState.from_data(SPEC, 0.3, X, rng.normal(size=50))
        L = np.linalg.cholesky(gram_matrix(SPEC, X) + 0.3 * np.eye(50))
        np.testing.assert_allclose(state.factor, L, atol=1e-8)
        rec = state.factor @ state.factor.T
        A = gram_matrix(SPEC, X) + 0.3 * np.eye(50)
        assert np.linalg.norm(rec - A) / np.linalg.norm(A) <= 1e-8

    def test_lengths_agree(self):
        state = GpState.from_data(SPEC, 1.0, np.linspace(0, 1, 7), np.zeros(7))
        assert state.t == len(state.inputs) == len(state.outputs) == len(state.info_gain_terms) == 7

    def test_duplicate_with_noise_shrinks_variance(self):
        state = GpState(SPEC, 3.0).observe([0.4], 1.0)
        _, v1 = state.posterior([0.4])
        state.observe([0.4], 1.2)
        _, v2 = state.posterior([0.4])
        assert v2 < v1

    def test_duplicate_without_noise_fails_with_advice(self):
        state = GpState(SPEC, 0.0).observe([0.4], 1.0)
        with pytest.raises(NumericError, match="jitter"):
            state.observe([0.4], 1.0)

    def test_jitter_rescues_duplicates(self):
        state = GpState(SPEC, 0.0, jitter=1e-6).observe([0.4], 1.0)
        state.observe([0.4], 1.0)
        assert state.t == 2

    def test_rejects_non_finite(self):
        with pytest.raises(InputError):
            GpState(SPEC, 1.0).observe([0.1], math.nan)

    def test_copy_is_independent(self):
        a = GpState(SPEC, 1.0).observe([0.1], 1.0)
        b = a.copy().observe([0.9], 0.0)
        assert (a.t, b.t) == (1, 2)

    def test_variance_never_increases(self):
        rng = np.random.default_rng(2)
        probes = rng.uniform(0, 1, (50, 1))
        state = GpState(SPEC, 0.7, dim=1)
        _, prev = state.posterior_batch(probes)
        for x in rng.uniform(0, 1, 30):
            state.observe([x], rng.normal())
            _, var = state.posterior_batch(probes)
            assert np.all(var <= prev + 1e-9)
            prev = var

    def test_negative_noise_rejected(self):
        with pytest.raises(InputError):
            GpState(SPEC, -1.0)


class TestInformationGain:
    def test_identical_points(self):
        X = np.zeros((10, 1))
        assert information_gain(SPEC, X, 3.0) == pytest.approx(0.5 * math.log(1 + 10 / 3), abs=1e-12)
        # the quoted 6-digit value 0.733170 is a rounding of 0.7331685...
        assert information_gain(SPEC, X, 3.0) == pytest.approx(0.733170, abs=2e-6)

    def test_single_point(self):
        assert information_gain(SPEC, [[0.3]], 1.0) == pytest.approx(0.346574, abs=1e-6)

    def test_matches_eigenvalue_sum(self):
        X = np.random.default_rng(3).uniform(0, 1, (20, 2))
        lam = np.linalg.eigvalsh(gram_matrix(SPEC, X))
        ref = 0.5 * np.sum(np.log1p(np.clip(lam, 0, None) / 0.8))
        assert information_gain(SPEC, X, 0.8) == pytest.approx(ref, abs=1e-10)

    def test_telescoping(self):
        rng = np.random.default_rng(4)
        X = rng.uniform(0, 1, (100, 1))
        state = GpState.from_data(SPEC, 0.5, X, rng.normal(size=100))
        assert state.info_gain == pytest.approx(information_gain(SPEC, X, 0.5), abs=1e-6)

    @pytest.mark.parametrize("T", [1, 2, 17, 200])
    def test_case_one_identity(self, T):
        state = GpState(SPEC, 3.0, dim=1)
        for _ in range(T):
            state.observe([0.25], 0.0)
        assert state.info_gain == pytest.approx(0.5 * math.log1p(T / 3.0), abs=1e-9)

    def test_needs_positive_noise(self):
        with pytest.raises(InputError):
            information_gain(SPEC, [[0.0]], 0.0)
