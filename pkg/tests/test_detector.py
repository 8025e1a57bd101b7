"""Per-instance MMSE metrics against independent oracles.

Gauss-Jordan inversion checks the SINR/MMSE path, an eigensolver checks
the mutual informations, and central differences check the I-MMSE
derivative identity.  Hand-computed eigenvalue cases pin the exact
numbers the formulas must hit.
"""

import math

import numpy as np
import pytest

from corrmmse.channel import ChannelInstance
from corrmmse.detector import (
    compute_metrics,
    immse_residual,
    jensen_bound,
    metrics_from_primitives,
    mmse_approx,
    mmse_exact,
    mutual_info,
    mutual_info_minkowski_lb,
    sinr_mmse,
    spectral_efficiency,
)
from corrmmse.errors import SingularChannel
from corrmmse.numerics import sweep_primitives

import oracles


@pytest.fixture
def identity5():
    return ChannelInstance.from_h(np.eye(5))


@pytest.fixture
def diag12():
    # Gram eigenvalues {1, 4}: geometric mean 2
    return ChannelInstance.from_h(np.diag([1.0, 2.0]))


class TestSinrMmse:
    def test_identity_channel(self, identity5):
        np.testing.assert_allclose(sinr_mmse(identity5, 3.0), np.full(5, 3.0), atol=1e-12)

    def test_zero_snr(self, identity5):
        np.testing.assert_array_equal(sinr_mmse(identity5, 0.0), np.zeros(5))

    def test_matches_gauss_jordan_oracle(self, rng):
        for _ in range(10):
            h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            inst = ChannelInstance.from_h(h)
            gamma = float(rng.uniform(0.05, 20.0))
            inv = oracles.gauss_jordan_inverse(np.eye(4) + gamma * inst.gram)
            expect = 1.0 / np.real(np.diagonal(inv)) - 1.0
            np.testing.assert_allclose(sinr_mmse(inst, gamma), expect, atol=1e-9)


class TestMmseExact:
    def test_zero_snr_is_one(self, diag12):
        assert mmse_exact(diag12, 0.0) == 1.0

    def test_identity_channel(self, identity5):
        for gamma in (0.1, 1.0, 42.0):
            assert abs(mmse_exact(identity5, gamma) - 1.0 / (1.0 + gamma)) < 1e-14

    def test_sinr_identity(self, composite_instances):
        # eps^2 = (1/K) sum 1/(1 + SINR_k), algebraically exact
        for inst in composite_instances[:25]:
            for gamma in (0.1, 1.0, 10.0, 1000.0):
                lhs = mmse_exact(inst, gamma)
                rhs = np.mean(1.0 / (1.0 + sinr_mmse(inst, gamma)))
                assert abs(lhs - rhs) < 1e-12

    def test_monotone_nonincreasing(self, composite_instances):
        gammas = np.geomspace(1e-3, 1e5, 40)
        for inst in composite_instances[:10]:
            vals = [mmse_exact(inst, g) for g in gammas]
            assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))
            assert 0.0 < min(vals) and max(vals) <= 1.0


class TestMmseApprox:
    def test_equals_exact_for_identity(self, identity5):
        for gamma in (0.0, 0.5, 7.0, 1e4):
            assert abs(mmse_approx(identity5, gamma) - mmse_exact(identity5, gamma)) < 1e-12

    def test_hand_computed_two_user_case(self, diag12):
        # eigenvalues {1, 4}: eps_hat^2 = 1/(1+2), eps^2 = (1/2)(1/2 + 1/5)
        assert abs(mmse_approx(diag12, 1.0) - 1.0 / 3.0) < 1e-14
        assert abs(mmse_exact(diag12, 1.0) - 0.35) < 1e-14

    def test_zero_snr(self, diag12):
        assert mmse_approx(diag12, 0.0) == 1.0

    def test_strictly_decreasing(self, composite_instances):
        gammas = np.geomspace(1e-3, 1e5, 40)
        for inst in composite_instances[:5]:
            vals = [mmse_approx(inst, g) for g in gammas]
            assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_singular_channel_raises(self):
        inst = ChannelInstance.from_h(np.array([[1.0, 1.0], [1.0, 1.0]]))
        with pytest.raises(SingularChannel):
            mmse_approx(inst, 1.0)

    def test_matches_spectrum_oracle(self, composite_instances):
        for inst in composite_instances[:10]:
            lam = np.linalg.eigvalsh(inst.gram)
            for gamma in (0.3, 3.0, 300.0):
                assert abs(
                    mmse_approx(inst, gamma) - oracles.scalar_mmse_approx(lam, gamma)
                ) < 1e-9
                assert abs(
                    mmse_exact(inst, gamma) - oracles.scalar_mmse_exact(lam, gamma)
                ) < 1e-9


class TestMutualInfo:
    def test_identity_equality(self, identity5):
        for gamma in (0.5, 4.0):
            expect = 5 * math.log2(1.0 + gamma)
            assert abs(mutual_info(identity5, gamma) - expect) < 1e-12
            assert abs(mutual_info_minkowski_lb(identity5, gamma) - expect) < 1e-12

    def test_zero_snr(self, diag12):
        assert mutual_info(diag12, 0.0) == 0.0
        assert mutual_info_minkowski_lb(diag12, 0.0) == 0.0

    def test_matches_eigenvalue_oracle(self, rng):
        for _ in range(10):
            h = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
            inst = ChannelInstance.from_h(h)
            ie = mutual_info(inst, 10.0)
            ilb = mutual_info_minkowski_lb(inst, 10.0)
            assert abs(ie - oracles.eig_mutual_info_bits(inst.gram, 10.0)) < 1e-9
            assert ie - ilb > 0.0

    def test_gap_saturates_at_high_snr(self, diag12):
        gap = lambda g: mutual_info(diag12, g) - mutual_info_minkowski_lb(diag12, g)
        assert abs(gap(1e6) - gap(1e4)) < 1e-3


class TestSpectralEfficiencyAndJensen:
    def test_identity_equality(self, identity5):
        for gamma in (0.5, 8.0):
            expect = math.log2(1.0 + gamma)
            assert abs(spectral_efficiency(identity5, gamma) - expect) < 1e-12
            assert abs(jensen_bound(identity5, gamma) - expect) < 1e-12

    def test_zero_snr(self, identity5):
        assert spectral_efficiency(identity5, 0.0) == 0.0
        assert jensen_bound(identity5, 0.0) == 0.0

    def test_bound_direction_on_random_instances(self, composite_instances):
        # convexity of -log2: per-instance Jensen direction, 200 instances
        for inst in composite_instances:
            for gamma in (0.1, 1.0, 10.0, 100.0):
                assert spectral_efficiency(inst, gamma) >= jensen_bound(inst, gamma) - 1e-10


class TestImmseResidual:
    def test_identity_analytic_case(self, identity5):
        # gamma d/dgamma [K ln(1+gamma)] = K gamma/(1+gamma) = K (1 - eps^2)
        assert immse_residual(identity5, 1.0, 1e-5) < 1e-6

    def test_random_instances(self, composite_instances):
        for inst in composite_instances[:20]:
            for gamma in (0.1, 1.0, 10.0):
                assert immse_residual(inst, gamma, 1e-5 * gamma) < 1e-5 * inst.k

    def test_second_order_in_delta(self, composite_instances):
        inst = composite_instances[0]
        r1 = immse_residual(inst, 1.0, 2e-3)
        r2 = immse_residual(inst, 1.0, 1e-3)
        assert 3.0 < r1 / r2 < 5.0

    def test_argument_validation(self, identity5):
        with pytest.raises(ValueError):
            immse_residual(identity5, 0.0, 1e-5)
        with pytest.raises(ValueError):
            immse_residual(identity5, 1.0, 2.0)


class TestComputeMetrics:
    def test_consistent_with_scalar_functions(self, composite_instances):
        inst = composite_instances[3]
        m = compute_metrics(inst, 2.5)
        assert m.mmse_exact == mmse_exact(inst, 2.5)
        assert m.mmse_approx == mmse_approx(inst, 2.5)
        assert m.mutual_info == mutual_info(inst, 2.5)
        assert m.mutual_info_lb == mutual_info_minkowski_lb(inst, 2.5)
        assert m.spectral_eff == spectral_efficiency(inst, 2.5)
        assert m.jensen_lb == jensen_bound(inst, 2.5)
        np.testing.assert_array_equal(m.sinr_per_user, sinr_mmse(inst, 2.5))

    def test_invariants(self, composite_instances):
        for inst in composite_instances[:20]:
            m = compute_metrics(inst, 5.0)
            assert 0.0 < m.mmse_exact <= 1.0
            assert 0.0 < m.mmse_approx <= 1.0
            assert np.all(m.sinr_per_user >= 0.0)
            assert m.mutual_info >= m.mutual_info_lb >= 0.0


def test_metrics_from_primitives_matches_scalar_path(composite_instances):
    instances = composite_instances[:6]
    grams = np.stack([inst.gram for inst in instances])
    gammas = np.array([0.0, 0.7, 30.0])
    vals = metrics_from_primitives(gammas, *reversed_primitives(grams, gammas), k=7)
    for t, inst in enumerate(instances):
        for j, gamma in enumerate(gammas):
            m = compute_metrics(inst, float(gamma))
            expect = [
                m.mmse_exact,
                m.mmse_approx,
                m.spectral_eff,
                m.jensen_lb,
                m.mutual_info,
                m.mutual_info_lb,
            ]
            np.testing.assert_allclose(vals[t, :, j], expect, atol=1e-11)


def reversed_primitives(grams, gammas):
    logdet_g, inv_diag, logdet_reg = sweep_primitives(grams, gammas)
    return logdet_g, inv_diag, logdet_reg
