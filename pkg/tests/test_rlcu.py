import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm
from scipy.stats import chisquare

import oracles
from conftest import PAULI2_TERMS
from hamsim.channels import NoiseModel, basis_state, exact_evolution, expectation
from hamsim.rlcu import (
    SegmentSample,
    ancilla_round_states,
    even_poisson_mgf,
    exact_moments,
    k_moment_bounds,
    lcu_one_norm,
    rlcu_bias_bound,
    run_rlcu_estimate,
    sample_segment,
    sample_taylor_orders,
    segment_operator_sum,
    segment_unitary,
    taylor_order_pmf,
)

ZI = oracles.pauli("ZI")


def _exact(h, t, o, rho0):
    u = exact_evolution(h, t)
    return expectation(o, u @ rho0 @ u.conj().T)


class TestSeries:
    def test_one_norm_example(self):
        assert lcu_one_norm(1.0) == pytest.approx(1.98518, abs=1e-5)

    @given(st.floats(0.0, 6.0))
    def test_one_norm_matches_oracle(self, lam):
        _, w = oracles.taylor_weights(lam)
        assert lcu_one_norm(lam) == pytest.approx(math.fsum(w), rel=1e-12)

    @given(st.floats(0.0, 4.0))
    def test_one_norm_majorant(self, lam):
        assert lcu_one_norm(lam) ** 2 <= math.exp(2 * lam * lam) * (1 + 1e-12)

    def test_pmf_normalized(self):
        ks, ps = taylor_order_pmf(0.7)
        assert np.all(ks % 2 == 0)
        assert ps.sum() == pytest.approx(1.0, abs=1e-15)

    def test_moment_bounds_examples(self):
        assert k_moment_bounds(0.0) == (0.0, 0.0)
        m, v = k_moment_bounds(1.0)
        assert m == pytest.approx(0.76159, abs=1e-5)
        assert v == pytest.approx(1.76159, abs=1e-5)

    @pytest.mark.parametrize("lam", [0.25, 0.5, 1.0, 2.0])
    def test_mgf_derivative_gives_mean(self, lam):
        h = 1e-5
        fd = (even_poisson_mgf(lam, h) - even_poisson_mgf(lam, -h)) / (2 * h)
        assert fd == pytest.approx(lam * math.tanh(lam), abs=1e-8)

    @given(st.floats(0.01, 3.0))
    def test_thinned_moments_below_bounds(self, lam):
        m = exact_moments(lam)
        mb, vb = k_moment_bounds(lam)
        assert m["mean_p"] <= mb + 1e-12
        assert m["var_p"] <= vb + 1e-12

    def test_negative_lambda(self):
        with pytest.raises(ValueError):
            lcu_one_norm(-1.0)


class TestSampler:
    @pytest.mark.parametrize("lam", [0.25, 0.5, 1.0])
    def test_chi_square(self, lam):
        draws = sample_taylor_orders(lam, 1_000_000, np.random.default_rng(int(lam * 1000)))
        ks, w = oracles.taylor_weights(lam)
        probs = w / w.sum()
        expected = probs * draws.size
        keep = int(np.searchsorted(-expected, -5.0))  # bins with at least five expected counts
        obs = np.array([np.sum(draws == k) for k in ks[:keep]] + [np.sum(draws >= ks[keep])])
        exp = np.append(expected[:keep], expected[keep:].sum())
        assert chisquare(obs, exp * obs.sum() / exp.sum()).pvalue > 1e-3

    def test_thinning_lowers_mean(self):
        rng = np.random.default_rng(5)
        lam = 1.0
        p_draws = sample_taylor_orders(lam, 400_000, rng)
        q_draws = rng.poisson(lam, 900_000)
        q_draws = q_draws[q_draws % 2 == 0]
        se = math.hypot(p_draws.std() / math.sqrt(p_draws.size), q_draws.std() / math.sqrt(q_draws.size))
        assert p_draws.mean() <= q_draws.mean() + 4 * se

    def test_zero_lambda(self):
        assert np.all(sample_taylor_orders(0.0, 100, np.random.default_rng(0)) == 0)


class TestSegments:
    def test_k0_example(self):
        s = SegmentSample(0, (), 0, math.atan(1.0), 1)
        assert s.rotation_angle == pytest.approx(math.pi / 4)
        assert s.sign == 1

    def test_k2_sign(self, pauli2):
        rng = np.random.default_rng(1)
        for _ in range(200):
            s = sample_segment(pauli2, 1.5, rng)
            if s.taylor_order == 2:
                assert s.sign == -1
                assert len(s.pauli_indices) == 2
                return
        pytest.fail("no k = 2 segment drawn")

    def test_sign_includes_coefficient_signs(self):
        from hamsim.pauli import Hamiltonian

        terms = [(-1.0, "X"), (0.5, "Z")]
        h = Hamiltonian.from_terms(terms)
        rng = np.random.default_rng(8)
        for _ in range(300):
            s = sample_segment(h, 1.2, rng)
            coef = [terms[i][0] for i in s.pauli_indices]
            assert s.sign == (-1) ** (s.taylor_order // 2) * int(np.prod(np.sign(coef)))
            c_m, lbl_m = terms[s.rotation_index]
            u = expm(-1j * np.sign(c_m) * s.rotation_angle * oracles.pauli(lbl_m))
            for i in reversed(s.pauli_indices):
                u = oracles.pauli(terms[i][1]) @ u
            np.testing.assert_allclose(segment_unitary(s, h), s.sign * u, atol=1e-14)

    def test_odd_order_rejected(self):
        with pytest.raises(ValueError):
            SegmentSample(1, (0,), 0, 0.1, 1)

    def test_operator_sum_example(self, pauli2):
        np.testing.assert_allclose(segment_operator_sum(pauli2, 0.5, kmax=20),
                                   oracles.evolve(PAULI2_TERMS, 0.5 / 2.0), atol=1e-8)

    def test_operator_sum_factorial_convergence(self, pauli2):
        target = oracles.evolve(PAULI2_TERMS, 1.0 / 2.0)
        errs = [np.linalg.norm(segment_operator_sum(pauli2, 1.0, kmax=K) - target, 2) for K in (2, 4, 6, 8)]
        for K, e in zip((2, 4, 6, 8), errs):
            assert e <= 2.0 * lcu_one_norm(1.0) / math.factorial(K + 1)
        assert all(b < a for a, b in zip(errs, errs[1:]))

    def test_sampled_average_matches_operator_sum(self, pauli2):
        rng = np.random.default_rng(11)
        lam, n = 0.8, 20_000
        acc = sum(segment_unitary(sample_segment(pauli2, lam, rng), pauli2) for _ in range(n))
        est = lcu_one_norm(lam) * acc / n
        target = oracles.evolve(PAULI2_TERMS, lam / 2.0)
        assert np.max(np.abs(est - target)) < 5 * lcu_one_norm(lam) / math.sqrt(n)


class TestEstimator:
    def test_zero_time_exact(self, pauli2):
        rho0 = basis_state(2, "10")
        est = run_rlcu_estimate(pauli2, 0.0, 1, ZI, rho0, shots=64, seed=3)
        assert est.mean == expectation(ZI, rho0)
        assert est.variance == 0.0

    def test_noiseless_example(self, pauli2):
        rho0 = basis_state(2)
        est = run_rlcu_estimate(pauli2, 0.5, 2, ZI, rho0, shots=1_000_000, seed=0)
        assert abs(est.mean - _exact(pauli2, 0.5, ZI, rho0)) <= est.halfwidth

    def test_unbiased_over_seeds(self, pauli2):
        rho0 = basis_state(2)
        exact = _exact(pauli2, 0.5, ZI, rho0)
        z = []
        for seed in range(20):
            est = run_rlcu_estimate(pauli2, 0.5, 2, ZI, rho0, shots=20_000, seed=seed)
            z.append((est.mean - exact) / est.stderr)
        assert abs(np.mean(z)) <= 4 / math.sqrt(20)

    def test_variance_within_gamma_squared(self, pauli2):
        rho0 = basis_state(2, "plus")
        means = []
        for seed in range(20):
            est = run_rlcu_estimate(pauli2, 0.6, 2, ZI, rho0, shots=5_000, seed=100 + seed)
            assert est.variance <= est.gamma_rlcu**2
            means.append(est.mean)
        # the spread of independent means, rescaled by M, sits below Gamma^2 up to chi-square slack
        assert np.var(means, ddof=1) * 5_000 <= est.gamma_rlcu**2 * 2.0

    def test_noisy_bias_within_bound(self, pauli2):
        rho0 = basis_state(2)
        t, r = 0.5, 2
        est = run_rlcu_estimate(pauli2, t, r, ZI, rho0, NoiseModel(0.01), shots=200_000, seed=9)
        bound = rlcu_bias_bound(est.gamma_rlcu, 0.01, 0.0, pauli2.beta * t, r)
        assert abs(est.mean - _exact(pauli2, t, ZI, rho0)) <= bound + 4 * est.stderr

    def test_measurement_mode_is_unbiased(self, pauli2):
        rho0 = basis_state(2)
        est = run_rlcu_estimate(pauli2, 0.5, 2, ZI, rho0, shots=200_000, seed=4, measure=True)
        assert abs(est.mean - _exact(pauli2, 0.5, ZI, rho0)) <= 4 * est.stderr

    def test_worker_count_independent(self, pauli2):
        rho0 = basis_state(2)
        a = run_rlcu_estimate(pauli2, 0.5, 2, ZI, rho0, shots=30_000, seed=2, workers=1)
        b = run_rlcu_estimate(pauli2, 0.5, 2, ZI, rho0, shots=30_000, seed=2, workers=3)
        assert a == b

    def test_observable_norm_checked(self, pauli2):
        with pytest.raises(ValueError):
            run_rlcu_estimate(pauli2, 0.5, 2, 2 * ZI, basis_state(2), shots=10)


class TestAncilla:
    def test_populations_stay_half(self, heis3):
        psi0 = oracles.ket("100")
        for seed in range(5):
            for rho_a in ancilla_round_states(heis3, 0.4, 3, psi0, np.random.default_rng(seed)):
                np.testing.assert_allclose(np.diag(rho_a).real, [0.5, 0.5], atol=1e-10)
                np.testing.assert_allclose(rho_a, rho_a.conj().T, atol=1e-12)
                assert abs(rho_a[0, 1]) <= 0.5 + 1e-12
