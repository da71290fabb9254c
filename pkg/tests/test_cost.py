import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from hamsim.channels import NoiseModel, basis_state, exact_evolution, expectation
from hamsim.cost import (
    RlcuCostInputs,
    TrotterCostInputs,
    c_k,
    chebyshev_halfwidth,
    critical_error,
    crossover_depth,
    depth_condition_rhs,
    depth_condition_terms,
    gst_budget,
    gst_ratio,
    rlcu_cost_report,
    rlcu_exponent,
    rlcu_mse_bound,
    rlcu_optimal_r,
    rlcu_samples,
    rlcu_error_bound,
    sni_budgets,
    trotter_cost_report,
    trotter_error_bound,
    trotter_m_branches,
    trotter_optimal_depth_noqem,
    trotter_optimal_depth_pec,
    trotter_rmse_noqem,
    trotter_samples,
)
from hamsim.errors import InfeasibleSegmentationError
from hamsim.rlcu import run_rlcu_estimate

REF = TrotterCostInputs(1.0, 1, 2, 0.01, 0.01)

trotter_inputs = st.builds(
    TrotterCostInputs,
    alpha_k=st.floats(0.1, 10.0),
    k=st.sampled_from([1, 2, 4]),
    L=st.integers(1, 6),
    gamma=st.floats(1e-4, 1e-2),
    gamma_prime=st.floats(1e-4, 2e-2),
)


class TestTrotterFloor:
    def test_error_bound_example(self):
        assert trotter_error_bound(REF) == pytest.approx(0.28284, abs=1e-5)
        assert c_k(1) == 2.0

    def test_c2(self):
        assert c_k(2) == pytest.approx(1.88988, abs=1e-5)

    def test_noiseless_floor(self):
        assert trotter_error_bound(TrotterCostInputs(1.0, 2, 3, 0.0, 0.0)) == 0.0

    def test_optimal_depth_example(self):
        assert trotter_optimal_depth_noqem(REF) == pytest.approx(math.sqrt(50), rel=1e-12)
        doubled = TrotterCostInputs(1.0, 1, 2, 0.02, 0.02)
        assert trotter_optimal_depth_noqem(doubled) == pytest.approx(math.sqrt(50) / math.sqrt(2), rel=1e-12)

    @given(trotter_inputs)
    def test_optimal_depth_matches_golden_section(self, inp):
        d = trotter_optimal_depth_noqem(inp)
        res = minimize_scalar(lambda u: trotter_rmse_noqem(inp, math.exp(u)), bracket=(math.log(d) - 1, math.log(d) + 1),
                              method="golden", tol=1e-12)
        assert math.exp(res.x) == pytest.approx(d, rel=1e-6)
        # the minimum value is the error floor
        assert trotter_rmse_noqem(inp, d) == pytest.approx(trotter_error_bound(inp), rel=1e-12)

    @given(trotter_inputs)
    def test_stationarity_residual(self, inp):
        d = trotter_optimal_depth_noqem(inp)
        grad = -inp.k * inp.alpha_k / d ** (inp.k + 1) + inp.L * inp.gamma
        assert abs(grad) < 1e-9 * inp.L * inp.gamma


class TestCritical:
    def test_example(self):
        assert critical_error(REF) == pytest.approx(0.02)

    def test_quadratic_in_gamma_prime_at_k2(self):
        a = critical_error(TrotterCostInputs(1.0, 2, 2, 0.01, 0.01))
        b = critical_error(TrotterCostInputs(1.0, 2, 2, 0.01, 0.02))
        assert b / a == pytest.approx(4.0)

    def test_vanishing_rate(self):
        assert critical_error(TrotterCostInputs(1.0, 1, 2, 0.01, 0.0)) == 0.0

    @given(trotter_inputs)
    def test_crossover_identity(self, inp):
        a, b = depth_condition_terms(inp, crossover_depth(inp))
        assert b == pytest.approx(a, rel=4 * np.finfo(float).eps)


class TestPecDepth:
    @given(trotter_inputs, st.floats(-3, 3))
    def test_residual(self, inp, log_ratio):
        eps = critical_error(inp) * 10.0**log_ratio
        d = trotter_optimal_depth_pec(inp, eps)
        assert abs(eps**2 - depth_condition_rhs(inp, d)) < 1e-12 * eps**2

    def test_small_eps_limit(self):
        eps = critical_error(REF) / 1e4
        d = trotter_optimal_depth_pec(REF, eps)
        assert d == pytest.approx((REF.alpha_k / eps) ** (1 / REF.k), rel=1e-3)

    @pytest.mark.parametrize("k", [1, 2])
    def test_large_eps_limit(self, k):
        inp = TrotterCostInputs(1.0, k, 2, 0.01, 0.02)
        eps = critical_error(inp) * 1e4
        expect = k / (inp.gp * inp.L) * (critical_error(inp) / eps) ** (2 / (2 * k + 1))
        assert trotter_optimal_depth_pec(inp, eps) == pytest.approx(expect, rel=0.02)

    def test_rejects_nonpositive_eps(self):
        with pytest.raises(ValueError):
            trotter_optimal_depth_pec(REF, 0.0)


class TestTrotterSamples:
    def test_critical_branch_value(self):
        assert trotter_m_branches(REF, 0.02)["critical"] == pytest.approx(math.e**2 / 0.02**2)
        assert trotter_m_branches(REF, 0.02)["critical"] == pytest.approx(18473, abs=1)

    def test_small_eps_branch_within_factor_two(self):
        eps = critical_error(REF) / 10
        s = trotter_samples(REF, eps)
        x = critical_error(REF) / eps
        branch = x * math.exp(2 * x) / eps**2
        assert s.branches["small_eps"] == pytest.approx(branch, rel=1e-12)
        assert branch / 2 <= s.M <= 2 * branch

    def test_large_eps_limit(self):
        eps = critical_error(REF) * 1e3
        assert 1.0 <= trotter_samples(REF, eps).M * eps**2 <= 1.5

    @given(trotter_inputs)
    def test_monotone_in_eps(self, inp):
        eps = critical_error(inp) * np.logspace(-1.5, 2, 12)
        ms = [trotter_samples(inp, e).M for e in eps]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(ms, ms[1:]))

    def test_regime_tags(self):
        assert trotter_samples(REF, 0.01).regime == "below_critical"
        assert trotter_samples(REF, 0.04).regime == "above_critical"


class TestRlcuCost:
    def test_boundary_example(self):
        r, regime = rlcu_optimal_r(RlcuCostInputs.from_t_tilde(10.0, 0.005))
        assert r == pytest.approx(100.0)
        assert regime == "optimized"

    def test_shallow_example(self):
        assert rlcu_optimal_r(RlcuCostInputs.from_t_tilde(1.0, 0.005)) == (1.0, "shallow")

    @given(st.floats(1.0, 40.0), st.floats(1e-4, 0.05))
    def test_integer_grid_argmin(self, tt, gp):
        inp = RlcuCostInputs.from_t_tilde(tt, gp)
        r, regime = rlcu_optimal_r(inp)
        if regime != "optimized":
            return
        grid = np.arange(1, int(4 * r) + 3)
        best = grid[np.argmin([rlcu_exponent(inp, g) for g in grid])]
        assert abs(best - round(r)) <= 1

    def test_samples_example(self):
        inp = RlcuCostInputs.from_t_tilde(10.0, 0.005)
        assert rlcu_samples(inp, 0.1) == pytest.approx(math.e**2 / 0.01, rel=1e-12)
        assert rlcu_samples(inp, 0.1, r=100.0) == pytest.approx(738.91, abs=0.01)

    def test_dominance_example(self):
        inp = RlcuCostInputs.from_t_tilde(20.0, 0.005)
        r, _ = rlcu_optimal_r(inp)
        assert rlcu_exponent(inp, r) == pytest.approx(4.0)
        assert rlcu_exponent(inp, 400.0) == pytest.approx(5.0)

    def test_noiseless_limit(self):
        inp = RlcuCostInputs.from_t_tilde(3.0, 0.0)
        assert rlcu_samples(inp, 0.1, r=4.0) == pytest.approx(math.exp(9 / 4) / 0.01)

    @given(st.floats(0.5, 30.0), st.floats(1e-4, 0.05), st.floats(0, 0.01))
    def test_collapsed_exponent(self, tt, gp, gc):
        inp = RlcuCostInputs.from_t_tilde(tt, gp, gc)
        r, regime = rlcu_optimal_r(inp)
        if regime == "optimized":
            assert rlcu_exponent(inp, r) == pytest.approx(2 * math.sqrt(2 * gp) * tt + 2 * gc * tt)
            assert rlcu_exponent(inp, r) <= rlcu_exponent(inp, tt * tt) + 1e-12

    def test_mse_bound_examples(self):
        inp = RlcuCostInputs.from_t_tilde(2.0, 0.0)
        assert rlcu_mse_bound(inp, 4.0, 100) == pytest.approx(math.e / 100)
        a = rlcu_mse_bound(RlcuCostInputs.from_t_tilde(2.0, 0.01), 4.0, 100)
        assert rlcu_mse_bound(RlcuCostInputs.from_t_tilde(2.0, 0.01), 4.0, 200) < a
        assert rlcu_mse_bound(RlcuCostInputs.from_t_tilde(2.0, 0.02), 4.0, 100) > a

    @given(st.floats(0.5, 5.0), st.floats(0, 0.05), st.floats(0, 0.05), st.floats(0.5, 20))
    def test_mse_bound_dominates_approximation(self, tt, gp, gc, r):
        inp = RlcuCostInputs.from_t_tilde(tt, gp, gc)
        assert rlcu_mse_bound(inp, r, 1.0) >= math.exp(rlcu_exponent(inp, r)) * (1 - 1e-12)

    def test_error_bound_example(self):
        b, r = rlcu_error_bound(5.0, 0.01)
        assert r == pytest.approx(25.0, rel=1e-8)
        assert b == pytest.approx(2 * math.e * 0.01 * 25, rel=1e-10)
        assert b == pytest.approx(1.3591, abs=1e-4)

    @given(st.floats(0.5, 8.0), st.floats(1e-3, 0.05), st.floats(0.0, 5.0))
    def test_error_bound_argmin_is_cubic_root(self, bt, gamma, ratio):
        a = bt * bt
        c = ratio
        roots = np.roots([1.0, -a, -c * a, -c * a * a])
        root = max(z.real for z in roots if abs(z.imag) < 1e-9 and z.real > 0)
        _, r = rlcu_error_bound(bt, gamma, ratio * gamma)
        assert r == pytest.approx(root, rel=1e-8)

    def test_error_bound_requires_gamma(self):
        with pytest.raises(ValueError):
            rlcu_error_bound(1.0, 0.0)


class TestBudgets:
    def test_gst_examples(self):
        assert gst_budget(100, 0.01) == pytest.approx(1e8)
        assert gst_budget(200, 0.01) == pytest.approx(4e8)
        assert gst_budget(100, 0.01, math.e) == pytest.approx(math.e**2 * 1e8)

    def test_gst_ratio_small_eps_suppression(self):
        eps = critical_error(REF) / 8
        g = gst_ratio(REF, eps)
        assert g["branch_small_eps"] == pytest.approx(REF.k / REF.gp * math.exp(-16), rel=1e-12)
        # the exact ratio sits below the branch by at most the e-factor of the small-eps depth shift
        assert g["branch_small_eps"] / math.e**2 <= g["ratio"] <= g["branch_small_eps"]

    def test_gst_ratio_critical(self):
        g = gst_ratio(REF, critical_error(REF))
        assert g["branch_critical"] == pytest.approx(REF.k / REF.gp * math.exp(-2))

    def test_gst_ratio_rlcu_shallow(self):
        g = gst_ratio(RlcuCostInputs.from_t_tilde(2.0, 0.01), 0.01)
        assert g["regime"] == "shallow"
        # M_g / (r M) = r exp(-2 gamma' r) with r = t~^2: order (beta t)^2 in model units
        assert g["ratio"] == pytest.approx(4.0 * math.exp(-0.08), rel=1e-12)
        assert gst_ratio(RlcuCostInputs.from_t_tilde(2.0, 1e-9), 0.01)["ratio"] == pytest.approx(4.0, rel=1e-7)

    def test_sni_noiseless_limit(self):
        b = sni_budgets(1e-12, 100, 0.1, 1)
        assert b["M"] == pytest.approx(100.0)
        assert b["M_qst"] == pytest.approx(100.0)

    def test_sni_four_qd_chain(self):
        q, d, eps = 0.01, 100, 0.1
        b = sni_budgets(q, d, eps, 4 * q * d)
        assert b["q_st"] <= q * d / 4
        assert b["M"] <= eps**-2 * 2 ** (2 * 4) <= eps**-2 * math.exp(8 * q * d)
        assert b["x_exp_bound_holds"] == 1.0

    @pytest.mark.parametrize("q", [0.001, 0.005, 0.01])
    @pytest.mark.parametrize("d", [20, 100, 400])
    def test_sni_ratio_bounded(self, q, d):
        b = sni_budgets(q, d, 0.01, 4 * q * d)
        assert b["ratio"] <= 256 * b["ratio_scaling"]
        assert q * d * math.exp(-4 * q * d) <= 1 / (4 * math.e)

    def test_sni_infeasible(self):
        with pytest.raises(InfeasibleSegmentationError):
            sni_budgets(0.01, 100, 0.1, 2)


class TestChebyshev:
    def test_example(self):
        assert chebyshev_halfwidth(0.01, 0.05) == pytest.approx(0.44721, abs=1e-5)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, 1.5])
    def test_alpha_domain(self, alpha):
        with pytest.raises(ValueError):
            chebyshev_halfwidth(0.01, alpha)

    def test_coverage(self):
        rng = np.random.default_rng(17)
        alpha, M = 0.05, 50
        # skewed per-shot law: exponential with unit variance
        est = rng.exponential(1.0, size=(10_000, M)).mean(axis=1)
        a = chebyshev_halfwidth(1.0 / M, alpha)
        assert np.mean(np.abs(est - 1.0) <= a) >= 1 - alpha

    def test_rlcu_pec_pipeline_mse_within_bound(self, pauli2):
        from hamsim.harness import load_scenario

        h = load_scenario("pauli2")
        t, r, M = 0.5, 2, 4000
        noise = NoiseModel(0.005, gamma_c=0.001)
        o = np.kron(np.diag([1.0, -1.0]), np.eye(2))
        rho0 = basis_state(2)
        u = exact_evolution(h, t)
        exact = expectation(o, u @ rho0 @ u.conj().T)
        errs = [run_rlcu_estimate(h, t, r, o, rho0, noise, M, seed, pec=True).mean - exact for seed in range(30)]
        inp = RlcuCostInputs(h.beta, t, noise.gamma_prime, noise.gamma_c)
        assert float(np.mean(np.square(errs))) <= rlcu_mse_bound(inp, r, M)


class TestReports:
    def test_trotter_report_fields(self):
        rep = trotter_cost_report(REF, 0.01, sni_segments=None).to_dict()
        assert rep["algorithm"] == "trotter"
        assert rep["regime"] == "below_critical"
        assert all(v is None or isinstance(v, str) or v >= 0 for v in rep.values())
        assert "model units" in rep["units"]

    def test_rlcu_report_regime(self):
        rep = rlcu_cost_report(RlcuCostInputs.from_t_tilde(20.0, 0.005), 0.1)
        assert rep.regime == "optimized"
        assert rep.r_star == pytest.approx(200.0)
