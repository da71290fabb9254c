"""Randomized LCU: the sampling overhead Gamma = ||alpha||_1^(2r) trades off against circuit depth.

Run with ``python demos/rlcu_demo.py``.  For fixed t~ = beta t the overhead
drops as r grows, while the number of noisy gates grows with r; the estimate
stays unbiased in the noiseless case.
"""

import math

from hamsim.channels import basis_state, exact_evolution, expectation
from hamsim.cost import RlcuCostInputs, rlcu_exponent, rlcu_optimal_r
from hamsim.harness import load_scenario
from hamsim.pauli import PauliString
from hamsim.rlcu import k_moment_bounds, lcu_one_norm, run_rlcu_estimate


def main(shots=200_000):
    h = load_scenario("pauli2")
    o = PauliString.from_label("ZI").to_matrix()
    rho0 = basis_state(2)
    t = 1.0
    u = exact_evolution(h, t)
    exact = expectation(o, u @ rho0 @ u.conj().T)
    print(f"exact <ZI>(t={t}) = {exact:.6f}, beta t = {h.beta * t}")
    print(f"{'r':>3} {'lambda':>7} {'Gamma':>9} {'estimate':>10} {'4 Gamma/sqrt(M)':>16}")
    for r in (1, 2, 4, 8):
        est = run_rlcu_estimate(h, t, r, o, rho0, shots=shots, seed=r)
        print(f"{r:>3} {est.lam:>7.3f} {est.gamma_rlcu:>9.4f} {est.mean:>10.5f} {est.halfwidth:>16.5f}")

    lam = 1.0
    mean_bound, var_bound = k_moment_bounds(lam)
    print(f"\nper segment at lambda={lam}: ||alpha||_1 = {lcu_one_norm(lam):.5f}, "
          f"E[k] <= {mean_bound:.4f}, Var[k] <= {var_bound:.4f} Pauli gates")

    for tt in (5.0, 10.0, 20.0):
        inp = RlcuCostInputs.from_t_tilde(tt, 0.005)
        r, regime = rlcu_optimal_r(inp)
        print(f"t~={tt:>4}: r*={r:7.1f} ({regime}), exponent {rlcu_exponent(inp, r):.3f} "
              f"vs {rlcu_exponent(inp, tt * tt):.3f} at r=t~^2, samples ratio {math.exp(rlcu_exponent(inp, tt * tt) - rlcu_exponent(inp, r)):.2f}x")


if __name__ == "__main__":
    main()
