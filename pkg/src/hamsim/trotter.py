"""Suzuki-Trotter product formulas, ideal and under per-gate Pauli noise."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import NoiseModel, basis_state, exact_evolution, expectation, pauli_rotation
from .circuits import Gate, NoisyCircuit
from .errors import CapacityError
from .pauli import MAX_DENSE_QUBITS, Hamiltonian, alpha_comm, c1_prefactor


def _check_order(k: int) -> None:
    if k < 1 or (k > 1 and k % 2):
        raise ValueError(f"product-formula order must be 1 or even, got {k}")


def suzuki_coefficient(p: int) -> float:
    """``u_p = 1 / (4 - 4^(1/(2p-1)))`` used to lift order ``2p-2`` to ``2p``."""
    return 1.0 / (4.0 - 4.0 ** (1.0 / (2 * p - 1)))


def stage_count(k: int) -> int:
    """Number of first-order sweeps per microstep: 1 for k=1, else ``2 * 5^(k/2 - 1)``."""
    _check_order(k)
    return 1 if k == 1 else 2 * 5 ** (k // 2 - 1)


@dataclass(frozen=True)
class ProductFormula:
    """One microstep as an ordered list of ``(term_index, fraction_of_delta)``.

    Stages are listed in application order.  Adjacent rotations of the same
    term are never merged, so each microstep has exactly ``stage_count * L``
    elementary rotations.
    """

    order: int
    n_terms: int
    stages: tuple[tuple[int, float], ...]

    @property
    def stage_count(self) -> int:
        return stage_count(self.order)

    def term_fractions(self) -> np.ndarray:
        out = np.zeros(self.n_terms)
        for idx, frac in self.stages:
            out[idx] += frac
        return out


def build_formula(h: Hamiltonian | int, k: int) -> ProductFormula:
    """Order-``k`` Suzuki stage list for ``h`` (or for a bare term count)."""
    _check_order(k)
    L = h if isinstance(h, int) else h.L
    if k == 1:
        return ProductFormula(1, L, tuple((l, 1.0) for l in range(L)))
    stages = [(l, 0.5) for l in range(L)] + [(l, 0.5) for l in reversed(range(L))]
    for p in range(2, k // 2 + 1):
        u = suzuki_coefficient(p)
        outer = [(l, f * u) for l, f in stages]
        middle = [(l, f * (1.0 - 4.0 * u)) for l, f in stages]
        stages = outer + outer + middle + outer + outer
    return ProductFormula(k, L, tuple(stages))


def microstep_unitary(f: ProductFormula, h: Hamiltonian, delta: float) -> np.ndarray:
    """Product of the formula's Pauli rotations for step size ``delta``."""
    if h.n_qubits > MAX_DENSE_QUBITS:
        raise CapacityError(f"dense simulation limited to {MAX_DENSE_QUBITS} qubits")
    u = np.eye(1 << h.n_qubits, dtype=complex)
    for idx, frac in f.stages:
        term = h.terms[idx]
        u = pauli_rotation(term.pauli, term.coefficient * frac * delta) @ u
    return u


@dataclass(frozen=True)
class TrotterRun:
    """Bookkeeping for ``N`` microsteps of an order-``k`` formula."""

    t: float
    N: int
    k: int
    L: int

    @property
    def delta(self) -> float:
        return self.t / self.N

    @property
    def depth(self) -> int:
        return stage_count(self.k) * self.N

    @property
    def gate_count(self) -> int:
        return self.depth * self.L


def trotter_circuit(h: Hamiltonian, t: float, N: int, k: int, noise: NoiseModel | None = None) -> NoisyCircuit:
    """Elementary-gate circuit of ``(S_k(t/N))^N`` with noise after every rotation."""
    if N < 1:
        raise ValueError(f"need N >= 1, got {N}")
    f = build_formula(h, k)
    delta = t / N
    layer = [Gate.rotation(h.terms[i].pauli, h.terms[i].coefficient * frac * delta) for i, frac in f.stages]
    return NoisyCircuit.from_gates(h.n_qubits, layer * N, noise)


def run_trotter(
    h: Hamiltonian,
    t: float,
    N: int,
    k: int,
    noise: NoiseModel | None = None,
    rho0: np.ndarray | None = None,
) -> np.ndarray:
    """Final state of the (noisy) Trotter channel applied to ``rho0`` (default ``|0...0>``)."""
    if N < 1:
        raise ValueError(f"need N >= 1, got {N}")
    if rho0 is None:
        rho0 = basis_state(h.n_qubits)
    if noise is None:
        step = microstep_unitary(build_formula(h, k), h, t / N)
        v = np.linalg.matrix_power(step, N)
        return v @ rho0 @ v.conj().T
    return trotter_circuit(h, t, N, k, noise).run(rho0)


def ideal_final_state(h: Hamiltonian, t: float, rho0: np.ndarray) -> np.ndarray:
    u = exact_evolution(h, t)
    return u @ rho0 @ u.conj().T


def trotter_bias(
    h: Hamiltonian,
    t: float,
    N: int,
    k: int,
    o: np.ndarray,
    rho0: np.ndarray | None = None,
    noise: NoiseModel | None = None,
) -> float:
    """``|Tr[O U_t(rho)] - Tr[O V(rho)]|`` from exact dense simulation."""
    if rho0 is None:
        rho0 = basis_state(h.n_qubits)
    ideal = expectation(o, ideal_final_state(h, t, rho0))
    approx = expectation(o, run_trotter(h, t, N, k, noise, rho0), check=False)
    return float(abs(ideal - approx))


def microstep_error(h: Hamiltonian, delta: float, k: int) -> float:
    """Spectral norm ``||S_k(delta) - exp(-i H delta)||``."""
    diff = microstep_unitary(build_formula(h, k), h, delta) - exact_evolution(h, delta)
    return float(np.linalg.norm(diff, 2))


def fit_order_slope(h: Hamiltonian, k: int, deltas: Sequence[float]) -> float:
    """Least-squares slope of ``log(microstep_error)`` against ``log(delta)``."""
    errs = np.array([microstep_error(h, d, k) for d in deltas])
    slope, _ = np.polyfit(np.log(deltas), np.log(errs), 1)
    return float(slope)


def trotter_alpha(h: Hamiltonian, t: float, k: int, c_cal: float = 1.0, c1_mode: str = "exact") -> float:
    """Prefactor ``alpha_k`` in the algorithmic-error bound ``alpha_k / d^k``.

    For ``k = 1`` this is the explicit ``c1 * t^2``.  For even ``k`` it is
    ``c_cal * Upsilon_k^k * alpha_comm * t^(k+1)``; ``c_cal = 1`` is the
    uncalibrated default.
    """
    _check_order(k)
    if k == 1:
        return c1_prefactor(h, c1_mode) * t * t
    return c_cal * stage_count(k) ** k * alpha_comm(h, k) * t ** (k + 1)


def calibrate_alpha_constant(
    h: Hamiltonian,
    k: int,
    times: Sequence[float],
    depths_N: Sequence[int],
    o: np.ndarray,
    rho0: np.ndarray | None = None,
) -> float:
    """Smallest ``c_cal`` making ``bias <= alpha_k / d^k`` on a noiseless grid.

    The value is measured once and meant to be frozen by the caller.
    """
    worst = 0.0
    for t in times:
        base = trotter_alpha(h, t, k, c_cal=1.0)
        if base == 0.0:
            continue
        for N in depths_N:
            d = stage_count(k) * N
            worst = max(worst, trotter_bias(h, t, N, k, o, rho0) * d**k / base)
    return worst


def noisy_bias_bound(alpha_k: float, k: int, L: int, d: float, gamma: float) -> float:
    """``alpha_k / d^k + L d gamma``."""
    return alpha_k / d**k + L * d * gamma


__all__ = [
    "ProductFormula",
    "TrotterRun",
    "build_formula",
    "calibrate_alpha_constant",
    "fit_order_slope",
    "ideal_final_state",
    "microstep_error",
    "microstep_unitary",
    "noisy_bias_bound",
    "run_trotter",
    "stage_count",
    "suzuki_coefficient",
    "trotter_alpha",
    "trotter_bias",
    "trotter_circuit",
]
