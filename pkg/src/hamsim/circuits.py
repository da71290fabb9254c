"""Gate lists with per-gate stochastic Pauli noise, simulated on dense density matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import StochasticPauliChannel, pauli_conjugate_rows, pauli_rotation
from .errors import DimensionError
from .pauli import PauliString


@dataclass(frozen=True, eq=False)
class Gate:
    """A full-width unitary with the qubits it touches."""

    unitary: np.ndarray
    support: tuple[int, ...]
    clifford: bool = False
    label: str = ""

    @classmethod
    def rotation(cls, pauli: PauliString, theta: float) -> Gate:
        return cls(pauli_rotation(pauli, theta), pauli.support, False, f"R{pauli.label}({theta:.6g})")

    @classmethod
    def pauli(cls, pauli: PauliString) -> Gate:
        return cls(np.array(pauli.to_matrix()), pauli.support, True, pauli.label)


@dataclass(frozen=True, eq=False)
class NoisyCircuit:
    """``prod_k N_k U_k``: gate ``k`` followed by its noise channel (``None`` = noiseless)."""

    n_qubits: int
    gates: tuple[Gate, ...]
    noise: tuple[StochasticPauliChannel | None, ...]

    def __post_init__(self):
        gates, noise = tuple(self.gates), tuple(self.noise)
        if len(gates) != len(noise):
            raise DimensionError(f"{len(gates)} gates but {len(noise)} noise entries")
        dim = 1 << self.n_qubits
        for g in gates:
            if g.unitary.shape != (dim, dim):
                raise DimensionError(f"gate {g.label!r} has shape {g.unitary.shape}")
        for ch in noise:
            if ch is not None and ch.n_qubits != self.n_qubits:
                raise DimensionError("noise channel width mismatch")
        object.__setattr__(self, "gates", gates)
        object.__setattr__(self, "noise", noise)

    @classmethod
    def from_gates(cls, n_qubits: int, gates: Sequence[Gate], noise_model=None) -> NoisyCircuit:
        noise = []
        for g in gates:
            if noise_model is None:
                noise.append(None)
            else:
                noise.append(noise_model.channel(n_qubits, g.support, clifford=g.clifford))
        return cls(n_qubits, tuple(gates), tuple(noise))

    def __len__(self) -> int:
        return len(self.gates)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def noiseless(self) -> NoisyCircuit:
        return NoisyCircuit(self.n_qubits, self.gates, (None,) * len(self.gates))

    def with_noise(self, noise: Sequence[StochasticPauliChannel | None]) -> NoisyCircuit:
        return NoisyCircuit(self.n_qubits, self.gates, tuple(noise))

    def ideal_unitary(self) -> np.ndarray:
        u = np.eye(self.dim, dtype=complex)
        for g in self.gates:
            u = g.unitary @ u
        return u

    def no_error_probability(self) -> float:
        return float(np.prod([1.0 if ch is None else ch.identity_weight for ch in self.noise]))

    def run(self, rho: np.ndarray, noisy: bool = True, inserts=None) -> np.ndarray:
        """Evolve ``rho`` (or a stack of states) through the circuit.

        ``inserts`` optionally gives, per gate, ``None`` or a row-wise Pauli
        ``(perms, phases)`` pair of shape ``(B, d)`` applied right after that
        gate's noise; ``rho`` is then broadcast to ``B`` rows.
        """
        rho = np.asarray(rho, dtype=complex)
        if inserts is not None:
            batch = next(ins[0].shape[0] for ins in inserts if ins is not None) if any(
                ins is not None for ins in inserts) else None
            if batch is not None and rho.ndim == 2:
                rho = np.broadcast_to(rho, (batch,) + rho.shape).copy()
        for k, g in enumerate(self.gates):
            u = g.unitary
            rho = u @ rho @ u.conj().T
            if noisy and self.noise[k] is not None and self.noise[k].rate > 0.0:
                rho = self.noise[k].apply(rho)
            if inserts is not None and inserts[k] is not None:
                perms, phases = inserts[k]
                rho = pauli_conjugate_rows(rho, perms, phases)
        return rho
