"""Seeded, worker-count-independent shot sampling and batched Pauli lookup tables.

Shots are split into fixed-size blocks.  Block ``b`` draws from its own
generator ``SeedSequence(seed, spawn_key=(b,))`` so the values produced for a
given seed never depend on how blocks are distributed over threads; results
are concatenated in block order before any reduction.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from .pauli import PauliString

DEFAULT_BLOCK = 8192


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


def run_blocks(
    fn: Callable[[np.random.Generator, int], np.ndarray],
    shots: int,
    seed: int,
    block_size: int = DEFAULT_BLOCK,
    workers: int = 1,
) -> np.ndarray:
    """Call ``fn(rng, n)`` for every block and concatenate the per-shot values in order."""
    if shots < 1:
        raise ValueError(f"need at least one shot, got {shots}")
    n_blocks = -(-shots // block_size)
    sizes = [min(block_size, shots - b * block_size) for b in range(n_blocks)]

    def job(b: int) -> np.ndarray:
        return np.asarray(fn(block_rng(seed, b), sizes[b]))

    if workers <= 1 or n_blocks == 1:
        parts = [job(b) for b in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(n_blocks)))
    return np.concatenate(parts)


class PauliTable:
    """Several discrete distributions over Paulis, sampled row-wise in one shot.

    Entry ``c`` is a list of Paulis with probabilities (and optional signs).
    ``sample(idx, rng)`` draws one Pauli per row from distribution ``idx[row]``
    and returns the row-wise ``(perm, phase, sign)`` arrays.
    """

    def __init__(
        self,
        entries: Sequence[tuple[Sequence[PauliString], np.ndarray]],
        signs: Sequence[np.ndarray] | None = None,
    ):
        if not entries:
            raise ValueError("empty Pauli table")
        dim = 1 << entries[0][0][0].n_qubits
        width = max(len(p) for p, _ in entries)
        n = len(entries)
        self.cum = np.ones((n, width))
        self.perms = np.broadcast_to(np.arange(dim), (n, width, dim)).copy()
        self.phases = np.ones((n, width, dim), dtype=complex)
        self.signs = np.ones((n, width))
        for c, (paulis, probs) in enumerate(entries):
            probs = np.asarray(probs, dtype=float)
            cum = np.cumsum(probs / probs.sum())
            cum[-1] = 1.0
            self.cum[c, : len(cum)] = cum
            for j, p in enumerate(paulis):
                self.perms[c, j], self.phases[c, j] = p.action()
            if signs is not None:
                self.signs[c, : len(paulis)] = signs[c]
        self.width = width

    def draw(self, idx: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Column index of the drawn Pauli for every row."""
        u = rng.random(len(idx))
        j = (u[:, None] >= self.cum[idx]).sum(axis=1)
        return np.minimum(j, self.width - 1)

    def sample(self, idx: np.ndarray, rng: np.random.Generator):
        j = self.draw(idx, rng)
        return self.perms[idx, j], self.phases[idx, j], self.signs[idx, j]


def apply_rows(vecs: np.ndarray, perms: np.ndarray, phases: np.ndarray) -> np.ndarray:
    """Row-wise Pauli action on state vectors of shape ``(B, ..., d)``."""
    extra = vecs.ndim - 2
    p = perms.reshape(perms.shape[:1] + (1,) * extra + perms.shape[1:])
    ph = phases.reshape(p.shape)
    return ph * np.take_along_axis(vecs, np.broadcast_to(p, vecs.shape), axis=-1)
