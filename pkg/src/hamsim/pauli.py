"""Symplectic Pauli-string algebra and Pauli-sum Hamiltonians.

A phase-free Pauli string on ``n`` qubits is stored as two ``n``-bit masks
``(x_mask, z_mask)``; bit ``i`` describes qubit ``i``::

    I = (0, 0)   X = (1, 0)   Z = (0, 1)   Y = (1, 1)

Qubit ``i`` is character ``i`` of the label (``"XZ"`` is X on qubit 0) and the
``i``-th Kronecker factor of the dense matrix, so qubit 0 is the most
significant bit of a computational-basis index.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, DegenerateInputError, DimensionError

MAX_DENSE_QUBITS = 10
MAX_COMMUTATOR_TUPLES = 10**8

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}
_PHASES = (1, 1j, -1, -1j)


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, slots=True)
class PauliString:
    """Phase-free Pauli operator on ``n_qubits`` qubits."""

    n_qubits: int
    x_mask: int = 0
    z_mask: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise DimensionError(f"n_qubits must be positive, got {self.n_qubits}")
        limit = 1 << self.n_qubits
        if not (0 <= self.x_mask < limit and 0 <= self.z_mask < limit):
            raise DimensionError("mask wider than n_qubits")

    @classmethod
    def identity(cls, n_qubits: int) -> PauliString:
        return cls(n_qubits, 0, 0)

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        label = label.strip().upper()
        if not label:
            raise ValueError("empty Pauli label")
        x = z = 0
        for i, ch in enumerate(label):
            try:
                xb, zb = _LETTER_BITS[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli letter {ch!r} in {label!r}") from None
            x |= xb << i
            z |= zb << i
        return cls(len(label), x, z)

    @classmethod
    def single(cls, n_qubits: int, qubit: int, letter: str) -> PauliString:
        xb, zb = _LETTER_BITS[letter.upper()]
        return cls(n_qubits, xb << qubit, zb << qubit)

    @property
    def label(self) -> str:
        return "".join(
            _BITS_LETTER[((self.x_mask >> i) & 1, (self.z_mask >> i) & 1)]
            for i in range(self.n_qubits)
        )

    @property
    def weight(self) -> int:
        return _popcount(self.x_mask | self.z_mask)

    @property
    def support(self) -> tuple[int, ...]:
        m = self.x_mask | self.z_mask
        return tuple(i for i in range(self.n_qubits) if (m >> i) & 1)

    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def __str__(self) -> str:
        return self.label

    def to_matrix(self) -> np.ndarray:
        """Dense ``2^n x 2^n`` matrix (a read-only cached array)."""
        return _pauli_matrix(self.n_qubits, self.x_mask, self.z_mask)

    def action(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(perm, phase)`` with ``(P @ v)[a] == phase[a] * v[perm[a]]``."""
        return _pauli_action(self.n_qubits, self.x_mask, self.z_mask)


def _parity(arr: np.ndarray) -> np.ndarray:
    if hasattr(np, "bitwise_count"):
        return (np.bitwise_count(arr) & 1).astype(np.int64)
    return np.array([_popcount(int(a)) & 1 for a in arr])


def _index_mask(n: int, mask: int) -> int:
    # qubit i sits at basis-index bit n-1-i
    out = 0
    for i in range(n):
        if (mask >> i) & 1:
            out |= 1 << (n - 1 - i)
    return out


@lru_cache(maxsize=4096)
def _pauli_action(n: int, x_mask: int, z_mask: int):
    if n > MAX_DENSE_QUBITS:
        raise CapacityError(f"dense Pauli action limited to {MAX_DENSE_QUBITS} qubits")
    dim = 1 << n
    idx = np.arange(dim)
    xi = _index_mask(n, x_mask)
    zi = _index_mask(n, z_mask)
    n_y = _popcount(x_mask & z_mask)
    zsign = 1 - 2 * _parity(idx & zi)
    phase = ((-1j) ** n_y) * zsign.astype(complex)
    perm = idx ^ xi
    perm.setflags(write=False)
    phase.setflags(write=False)
    return perm, phase


@lru_cache(maxsize=4096)
def _pauli_matrix(n: int, x_mask: int, z_mask: int) -> np.ndarray:
    perm, phase = _pauli_action(n, x_mask, z_mask)
    dim = 1 << n
    m = np.zeros((dim, dim), dtype=complex)
    m[np.arange(dim), perm] = phase
    m.setflags(write=False)
    return m


def _check_same_width(a: PauliString, b: PauliString):
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"Pauli widths differ: {a.n_qubits} vs {b.n_qubits}")


def pauli_mul(a: PauliString, b: PauliString) -> tuple[complex, PauliString]:
    """Operator product ``a @ b`` as ``(phase, product)``, phase in {1, 1j, -1, -1j}.

    Uses ``P(x, z) = i^{x.z} X^x Z^z`` so that the phase exponent mod 4 is
    ``|a.x&a.z| + |b.x&b.z| + 2|a.z&b.x| - |c.x&c.z|``.
    """
    _check_same_width(a, b)
    cx = a.x_mask ^ b.x_mask
    cz = a.z_mask ^ b.z_mask
    e = (
        _popcount(a.x_mask & a.z_mask)
        + _popcount(b.x_mask & b.z_mask)
        + 2 * _popcount(a.z_mask & b.x_mask)
        - _popcount(cx & cz)
    ) % 4
    return _PHASES[e], PauliString(a.n_qubits, cx, cz)


def symplectic_product(a: PauliString, b: PauliString) -> int:
    """Symplectic form ``sum_i (a.x_i b.z_i + a.z_i b.x_i) mod 2``."""
    _check_same_width(a, b)
    return (_popcount(a.x_mask & b.z_mask) + _popcount(a.z_mask & b.x_mask)) & 1


def commutes(a: PauliString, b: PauliString) -> bool:
    return symplectic_product(a, b) == 0


def all_paulis(n_qubits: int, support: Sequence[int] | None = None) -> list[PauliString]:
    """Every Pauli string acting nontrivially only on ``support`` (identity first)."""
    support = tuple(range(n_qubits)) if support is None else tuple(support)
    out = []
    for letters in itertools.product("IXYZ", repeat=len(support)):
        x = z = 0
        for q, ch in zip(support, letters):
            xb, zb = _LETTER_BITS[ch]
            x |= xb << q
            z |= zb << q
        out.append(PauliString(n_qubits, x, z))
    return out


@dataclass(frozen=True, slots=True)
class HamiltonianTerm:
    coefficient: float
    pauli: PauliString

    def __post_init__(self):
        c = float(self.coefficient)
        if not math.isfinite(c):
            raise ValueError(f"non-finite coefficient {self.coefficient!r}")
        if c == 0.0:
            raise DegenerateInputError("Hamiltonian term with zero coefficient")
        object.__setattr__(self, "coefficient", c)


@dataclass(frozen=True)
class Hamiltonian:
    """Ordered Pauli sum ``H = sum_l lambda_l P_l``.

    Term order is preserved verbatim; it is the application order of the
    product formulas (term 0 acts first).
    """

    terms: tuple[HamiltonianTerm, ...]

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise DegenerateInputError("Hamiltonian needs at least one term")
        n = terms[0].pauli.n_qubits
        for term in terms:
            if term.pauli.n_qubits != n:
                raise DimensionError("all terms must act on the same number of qubits")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_terms(cls, pairs: Iterable[tuple[float, str | PauliString]]) -> Hamiltonian:
        terms = []
        for coeff, pauli in pairs:
            if isinstance(pauli, str):
                pauli = PauliString.from_label(pauli)
            terms.append(HamiltonianTerm(coeff, pauli))
        return cls(tuple(terms))

    @classmethod
    def parse(cls, text: str) -> Hamiltonian:
        """Parse ``<coefficient> <label>`` lines; ``#`` starts a comment line."""
        pairs = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected '<coefficient> <pauli-label>', got {raw!r}")
            try:
                coeff = float(parts[0])
            except ValueError:
                raise ValueError(f"line {lineno}: bad coefficient {parts[0]!r}") from None
            try:
                pauli = PauliString.from_label(parts[1])
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
            pairs.append((coeff, pauli))
        return cls.from_terms(pairs)

    @classmethod
    def load(cls, path) -> Hamiltonian:
        with open(path, encoding="utf-8") as fh:
            return cls.parse(fh.read())

    def to_text(self) -> str:
        return "".join(f"{t.coefficient!r} {t.pauli.label}\n" for t in self.terms)

    @property
    def n_qubits(self) -> int:
        return self.terms[0].pauli.n_qubits

    @property
    def L(self) -> int:
        return len(self.terms)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([t.coefficient for t in self.terms])

    @property
    def paulis(self) -> tuple[PauliString, ...]:
        return tuple(t.pauli for t in self.terms)

    @property
    def beta(self) -> float:
        return float(np.sum(np.abs(self.coefficients)))

    @property
    def probs(self) -> np.ndarray:
        return normalize(self)[1]

    def term_matrix(self, index: int) -> np.ndarray:
        term = self.terms[index]
        return term.coefficient * term.pauli.to_matrix()

    def to_matrix(self) -> np.ndarray:
        if self.n_qubits > MAX_DENSE_QUBITS:
            raise CapacityError(f"dense Hamiltonian limited to {MAX_DENSE_QUBITS} qubits")
        return sum(self.term_matrix(i) for i in range(self.L))


def normalize(h: Hamiltonian) -> tuple[float, np.ndarray]:
    """Return ``(beta, p)`` with ``beta = sum |lambda|`` and ``p = |lambda| / beta``."""
    mags = np.abs(np.array([t.coefficient for t in h.terms]))
    beta = float(mags.sum())
    if beta == 0.0:
        raise DegenerateInputError("all Hamiltonian coefficients vanish")
    return beta, mags / beta


def nested_commutator_norm(indices: Sequence[int], h: Hamiltonian) -> float:
    """Operator norm of ``[H_{l_m}, ..., [H_{l_2}, H_{l_1}]...]`` for ``indices = (l_1, ..., l_m)``.

    A commutator of two anticommuting Pauli strings is ``2 * P P'`` (up to
    phase) and vanishes otherwise, so the chain norm is either 0 or
    ``2^(m-1) * prod |lambda|``.
    """
    if len(indices) == 0:
        raise ValueError("need at least one term index")
    for i in indices:
        if not 0 <= i < h.L:
            raise IndexError(f"term index {i} out of range for L={h.L}")
    current = h.terms[indices[0]].pauli
    value = abs(h.terms[indices[0]].coefficient)
    for i in indices[1:]:
        p = h.terms[i].pauli
        if commutes(p, current):
            return 0.0
        _, current = pauli_mul(p, current)
        value *= 2.0 * abs(h.terms[i].coefficient)
    return value


def alpha_comm(h: Hamiltonian, k: int) -> float:
    """Sum of nested-commutator norms over all ordered ``(k+1)``-tuples of terms.

    Enumeration is depth-first; a vanishing inner commutator prunes every
    extension of that prefix.
    """
    if k < 1 or (k > 1 and k % 2):
        raise ValueError(f"order must be 1 or even, got {k}")
    L = h.L
    if L ** (k + 1) > MAX_COMMUTATOR_TUPLES:
        raise CapacityError(f"L^(k+1) = {L}^{k + 1} exceeds {MAX_COMMUTATOR_TUPLES}")
    paulis = h.paulis
    mags = np.abs(h.coefficients)

    def extend(current: PauliString, value: float, depth: int) -> float:
        if depth == k + 1:
            return value
        total = 0.0
        for j in range(L):
            if commutes(paulis[j], current):
                continue
            _, nxt = pauli_mul(paulis[j], current)
            total += extend(nxt, value * 2.0 * mags[j], depth + 1)
        return total

    return float(sum(extend(paulis[i], mags[i], 1) for i in range(L)))


def _spectral_norm_antihermitian(c: np.ndarray) -> float:
    # c = [A, B] with A, B Hermitian is anti-Hermitian, so i*c is Hermitian
    return float(np.max(np.abs(np.linalg.eigvalsh(1j * c))))


def c1_prefactor(h: Hamiltonian, mode: str = "exact") -> float:
    """First-order Trotter prefactor ``c1 = 1/2 sum_l || [sum_{m>l} H_m, H_l] ||``.

    ``mode="exact"`` evaluates each norm densely (at most ``MAX_DENSE_QUBITS``);
    ``mode="triangle"`` returns the pairwise sum-of-norms upper bound, which
    needs no densification.
    """
    L = h.L
    if mode == "triangle":
        paulis, mags = h.paulis, np.abs(h.coefficients)
        total = 0.0
        for l in range(L):
            for m in range(l + 1, L):
                if not commutes(paulis[m], paulis[l]):
                    total += 2.0 * mags[m] * mags[l]
        return 0.5 * total
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    if h.n_qubits > MAX_DENSE_QUBITS:
        raise CapacityError(f"exact c1 limited to {MAX_DENSE_QUBITS} qubits; use mode='triangle'")
    mats = [h.term_matrix(i) for i in range(L)]
    total = 0.0
    tail = np.zeros_like(mats[0])
    for l in range(L - 1, -1, -1):
        if l < L - 1:
            c = tail @ mats[l] - mats[l] @ tail
            total += _spectral_norm_antihermitian(c)
        tail = tail + mats[l]
    return 0.5 * total
