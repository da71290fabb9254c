"""Dense states, CPTP channels, stochastic Pauli noise and channel distances.

States and operators are plain ``numpy`` arrays.  Channels are small objects
exposing ``n_qubits`` and ``apply(rho)``; ``apply`` accepts a single
``(d, d)`` matrix or a stack ``(..., d, d)``.

Channel distance is the Choi-state trace distance ``1/2 ||J(a) - J(b)||_1``.
For stochastic Pauli channels (Bell-diagonal Choi states) it equals the
diamond distance; for anything else it is only a lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    CapacityError,
    ChannelIntegrityError,
    DimensionError,
    NonInvertibleError,
)
from .pauli import (
    MAX_DENSE_QUBITS,
    Hamiltonian,
    PauliString,
    all_paulis,
    pauli_mul,
    symplectic_product,
)

MAX_CHOI_QUBITS = 5
STATE_TOL = 1e-10
NEG_EIG_TOL = 1e-9


# --------------------------------------------------------------------------
# states and operators
# --------------------------------------------------------------------------

def n_qubits_of(mat: np.ndarray) -> int:
    dim = mat.shape[-1]
    n = dim.bit_length() - 1
    if dim < 2 or (1 << n) != dim or mat.shape[-2] != dim:
        raise DimensionError(f"expected a square 2^n matrix, got shape {mat.shape}")
    return n


def pure_state(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    vec = vec / np.linalg.norm(vec)
    return np.outer(vec, vec.conj())


def basis_state(n_qubits: int, label: str = "zero") -> np.ndarray:
    """``|0...0>`` (``"zero"``), ``|+...+>`` (``"plus"``), ``"mixed"`` or a bitstring."""
    dim = 1 << n_qubits
    if label in ("zero", "0" * n_qubits):
        vec = np.zeros(dim, dtype=complex)
        vec[0] = 1.0
        return pure_state(vec)
    if label == "plus":
        return np.full((dim, dim), 1.0 / dim, dtype=complex)
    if label == "mixed":
        return np.eye(dim, dtype=complex) / dim
    if len(label) == n_qubits and set(label) <= {"0", "1"}:
        vec = np.zeros(dim, dtype=complex)
        vec[int(label, 2)] = 1.0
        return pure_state(vec)
    raise ValueError(f"unknown state label {label!r} for {n_qubits} qubits")


def validate_state(rho: np.ndarray) -> np.ndarray:
    """Check density-matrix invariants; clip round-off negativity and renormalize.

    Eigenvalues down to ``-1e-9`` are treated as round-off; anything more
    negative (or a trace / hermiticity defect above ``1e-10``) raises.
    """
    rho = np.asarray(rho, dtype=complex)
    n_qubits_of(rho)
    if not np.all(np.isfinite(rho)):
        raise ChannelIntegrityError("state has non-finite entries")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > STATE_TOL:
        raise ChannelIntegrityError(f"state not Hermitian (defect {herm:.3g})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > STATE_TOL:
        raise ChannelIntegrityError(f"state trace {tr!r} differs from 1")
    rho = 0.5 * (rho + rho.conj().T)
    evals, evecs = np.linalg.eigh(rho)
    if evals[0] < -NEG_EIG_TOL:
        raise ChannelIntegrityError(f"state has negative eigenvalue {evals[0]:.3g}")
    if evals[0] < 0:
        evals = np.clip(evals, 0.0, None)
        evals /= evals.sum()
        rho = (evecs * evals) @ evecs.conj().T
    return rho


def exact_evolution(h: Hamiltonian, t: float) -> np.ndarray:
    """``exp(-i H t)`` by Hermitian eigendecomposition."""
    if h.n_qubits > MAX_DENSE_QUBITS:
        raise CapacityError(f"exact evolution limited to {MAX_DENSE_QUBITS} qubits")
    evals, evecs = np.linalg.eigh(h.to_matrix())
    return (evecs * np.exp(-1j * t * evals)) @ evecs.conj().T


def pauli_rotation(pauli: PauliString, theta: float) -> np.ndarray:
    """``exp(-i theta P) = cos(theta) I - i sin(theta) P``."""
    dim = 1 << pauli.n_qubits
    return math.cos(theta) * np.eye(dim) - 1j * math.sin(theta) * pauli.to_matrix()


def conjugate(rho: np.ndarray, u: np.ndarray) -> np.ndarray:
    return u @ rho @ u.conj().T


def pauli_conjugate(rho: np.ndarray, pauli: PauliString) -> np.ndarray:
    """``P rho P`` for a single Pauli via index permutation (works on stacks)."""
    perm, phase = pauli.action()
    return rho[..., perm[:, None], perm[None, :]] * np.outer(phase, phase.conj())


def pauli_conjugate_rows(rhos: np.ndarray, perms: np.ndarray, phases: np.ndarray) -> np.ndarray:
    """Row-wise ``P_b rho_b P_b`` for a stack ``(B, d, d)`` with per-row ``(perm, phase)``."""
    out = np.take_along_axis(rhos, perms[:, :, None], axis=1)
    out = np.take_along_axis(out, perms[:, None, :], axis=2)
    return out * (phases[:, :, None] * phases.conj()[:, None, :])


def expectation(o: np.ndarray, rho: np.ndarray, check: bool = True) -> float:
    """``Tr[O rho]`` for Hermitian ``O`` with ``||O||_inf <= 1``.

    Rescaling an observable with larger norm is left to the caller.
    """
    o = np.asarray(o)
    if check:
        if o.shape != rho.shape[-2:]:
            raise DimensionError(f"observable {o.shape} vs state {rho.shape}")
        if np.max(np.abs(o - o.conj().T)) > STATE_TOL:
            raise ValueError("observable is not Hermitian")
        if np.max(np.abs(np.linalg.eigvalsh(o))) > 1.0 + STATE_TOL:
            raise ValueError("observable norm exceeds 1; rescale it first")
    return np.einsum("ij,...ji->...", o, rho).real


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """``1/2 * sum of singular values of (rho - sigma)``."""
    if rho.shape != sigma.shape:
        raise DimensionError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    diff = rho - sigma
    if np.allclose(diff, diff.conj().T, atol=1e-13):
        return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))
    return 0.5 * float(np.sum(np.linalg.svd(diff, compute_uv=False)))


# --------------------------------------------------------------------------
# channels
# --------------------------------------------------------------------------

class Channel:
    """Linear map on ``n_qubits``-qubit operators."""

    n_qubits: int

    def apply(self, rho: np.ndarray) -> np.ndarray:  # pragma: no cover - interface
        raise NotImplementedError

    def __call__(self, rho):
        return self.apply(rho)


@dataclass(frozen=True, eq=False)
class UnitaryChannel(Channel):
    unitary: np.ndarray

    @property
    def n_qubits(self) -> int:
        return n_qubits_of(self.unitary)

    def apply(self, rho):
        return self.unitary @ rho @ self.unitary.conj().T

    def inverse(self) -> UnitaryChannel:
        return UnitaryChannel(self.unitary.conj().T)


@dataclass(frozen=True, eq=False)
class KrausChannel(Channel):
    kraus: tuple[np.ndarray, ...]

    @property
    def n_qubits(self) -> int:
        return n_qubits_of(self.kraus[0])

    def apply(self, rho):
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    def trace_defect(self) -> float:
        dim = self.kraus[0].shape[0]
        s = sum(k.conj().T @ k for k in self.kraus)
        return float(np.max(np.abs(s - np.eye(dim))))


@dataclass(frozen=True, eq=False)
class ComposedChannel(Channel):
    """``stages[-1] o ... o stages[0]`` (first stage acts first)."""

    stages: tuple[Channel, ...]

    @property
    def n_qubits(self) -> int:
        return self.stages[0].n_qubits

    def apply(self, rho):
        for stage in self.stages:
            rho = stage.apply(rho)
        return rho


def compose(*channels: Channel) -> Channel:
    """Sequential composition; ``compose(a, b)`` applies ``a`` first."""
    n = {c.n_qubits for c in channels}
    if len(n) != 1:
        raise DimensionError(f"cannot compose channels on {sorted(n)} qubits")
    if all(isinstance(c, PauliMap) for c in channels):
        out = channels[0]
        for c in channels[1:]:
            out = out.then(c)
        return out
    return ComposedChannel(tuple(channels))


@dataclass(frozen=True, eq=False)
class PauliMap(Channel):
    """Pauli-diagonal map ``rho -> sum_i w_i P_i rho P_i`` with real (possibly signed) weights."""

    n_qubits: int
    weights: Mapping[PauliString, float]

    def __post_init__(self):
        merged: dict[PauliString, float] = {}
        for p, w in dict(self.weights).items():
            if p.n_qubits != self.n_qubits:
                raise DimensionError("Pauli width does not match channel")
            merged[p] = merged.get(p, 0.0) + float(w)
        ident = PauliString.identity(self.n_qubits)
        merged.setdefault(ident, 0.0)
        ordered = {ident: merged.pop(ident)}
        for p in sorted(merged, key=lambda q: (q.weight, q.x_mask, q.z_mask)):
            ordered[p] = merged[p]
        object.__setattr__(self, "weights", ordered)

    @classmethod
    def identity(cls, n_qubits: int) -> PauliMap:
        return cls(n_qubits, {PauliString.identity(n_qubits): 1.0})

    @property
    def identity_weight(self) -> float:
        return self.weights[PauliString.identity(self.n_qubits)]

    @property
    def one_norm(self) -> float:
        return float(sum(abs(w) for w in self.weights.values()))

    @cached_property
    def support(self) -> tuple[int, ...]:
        mask = 0
        for p, w in self.weights.items():
            if w != 0.0:
                mask |= p.x_mask | p.z_mask
        return tuple(i for i in range(self.n_qubits) if (mask >> i) & 1)

    @cached_property
    def _actions(self):
        paulis = [p for p, w in self.weights.items() if w != 0.0]
        ws = np.array([self.weights[p] for p in paulis])
        perms = np.stack([p.action()[0] for p in paulis])
        phases = np.stack([p.action()[1] for p in paulis])
        return ws, perms, phases

    def apply(self, rho):
        ws, perms, phases = self._actions
        out = np.zeros_like(rho, dtype=complex)
        for w, perm, phase in zip(ws, perms, phases):
            out += w * (rho[..., perm[:, None], perm[None, :]] * np.outer(phase, phase.conj()))
        return out

    def then(self, other: PauliMap) -> PauliMap:
        """Composition applying ``self`` first, then ``other`` (Pauli-group convolution)."""
        if other.n_qubits != self.n_qubits:
            raise DimensionError("width mismatch")
        out: dict[PauliString, float] = {}
        for p, wp in self.weights.items():
            if wp == 0.0:
                continue
            for q, wq in other.weights.items():
                if wq == 0.0:
                    continue
                _, r = pauli_mul(q, p)
                out[r] = out.get(r, 0.0) + wp * wq
        return PauliMap(self.n_qubits, out)

    def transfer_eigenvalue(self, q: PauliString) -> float:
        """Eigenvalue of the map on operator ``Q``: ``sum_i w_i (-1)^<P_i, Q>``."""
        return float(sum(w * (1 - 2 * symplectic_product(p, q)) for p, w in self.weights.items()))

    def inverse(self, tol: float = 1e-14) -> PauliMap:
        """Exact inverse over the map's support via the Pauli-transfer (Walsh) transform."""
        support = self.support or (0,)
        basis = all_paulis(self.n_qubits, support)
        etas = np.array([self.transfer_eigenvalue(q) for q in basis])
        if np.min(np.abs(etas)) < tol:
            raise NonInvertibleError("Pauli-transfer eigenvalue vanishes; channel not invertible")
        signs = np.array([[1 - 2 * symplectic_product(p, q) for q in basis] for p in basis])
        inv_w = signs @ (1.0 / etas) / len(basis)
        return PauliMap(self.n_qubits, {p: float(w) for p, w in zip(basis, inv_w) if abs(w) > 0.0})

    def distance_to_identity(self) -> float:
        """Choi trace distance to the identity map (exact: the Choi matrix is Bell-diagonal)."""
        ident = PauliString.identity(self.n_qubits)
        return 0.5 * float(sum(abs(w - (1.0 if p == ident else 0.0)) for p, w in self.weights.items()))


def pauli_map_distance(a: PauliMap, b: PauliMap) -> float:
    """``1/2 sum_i |a_i - b_i|``: the Choi (and, for channels, diamond) distance of Pauli maps."""
    if a.n_qubits != b.n_qubits:
        raise DimensionError("width mismatch")
    keys = set(a.weights) | set(b.weights)
    return 0.5 * float(sum(abs(a.weights.get(k, 0.0) - b.weights.get(k, 0.0)) for k in keys))


@dataclass(frozen=True, eq=False)
class StochasticPauliChannel(PauliMap):
    """Probability mixture of Pauli conjugations; ``rate = 1 - p_identity``."""

    def __post_init__(self):
        super().__post_init__()
        probs = np.array(list(self.weights.values()))
        if np.any(probs < -1e-15):
            raise ChannelIntegrityError("negative Pauli error probability")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ChannelIntegrityError(f"Pauli probabilities sum to {probs.sum()!r}")

    @property
    def rate(self) -> float:
        return 1.0 - self.identity_weight

    @classmethod
    def from_labels(cls, probs: Mapping[str, float]) -> StochasticPauliChannel:
        """Build from ``{label: p}`` for non-identity errors; the identity takes the rest."""
        items = {PauliString.from_label(k): float(v) for k, v in probs.items()}
        n = next(iter(items)).n_qubits
        ident = PauliString.identity(n)
        rest = 1.0 - sum(v for p, v in items.items() if p != ident)
        items[ident] = rest
        return cls(n, items)

    @classmethod
    def uniform(cls, errors: Sequence[PauliString], rate: float) -> StochasticPauliChannel:
        """Total error probability ``rate`` spread evenly over ``errors``."""
        if not 0.0 <= rate <= 1.0:
            raise ValueError(f"rate {rate} outside [0, 1]")
        n = errors[0].n_qubits
        w = {PauliString.identity(n): 1.0 - rate}
        for e in errors:
            w[e] = w.get(e, 0.0) + rate / len(errors)
        return cls(n, w)

    @classmethod
    def depolarizing(cls, n_qubits: int, support: Sequence[int], rate: float) -> StochasticPauliChannel:
        return cls.uniform(all_paulis(n_qubits, support)[1:], rate)

    @classmethod
    def dephasing(cls, n_qubits: int, support: Sequence[int], rate: float) -> StochasticPauliChannel:
        errs = [p for p in all_paulis(n_qubits, support)[1:] if p.x_mask == 0]
        return cls.uniform(errs, rate)

    @classmethod
    def bitflip(cls, n_qubits: int, support: Sequence[int], rate: float) -> StochasticPauliChannel:
        errs = [p for p in all_paulis(n_qubits, support)[1:] if p.z_mask == 0]
        return cls.uniform(errs, rate)

    def with_rate(self, rate: float) -> StochasticPauliChannel:
        """Same error distribution rescaled to total error probability ``rate``."""
        if not 0.0 <= rate <= 1.0:
            raise ValueError(f"rate {rate} outside [0, 1]")
        ident = PauliString.identity(self.n_qubits)
        old = self.rate
        if old == 0.0:
            raise ValueError("noiseless channel has no error distribution to rescale")
        w = {p: v * rate / old for p, v in self.weights.items() if p != ident}
        w[ident] = 1.0 - rate
        return StochasticPauliChannel(self.n_qubits, w)

    def error_distribution(self) -> tuple[list[PauliString], np.ndarray]:
        """Paulis and probabilities (identity first, zero-probability entries dropped)."""
        paulis = [p for p, w in self.weights.items() if w > 0.0 or p.is_identity()]
        return paulis, np.array([max(self.weights[p], 0.0) for p in paulis])


def pauli_channel_distance(n: StochasticPauliChannel) -> float:
    """Per-gate error ``D(N, I) = 1 - p_0`` of a stochastic Pauli channel."""
    return n.rate


def choi_matrix(channel: Channel) -> np.ndarray:
    """Normalized Choi state ``(id (x) channel)(|Omega><Omega|)``."""
    n = channel.n_qubits
    if n > MAX_CHOI_QUBITS:
        raise CapacityError(f"Choi matrices limited to {MAX_CHOI_QUBITS} system qubits")
    dim = 1 << n
    units = np.zeros((dim, dim, dim, dim), dtype=complex)
    idx = np.arange(dim)
    units[idx[:, None], idx[None, :], idx[:, None], idx[None, :]] = 1.0
    images = channel.apply(units)  # images[i, j] = channel(|i><j|)
    return images.transpose(0, 2, 1, 3).reshape(dim * dim, dim * dim) / dim


def choi_trace_distance(a: Channel, b: Channel) -> float:
    """``1/2 ||J(a) - J(b)||_1`` of normalized Choi states.

    Exact diamond distance for Pauli channels; a lower bound otherwise.
    """
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"channels act on {a.n_qubits} vs {b.n_qubits} qubits")
    diff = choi_matrix(a) - choi_matrix(b)
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def check_cptp(channel: Channel, tol: float = 1e-10) -> None:
    """Raise ``ChannelIntegrityError`` unless the Choi matrix is PSD with identity marginal."""
    j = choi_matrix(channel)
    dim = 1 << channel.n_qubits
    if np.min(np.linalg.eigvalsh(0.5 * (j + j.conj().T))) < -tol:
        raise ChannelIntegrityError("channel is not completely positive")
    marginal = np.einsum("iaja->ij", j.reshape(dim, dim, dim, dim)) * dim
    if np.max(np.abs(marginal - np.eye(dim))) > tol:
        raise ChannelIntegrityError("channel is not trace preserving")


def apply_channel(channel: Channel, rho: np.ndarray) -> np.ndarray:
    """Apply ``channel`` and re-validate the output state."""
    rho = np.asarray(rho, dtype=complex)
    if n_qubits_of(rho) != channel.n_qubits:
        raise DimensionError(f"state on {n_qubits_of(rho)} qubits, channel on {channel.n_qubits}")
    return validate_state(channel.apply(rho))


# --------------------------------------------------------------------------
# noise model
# --------------------------------------------------------------------------

_FAMILIES = {
    "depolarizing": StochasticPauliChannel.depolarizing,
    "dephasing": StochasticPauliChannel.dephasing,
    "bitflip": StochasticPauliChannel.bitflip,
}


@dataclass(frozen=True)
class NoiseModel:
    """Stochastic Pauli noise after every elementary gate.

    ``gamma`` is the per-gate error of rotations (non-Clifford gates) and
    ``gamma_c`` that of Pauli/Clifford gates.  The channel acts on the support
    of the gate it follows.  ``gamma_prime = c_pec * gamma`` is the per-gate
    PEC overhead rate; when ``c_pec`` is ``None`` it is set so that
    ``1 + gamma_prime`` equals the exact inverse cost of the family channel on
    ``pec_reference_weight`` qubits.
    """

    gamma: float
    gamma_c: float = 0.0
    family: str = "depolarizing"
    c_pec: float | None = None
    pec_reference_weight: int = 1
    spam: StochasticPauliChannel | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown noise family {self.family!r}; choose from {sorted(_FAMILIES)}")
        for name in ("gamma", "gamma_c"):
            v = getattr(self, name)
            if not 0.0 <= v < 0.5:
                raise ValueError(f"{name}={v} must lie in [0, 0.5)")

    def channel(self, n_qubits: int, support: Sequence[int], clifford: bool = False) -> StochasticPauliChannel:
        rate = self.gamma_c if clifford else self.gamma
        return _FAMILIES[self.family](n_qubits, tuple(support), rate)

    @cached_property
    def resolved_c_pec(self) -> float:
        if self.c_pec is not None:
            return float(self.c_pec)
        if self.gamma == 0.0:
            return 0.0
        w = self.pec_reference_weight
        ch = _FAMILIES[self.family](w, tuple(range(w)), self.gamma)
        return (ch.inverse().one_norm - 1.0) / self.gamma

    @property
    def gamma_prime(self) -> float:
        return self.resolved_c_pec * self.gamma
