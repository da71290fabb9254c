"""Probabilistic error cancellation (PEC) and space-time noise inversion (SNI).

Both methods insert Pauli operators into a :class:`NoisyCircuit` after the
noise channel of selected gates, weight each sampled circuit by a sign, and
rescale the average by an overhead factor ``Gamma``.  Inserted Paulis are
encoded as integers ``(x_mask << n) | z_mask`` so that several insertions at
the same location compose by XOR (phases cancel under conjugation).  Each
block of shots is reduced to its distinct insertion patterns before the
exact density-matrix evaluation, which is what keeps ``10^5`` shots cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .channels import (
    NoiseModel,
    PauliMap,
    StochasticPauliChannel,
    basis_state,
    expectation,
)
from .circuits import NoisyCircuit
from .errors import CapacityError, DimensionError, InfeasibleSegmentationError
from .pauli import PauliString
from .sampling import DEFAULT_BLOCK, run_blocks

MAX_PEC_PATHS = 10**6
EXHAUSTIVE_CHUNK = 1 << 14
REJECTION_FLOOR = 1e-3


# --------------------------------------------------------------------------
# Pauli codes
# --------------------------------------------------------------------------


def pauli_code(p: PauliString) -> int:
    return (p.x_mask << p.n_qubits) | p.z_mask


@lru_cache(maxsize=16)
def _code_actions(n: int):
    size = 4**n
    mask = (1 << n) - 1
    perms = np.empty((size, 1 << n), dtype=np.int64)
    phases = np.empty((size, 1 << n), dtype=complex)
    for c in range(size):
        perms[c], phases[c] = PauliString(n, c >> n, c & mask).action()
    return perms, phases


def _inserts_from_codes(n: int, codes: np.ndarray):
    """Per-gate ``(perms, phases)`` row batches (``None`` where no row inserts anything)."""
    perms, phases = _code_actions(n)
    out = []
    for g in range(codes.shape[1]):
        col = codes[:, g]
        out.append(None if not col.any() else (perms[col], phases[col]))
    return out


def evaluate_patterns(circuit: NoisyCircuit, o: np.ndarray, rho0: np.ndarray, codes: np.ndarray) -> np.ndarray:
    """``Tr[O C_row(rho0)]`` for every row of insertion codes, evaluating each distinct row once."""
    if codes.shape[1] != len(circuit):
        raise DimensionError("one code column per gate required")
    uniq, inverse = np.unique(codes, axis=0, return_inverse=True)
    vals = np.empty(len(uniq))
    for start in range(0, len(uniq), EXHAUSTIVE_CHUNK):
        chunk = uniq[start : start + EXHAUSTIVE_CHUNK]
        rho = circuit.run(rho0, noisy=True, inserts=_inserts_from_codes(circuit.n_qubits, chunk))
        if rho.ndim == 2:
            rho = np.broadcast_to(rho, (len(chunk),) + rho.shape)
        vals[start : start + len(chunk)] = expectation(o, rho, check=False)
    return vals[inverse.reshape(-1)]


# --------------------------------------------------------------------------
# quasiprobability decompositions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class QuasiProbDecomposition:
    """Signed Pauli corrections ``sum_i q_i P_i (.) P_i`` with ``Gamma = sum |q_i|``."""

    n_qubits: int
    entries: tuple[tuple[float, PauliString], ...]

    @classmethod
    def from_map(cls, m: PauliMap, drop: float = 0.0) -> QuasiProbDecomposition:
        entries = tuple((w, p) for p, w in m.weights.items() if abs(w) > drop)
        return cls(m.n_qubits, entries)

    @classmethod
    def identity(cls, n_qubits: int) -> QuasiProbDecomposition:
        return cls(n_qubits, ((1.0, PauliString.identity(n_qubits)),))

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.entries])

    @property
    def gamma(self) -> float:
        return float(np.abs(self.weights).sum())

    @property
    def probs(self) -> np.ndarray:
        w = np.abs(self.weights)
        return w / w.sum()

    @property
    def signs(self) -> np.ndarray:
        return np.sign(self.weights)

    @property
    def codes(self) -> np.ndarray:
        return np.array([pauli_code(p) for _, p in self.entries], dtype=np.int64)

    def as_map(self) -> PauliMap:
        return PauliMap(self.n_qubits, {p: w for w, p in self.entries})

    def after(self, channel: PauliMap) -> PauliMap:
        """The correction applied after ``channel``."""
        return channel.then(self.as_map())


def invert_pauli_channel(channel: StochasticPauliChannel) -> QuasiProbDecomposition:
    """Exact quasiprobability inverse of a stochastic Pauli channel over its support."""
    if channel.rate == 0.0:
        return QuasiProbDecomposition.identity(channel.n_qubits)
    return QuasiProbDecomposition.from_map(channel.inverse())


def build_pec_model(
    circuit: NoisyCircuit, rate_shift: float = 0.0
) -> list[QuasiProbDecomposition | None]:
    """Per-gate inverses of the circuit's noise; ``rate_shift`` builds them from mis-estimated rates."""
    model = []
    for ch in circuit.noise:
        if ch is None or (ch.rate == 0.0 and rate_shift == 0.0):
            model.append(None)
        else:
            model.append(invert_pauli_channel(ch.with_rate(ch.rate + rate_shift)))
    return model


def _check_model(circuit: NoisyCircuit, model: Sequence[QuasiProbDecomposition | None]):
    if len(model) != len(circuit):
        raise DimensionError(f"model has {len(model)} entries for {len(circuit)} gates")
    for k, (ch, q) in enumerate(zip(circuit.noise, model)):
        if q is None and ch is not None and ch.rate > 0.0:
            raise ValueError(f"gate {k} is noisy but has no inverse model")
        if q is not None and q.n_qubits != circuit.n_qubits:
            raise DimensionError(f"model entry {k} has the wrong width")


def model_mismatch(circuit: NoisyCircuit, model: Sequence[QuasiProbDecomposition | None]) -> np.ndarray:
    """Per-gate ``Delta gamma_k``: Choi distance of (model inverse after true noise) to the identity."""
    _check_model(circuit, model)
    out = []
    for ch, q in zip(circuit.noise, model):
        true = ch if ch is not None else PauliMap.identity(circuit.n_qubits)
        corr = q.as_map() if q is not None else PauliMap.identity(circuit.n_qubits)
        out.append(true.then(corr).distance_to_identity())
    return np.array(out)


def mismatch_bias_bound(dgammas: Sequence[float], factor: float = 0.5) -> float:
    """``factor * (prod_k (1 + 2 Delta gamma_k) - 1)``.

    ``factor = 1/2`` gives the commonly quoted bound; ``factor = 1`` is what
    the triangle inequality guarantees for observables with ``||O|| <= 1``.
    """
    return factor * (float(np.prod(1.0 + 2.0 * np.asarray(dgammas))) - 1.0)


# --------------------------------------------------------------------------
# estimates
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MitigatedEstimate:
    """``variance`` is the per-shot sample variance of the reweighted values."""

    mean: float
    variance: float
    gamma: float
    shots: int
    mode: str

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.shots) if self.shots else 0.0

    @property
    def halfwidth(self) -> float:
        return 4.0 * self.gamma / math.sqrt(self.shots) if self.shots else 0.0


def _summarize(values: np.ndarray, gamma: float, mode: str) -> MitigatedEstimate:
    var = float(np.var(values, ddof=1)) if values.size > 1 else 0.0
    return MitigatedEstimate(float(np.mean(values)), var, gamma, int(values.size), mode)


def _default_state(circuit, rho0):
    return basis_state(circuit.n_qubits) if rho0 is None else np.asarray(rho0, dtype=complex)


def noisy_expectation(circuit: NoisyCircuit, o: np.ndarray, rho0: np.ndarray | None = None) -> float:
    """Unmitigated expectation of the noisy circuit, composed exactly."""
    return float(expectation(o, circuit.run(_default_state(circuit, rho0))))


def ideal_expectation(circuit: NoisyCircuit, o: np.ndarray, rho0: np.ndarray | None = None) -> float:
    return float(expectation(o, circuit.run(_default_state(circuit, rho0), noisy=False)))


def pec_estimate(
    circuit: NoisyCircuit,
    model: Sequence[QuasiProbDecomposition | None],
    o: np.ndarray,
    rho0: np.ndarray | None = None,
    shots: int = 10000,
    seed: int = 0,
    workers: int = 1,
    block_size: int = DEFAULT_BLOCK,
) -> MitigatedEstimate:
    """Sampled PEC: one correction per gate, drawn with probability ``|q_i| / Gamma_k``."""
    _check_model(circuit, model)
    rho0 = _default_state(circuit, rho0)
    active = [k for k, q in enumerate(model) if q is not None]
    gamma = float(np.prod([model[k].gamma for k in active])) if active else 1.0
    tables = [(np.cumsum(model[k].probs), model[k].codes, model[k].signs) for k in active]

    def block(rng, size):
        codes = np.zeros((size, len(circuit)), dtype=np.int64)
        sign = np.ones(size)
        for k, (cum, cds, sgn) in zip(active, tables):
            j = np.minimum(np.searchsorted(cum, rng.random(size), side="right"), len(cds) - 1)
            codes[:, k] = cds[j]
            sign *= sgn[j]
        return gamma * sign * evaluate_patterns(circuit, o, rho0, codes)

    return _summarize(run_blocks(block, shots, seed, block_size, workers), gamma, "pec")


def pec_path_count(model: Sequence[QuasiProbDecomposition | None]) -> int:
    return math.prod(len(q.entries) for q in model if q is not None)


def pec_exhaustive(
    circuit: NoisyCircuit,
    model: Sequence[QuasiProbDecomposition | None],
    o: np.ndarray,
    rho0: np.ndarray | None = None,
    max_paths: int = MAX_PEC_PATHS,
) -> float:
    """Exact signed sum over every correction path.

    Paths are expanded breadth-first gate by gate; once a batch of partial
    paths grows past a chunk size it is split and finished depth-first, so
    memory stays bounded.
    """
    _check_model(circuit, model)
    n_paths = pec_path_count(model)
    if n_paths > max_paths:
        raise CapacityError(f"{n_paths} correction paths exceed the cap of {max_paths}")
    rho0 = _default_state(circuit, rho0)
    perms, phases = _code_actions(circuit.n_qubits)
    o = np.asarray(o)

    def step(rhos: np.ndarray, weights: np.ndarray, k: int) -> float:
        while k < len(circuit):
            g = circuit.gates[k]
            rhos = g.unitary @ rhos @ g.unitary.conj().T
            ch = circuit.noise[k]
            if ch is not None and ch.rate > 0.0:
                rhos = ch.apply(rhos)
            q = model[k]
            if q is not None and len(q.entries) > 1:
                cds, qs = q.codes, q.weights
                b, c = len(rhos), len(cds)
                rows = np.repeat(rhos, c, axis=0)
                rows = _conjugate_rows(rows, np.tile(perms[cds], (b, 1)), np.tile(phases[cds], (b, 1)))
                rhos, weights = rows, np.repeat(weights, c) * np.tile(qs, b)
            elif q is not None:
                w, p = q.entries[0]
                rhos = _conjugate_rows(
                    rhos, np.broadcast_to(p.action()[0], rhos.shape[:2]), np.broadcast_to(p.action()[1], rhos.shape[:2])
                )
                weights = weights * w
            k += 1
            if len(rhos) > EXHAUSTIVE_CHUNK and k < len(circuit):
                return sum(
                    step(rhos[s : s + EXHAUSTIVE_CHUNK], weights[s : s + EXHAUSTIVE_CHUNK], k)
                    for s in range(0, len(rhos), EXHAUSTIVE_CHUNK)
                )
        return float(weights @ np.einsum("ij,bji->b", o, rhos).real)

    return step(rho0[None], np.ones(1), 0)


def _conjugate_rows(rhos, perms, phases):
    out = np.take_along_axis(rhos, perms[:, :, None], axis=1)
    out = np.take_along_axis(out, perms[:, None, :], axis=2)
    return out * (phases[:, :, None] * phases.conj()[:, None, :])


def pec_linear(
    circuit: NoisyCircuit,
    model: Sequence[QuasiProbDecomposition | None],
    o: np.ndarray,
    rho0: np.ndarray | None = None,
) -> float:
    """The same quantity as :func:`pec_exhaustive`, obtained by applying each quasi-inverse as a linear map."""
    _check_model(circuit, model)
    rho = _default_state(circuit, rho0)
    for g, ch, q in zip(circuit.gates, circuit.noise, model):
        rho = g.unitary @ rho @ g.unitary.conj().T
        if ch is not None and ch.rate > 0.0:
            rho = ch.apply(rho)
        if q is not None:
            rho = q.as_map().apply(rho)
    return float(expectation(o, rho, check=False))


# --------------------------------------------------------------------------
# space-time noise inversion
# --------------------------------------------------------------------------


def segment_error_probability(q: float, d: float, s: float) -> float:
    """``q_ST = 1 - (1 - q)^(d/s)`` for ``d`` layers of per-layer error ``q`` split into ``s`` segments."""
    return 1.0 - (1.0 - q) ** (d / s)


def sni_series_weight(p: float, l: int) -> float:
    """``q_l = (-1)^l p^l / (1-p)^(l+1)``."""
    return (-1) ** l * p**l / (1.0 - p) ** (l + 1)


@dataclass(frozen=True)
class SniPlan:
    """Contiguous gate segments and their space-time error probabilities."""

    bounds: tuple[tuple[int, int], ...]
    q_st: tuple[float, ...]

    def __post_init__(self):
        if not self.bounds:
            raise ValueError("need at least one segment")
        for q in self.q_st:
            if not 0.0 <= q < 0.5:
                raise InfeasibleSegmentationError(f"segment error probability {q:.6g} is not below 1/2")

    @property
    def segments(self) -> int:
        return len(self.bounds)

    @property
    def gamma_seg(self) -> tuple[float, ...]:
        return tuple(1.0 / (1.0 - 2.0 * q) for q in self.q_st)

    @property
    def gamma(self) -> float:
        return float(np.prod(self.gamma_seg))

    def series_weights(self, segment: int, lmax: int) -> np.ndarray:
        return np.array([sni_series_weight(self.q_st[segment], l) for l in range(lmax + 1)])


def _split_bounds(n_gates: int, s: int) -> tuple[tuple[int, int], ...]:
    edges = np.linspace(0, n_gates, s + 1).round().astype(int)
    return tuple((int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]))


def _plan_q(circuit: NoisyCircuit, bounds) -> tuple[float, ...]:
    p0 = np.array([1.0 if ch is None else ch.identity_weight for ch in circuit.noise])
    return tuple(float(1.0 - np.prod(p0[a:b])) for a, b in bounds)


def sni_plan(circuit: NoisyCircuit, s: int = 1, noise: NoiseModel | None = None) -> SniPlan:
    """Split the gates into ``s`` near-equal contiguous segments (attaching ``noise`` first if given)."""
    if noise is not None:
        circuit = NoisyCircuit.from_gates(circuit.n_qubits, circuit.gates, noise)
    if s < 1:
        raise ValueError(f"need s >= 1, got {s}")
    if s > max(len(circuit), 1):
        raise ValueError(f"cannot split {len(circuit)} gates into {s} segments")
    bounds = _split_bounds(len(circuit), s)
    q = _plan_q(circuit, bounds)
    if max(q) >= 0.5:
        minimal = None
        for s2 in range(s + 1, len(circuit) + 1):
            if max(_plan_q(circuit, _split_bounds(len(circuit), s2))) < 0.5:
                minimal = s2
                break
        raise InfeasibleSegmentationError(
            f"segment error probability {max(q):.6g} >= 1/2 with s={s}", minimal_segments=minimal
        )
    return SniPlan(bounds, q)


def _gate_error_tables(circuit: NoisyCircuit):
    """Per gate: codes and cumulative probabilities of its error distribution (identity first)."""
    out = []
    for ch in circuit.noise:
        if ch is None or ch.rate == 0.0:
            out.append((np.zeros(1, dtype=np.int64), np.ones(1), 1.0))
            continue
        paulis, probs = ch.error_distribution()
        codes = np.array([pauli_code(p) for p in paulis], dtype=np.int64)
        out.append((codes, np.cumsum(probs), float(probs[0])))
    return out


def _draw_codes(table, u):
    codes, cum, _ = table
    return codes[np.minimum(np.searchsorted(cum, u, side="right"), len(codes) - 1)]


def _draw_nonidentity(table, u):
    """Error drawn from the gate's distribution conditioned on not being the identity."""
    codes, cum, p0 = table
    return codes[np.minimum(np.searchsorted(cum, p0 + u * (1.0 - p0), side="right"), len(codes) - 1)]


def sample_error_patterns(tables, count: int, rng: np.random.Generator, q_st: float) -> np.ndarray:
    """``count`` space-time error patterns over a segment, each with at least one non-identity error.

    Rejection against the all-identity pattern is used while the acceptance
    rate ``q_st`` is at least ``1e-3``; below that an exact sequential
    sampler picks the location of the first error and draws the rest freely.
    """
    n_loc = len(tables)
    out = np.zeros((count, n_loc), dtype=np.int64)
    if count == 0:
        return out
    if q_st >= REJECTION_FLOOR:
        todo = np.arange(count)
        while todo.size:
            u = rng.random((todo.size, n_loc))
            rows = np.stack([_draw_codes(tables[g], u[:, g]) for g in range(n_loc)], axis=1)
            out[todo] = rows
            todo = todo[~rows.any(axis=1)]
        return out
    p0 = np.array([t[2] for t in tables])
    prefix = np.concatenate([[1.0], np.cumprod(p0)[:-1]])
    first = prefix * (1.0 - p0)
    first = np.cumsum(first / first.sum())
    loc = np.minimum(np.searchsorted(first, rng.random(count), side="right"), n_loc - 1)
    u = rng.random((count, n_loc))
    for g in range(n_loc):
        free = _draw_codes(tables[g], u[:, g])
        forced = _draw_nonidentity(tables[g], u[:, g])
        out[:, g] = np.where(loc == g, forced, np.where(loc < g, free, 0))
    return out


def sni_estimate(
    plan: SniPlan,
    circuit: NoisyCircuit,
    o: np.ndarray,
    rho0: np.ndarray | None = None,
    shots: int = 10000,
    seed: int = 0,
    workers: int = 1,
    block_size: int = DEFAULT_BLOCK,
) -> MitigatedEstimate:
    """Sampled SNI: per segment draw ``l`` from the geometric series law and insert ``l`` error patterns."""
    if plan.bounds[-1][1] != len(circuit):
        raise DimensionError("plan does not cover the circuit")
    rho0 = _default_state(circuit, rho0)
    tables = _gate_error_tables(circuit)
    gamma = plan.gamma

    def block(rng, size):
        codes = np.zeros((size, len(circuit)), dtype=np.int64)
        sign = np.ones(size)
        for (a, b), q in zip(plan.bounds, plan.q_st):
            if q == 0.0:
                continue
            ratio = q / (1.0 - q)
            ls = rng.geometric(1.0 - ratio, size=size) - 1
            sign *= np.where(ls % 2 == 0, 1.0, -1.0)
            owner = np.repeat(np.arange(size), ls)
            pats = sample_error_patterns(tables[a:b], owner.size, rng, q)
            for j in range(b - a):
                np.bitwise_xor.at(codes[:, a + j], owner, pats[:, j])
        return gamma * sign * evaluate_patterns(circuit, o, rho0, codes)

    return _summarize(run_blocks(block, shots, seed, block_size, workers), gamma, "sni")


def _exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


def sni_overhead(q: float, d: float, s: float) -> tuple[float, float, float]:
    """``(exact, lower, upper)`` sampling overhead ``(1 - 2 q_ST)^(-2s)`` and its exponential sandwich."""
    if s <= 2.0 * q * d:
        raise InfeasibleSegmentationError(
            f"need s > 2qd = {2 * q * d:.6g}", minimal_segments=math.floor(2.0 * q * d) + 1
        )
    q_st = segment_error_probability(q, d, s)
    exact = (1.0 - 2.0 * q_st) ** (-2.0 * s)
    lower = _exp(4.0 * q * d)
    upper = _exp(4.0 * q * d / (1.0 - 2.0 * q * d / s))
    return exact, lower, upper


__all__ = [
    "MitigatedEstimate",
    "QuasiProbDecomposition",
    "SniPlan",
    "build_pec_model",
    "evaluate_patterns",
    "ideal_expectation",
    "invert_pauli_channel",
    "mismatch_bias_bound",
    "model_mismatch",
    "noisy_expectation",
    "pauli_code",
    "pec_estimate",
    "pec_exhaustive",
    "pec_linear",
    "pec_path_count",
    "sample_error_patterns",
    "segment_error_probability",
    "sni_estimate",
    "sni_overhead",
    "sni_plan",
    "sni_series_weight",
]
