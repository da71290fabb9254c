"""Randomized linear-combination-of-unitaries (RLCU) simulation.

Each of ``r`` segments approximates ``exp(-i H t / r)`` by a random unitary
``sign * P_l1 ... P_lk exp(-i theta_k P_m)`` whose Taylor order ``k`` is even
and drawn from ``p(k) ~ lambda^k / k! * sqrt(1 + (lambda/(k+1))^2)`` with
``lambda = beta t / r``.  Two independent segment products ``W1`` and ``W0``
are run on the two branches of an ancilla prepared in ``|+>``; measuring
``X (x) O`` and reweighting by ``||alpha||_1^(2r)`` and the signs gives an
unbiased estimate of ``Tr[O exp(-iHt) rho exp(iHt)]``.

Negative Hamiltonian coefficients are handled by folding ``sgn(lambda_l)``
into the global sign for the Pauli factors and into the rotation angle for
the rotation factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import NoiseModel, pauli_rotation
from .circuits import Gate
from .errors import CapacityError, DimensionError
from .pauli import MAX_DENSE_QUBITS, Hamiltonian, PauliString
from .sampling import DEFAULT_BLOCK, PauliTable, apply_rows, run_blocks


# --------------------------------------------------------------------------
# Taylor-order law
# --------------------------------------------------------------------------


def _log_weight(k: int, lam: float) -> float:
    if lam == 0.0:
        return 0.0 if k == 0 else -math.inf
    return k * math.log(lam) - math.lgamma(k + 1) + 0.5 * math.log1p((lam / (k + 1)) ** 2)


def lcu_one_norm(lam: float, tol: float = 1e-16) -> float:
    """``sum_{k even} lambda^k / k! * sqrt(1 + (lambda/(k+1))^2)``, summed to relative ``tol``."""
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    total, k = 0.0, 0
    while True:
        w = math.exp(_log_weight(k, lam))
        total += w
        if w <= tol * total and k > lam:
            return total
        k += 2


def taylor_order_pmf(lam: float, tol: float = 1e-18) -> tuple[np.ndarray, np.ndarray]:
    """Even orders ``k`` and their probabilities ``p(k, lambda)`` (tail below ``tol`` dropped)."""
    norm = lcu_one_norm(lam)
    ks, ps = [], []
    k = 0
    while True:
        p = math.exp(_log_weight(k, lam)) / norm
        ks.append(k)
        ps.append(p)
        if p < tol and k > lam:
            break
        k += 2
    return np.array(ks), np.array(ps)


def sample_taylor_orders(lam: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` draws of ``k``: Poisson(lambda), odd draws rejected, then thinned by ``a_k / a_0``."""
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    out = np.empty(size, dtype=np.int64)
    if lam == 0.0:
        out[:] = 0
        return out
    a0 = math.sqrt(1.0 + lam * lam)
    filled = 0
    while filled < size:
        need = size - filled
        draw = rng.poisson(lam, size=max(2 * need + 16, 64))
        draw = draw[draw % 2 == 0]
        accept = rng.random(draw.size) * a0 < np.sqrt(1.0 + (lam / (draw + 1.0)) ** 2)
        draw = draw[accept][:need]
        out[filled : filled + draw.size] = draw
        filled += draw.size
    return out


def sample_taylor_order(lam: float, rng: np.random.Generator) -> int:
    return int(sample_taylor_orders(lam, 1, rng)[0])


def k_moment_bounds(lam: float) -> tuple[float, float]:
    """``(lambda tanh lambda, lambda^2 + lambda tanh lambda)``: bounds on the mean and variance of ``k``."""
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    m = lam * math.tanh(lam)
    return m, lam * lam + m


def even_poisson_mgf(lam: float, s: float) -> float:
    """Moment generating function ``cosh(lambda e^s) / cosh(lambda)`` of the even-Poisson law."""
    return math.cosh(lam * math.exp(s)) / math.cosh(lam)


def exact_moments(lam: float) -> dict[str, float]:
    """Mean and variance of ``k`` under the thinned law ``p`` and the even-Poisson law ``q``."""
    ks, ps = taylor_order_pmf(lam)
    mean_p = float(ks @ ps)
    var_p = float((ks**2) @ ps - mean_p**2)
    mean_q = lam * math.tanh(lam)
    second_q = lam * lam + mean_q
    return {
        "mean_p": mean_p,
        "var_p": var_p,
        "mean_q": mean_q,
        "second_q": second_q,
        "var_q": second_q - mean_q**2,
    }


# --------------------------------------------------------------------------
# segments
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RlcuConfig:
    t_tilde: float
    r: int
    shots: int
    seed: int = 0

    def __post_init__(self):
        if self.r < 1:
            raise ValueError(f"r must be a positive integer, got {self.r}")
        if self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")
        if self.t_tilde < 0:
            raise ValueError("t_tilde must be nonnegative")

    @property
    def lam(self) -> float:
        return self.t_tilde / self.r


@dataclass(frozen=True)
class SegmentSample:
    """One multi-index ``(k, l_1..l_k, m)``.

    ``sign`` is ``(-1)^(k/2)`` times the signs of the coefficients of
    ``l_1..l_k``; ``rotation_sign`` is the sign of the coefficient of ``m``.
    """

    taylor_order: int
    pauli_indices: tuple[int, ...]
    rotation_index: int
    rotation_angle: float
    sign: int
    rotation_sign: int = 1

    def __post_init__(self):
        if self.taylor_order % 2 or self.taylor_order < 0:
            raise ValueError(f"Taylor order must be even and nonnegative, got {self.taylor_order}")
        if len(self.pauli_indices) != self.taylor_order:
            raise ValueError("need exactly k Pauli indices")


def _rotation_angle(k, lam):
    return np.arctan(lam / (np.asarray(k) + 1.0))


def sample_segment(h: Hamiltonian, lam: float, rng: np.random.Generator) -> SegmentSample:
    k = sample_taylor_order(lam, rng)
    probs = h.probs
    ells = tuple(int(i) for i in rng.choice(h.L, size=k, p=probs))
    m = int(rng.choice(h.L, p=probs))
    signs = np.sign(h.coefficients).astype(int)
    sign = (-1) ** (k // 2) * int(np.prod(signs[list(ells)])) if ells else (-1) ** (k // 2)
    return SegmentSample(k, ells, m, float(_rotation_angle(k, lam)), int(sign), int(signs[m]))


def build_segment_unitary(sample: SegmentSample, h: Hamiltonian) -> tuple[list[Gate], int]:
    """Gates of ``P_l1 ... P_lk exp(-i s_m theta_k P_m)`` in application order, plus the global sign."""
    for i in (*sample.pauli_indices, sample.rotation_index):
        if not 0 <= i < h.L:
            raise IndexError(f"term index {i} out of range for L={h.L}")
    gates = [Gate.rotation(h.paulis[sample.rotation_index], sample.rotation_sign * sample.rotation_angle)]
    gates += [Gate.pauli(h.paulis[i]) for i in reversed(sample.pauli_indices)]
    return gates, sample.sign


def segment_unitary(sample: SegmentSample, h: Hamiltonian) -> np.ndarray:
    gates, sign = build_segment_unitary(sample, h)
    u = np.eye(1 << h.n_qubits, dtype=complex)
    for g in gates:
        u = g.unitary @ u
    return sign * u


def segment_operator_sum(h: Hamiltonian, lam: float, kmax: int = 20) -> np.ndarray:
    """``sum_mu alpha_mu U_mu`` over even ``k <= kmax``, with the Pauli strings summed in closed form.

    The sum over ``l_1..l_k`` of ``prod p_l s_l P_l`` is ``(H / beta)^k``.
    """
    if h.n_qubits > MAX_DENSE_QUBITS:
        raise CapacityError("dense oracle limited to 10 qubits")
    dim = 1 << h.n_qubits
    hn = h.to_matrix() / h.beta
    signs = np.sign(h.coefficients)
    out = np.zeros((dim, dim), dtype=complex)
    power = np.eye(dim, dtype=complex)
    for k in range(0, kmax + 1, 2):
        theta = math.atan(lam / (k + 1))
        amp = math.sqrt(1.0 + (lam / (k + 1)) ** 2)
        rot = sum(p * pauli_rotation(P, s * theta) for p, s, P in zip(h.probs, signs, h.paulis))
        out += (lam**k / math.factorial(k)) * (-1) ** (k // 2) * amp * power @ rot
        power = power @ hn @ hn
    return out


# --------------------------------------------------------------------------
# batched engine
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SegmentBatch:
    """Row-wise segment samples; padded Pauli slots hold the identity index ``L``."""

    orders: np.ndarray
    paulis: np.ndarray
    rotation: np.ndarray
    angles: np.ndarray
    signs: np.ndarray


def sample_segment_batch(h: Hamiltonian, lam: float, size: int, rng: np.random.Generator) -> SegmentBatch:
    L = h.L
    probs = h.probs
    csign = np.sign(h.coefficients)
    orders = sample_taylor_orders(lam, size, rng)
    kmax = int(orders.max()) if size else 0
    paulis = rng.choice(L, size=(size, kmax), p=probs) if kmax else np.zeros((size, 0), dtype=np.int64)
    slot = np.arange(kmax)[None, :]
    paulis = np.where(slot < orders[:, None], paulis, L)
    rotation = rng.choice(L, size=size, p=probs)
    padded_sign = np.append(csign, 1.0)
    signs = np.where((orders // 2) % 2 == 0, 1.0, -1.0) * np.prod(padded_sign[paulis], axis=1)
    angles = csign[rotation] * _rotation_angle(orders, lam)
    return SegmentBatch(orders, paulis, rotation, angles, signs)


def _term_actions(h: Hamiltonian, n_total: int, offset: int):
    """Perm/phase tables for each term (plus identity at index ``L``) on ``n_total`` qubits."""
    perms, phases = [], []
    for p in (*h.paulis, PauliString.identity(h.n_qubits)):
        wide = PauliString(n_total, p.x_mask << offset, p.z_mask << offset)
        perm, phase = wide.action()
        perms.append(perm)
        phases.append(phase)
    return np.stack(perms), np.stack(phases)


def _apply_segment(vecs, batch: SegmentBatch, perms, phases, noise_hook=None, branch=None):
    """Apply ``P_l1..P_lk R_m`` row-wise to ``vecs`` of shape ``(B, J, D)``.

    With ``branch`` set, the gates are controlled on the ancilla (qubit 0)
    being ``branch``; ``noise_hook(vecs, term_idx, clifford)`` runs after every gate.
    """
    dim = perms.shape[1]
    half = dim // 2
    sl = slice(None) if branch is None else slice(branch * half, (branch + 1) * half)

    def gather(idx):
        p, ph = perms[idx], phases[idx]
        if branch is None:
            return p, ph
        # restrict the joint-space action to one ancilla block
        return p[:, sl] - branch * half, ph[:, sl]

    sub = vecs[..., sl]
    p, ph = gather(batch.rotation)
    c = np.cos(batch.angles)[:, None, None]
    s = np.sin(batch.angles)[:, None, None]
    sub = c * sub - 1j * s * apply_rows(sub, p, ph)
    vecs[..., sl] = sub
    if noise_hook is not None:
        vecs = noise_hook(vecs, batch.rotation, False)
    for j in reversed(range(batch.paulis.shape[1])):
        idx = batch.paulis[:, j]
        p, ph = gather(idx)
        vecs[..., sl] = apply_rows(vecs[..., sl], p, ph)
        if noise_hook is not None:
            vecs = noise_hook(vecs, idx, True)
    return vecs


def _check_observable(o: np.ndarray, dim: int) -> np.ndarray:
    o = np.asarray(o, dtype=complex)
    if o.shape != (dim, dim):
        raise DimensionError(f"observable shape {o.shape} does not match dimension {dim}")
    if np.max(np.abs(o - o.conj().T)) > 1e-10:
        raise ValueError("observable is not Hermitian")
    if np.max(np.abs(np.linalg.eigvalsh(o))) > 1.0 + 1e-10:
        raise ValueError("observable norm exceeds 1; rescale it first")
    return o


def _state_components(rho0: np.ndarray):
    evals, evecs = np.linalg.eigh(rho0)
    keep = evals > 1e-14
    return evals[keep], evecs[:, keep].T  # (J,), (J, d)


@dataclass(frozen=True)
class RlcuEstimate:
    """Reweighted RLCU estimate.

    ``variance`` is the sample variance of the per-shot reweighted values, so
    the estimator variance is ``variance / shots``.  ``halfwidth`` is the
    conservative ``4 Gamma / sqrt(M)``.
    """

    mean: float
    variance: float
    gamma_rlcu: float
    shots: int
    lam: float
    r: int

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.shots)

    @property
    def halfwidth(self) -> float:
        return 4.0 * self.gamma_rlcu / math.sqrt(self.shots)


def rlcu_bias_bound(gamma_rlcu: float, gamma: float, gamma_c: float, t_tilde: float, r: int) -> float:
    """``Gamma_RLCU * 2 (gamma r + gamma_c t~^2 / r)``."""
    return gamma_rlcu * 2.0 * (gamma * r + gamma_c * t_tilde**2 / r)


def rlcu_shot_values(
    h: Hamiltonian,
    t: float,
    r: int,
    o: np.ndarray,
    rho0: np.ndarray,
    noise: NoiseModel | None = None,
    shots: int = 1000,
    seed: int = 0,
    measure: bool = False,
    ancilla_noise: bool = True,
    workers: int = 1,
    block_size: int = DEFAULT_BLOCK,
    pec: bool = False,
) -> np.ndarray:
    """Per-shot signed values ``sign * Re Tr[(X (x) O) rho_final]`` (not yet multiplied by Gamma_RLCU).

    With ``pec`` set, every noisy gate is followed by a Pauli correction drawn
    from the quasiprobability inverse of its noise channel, and the shot value
    carries that correction's sign and the gate's overhead ``Gamma_k``.
    """
    if r < 1:
        raise ValueError(f"r must be a positive integer, got {r}")
    n = h.n_qubits
    if n + 1 > MAX_DENSE_QUBITS:
        raise CapacityError("RLCU simulation limited to 9 system qubits")
    dim = 1 << n
    o = _check_observable(o, dim)
    lam = h.beta * t / r
    weights, comps = _state_components(np.asarray(rho0, dtype=complex))
    noisy = noise is not None and (noise.gamma > 0 or noise.gamma_c > 0)

    if not noisy:
        perms, phases = _term_actions(h, n, 0)

        def block(rng, size):
            w1 = np.broadcast_to(comps, (size,) + comps.shape).copy()
            w0 = w1.copy()
            sign = np.ones(size)
            for _ in range(r):
                for w in (w1, w0):
                    b = sample_segment_batch(h, lam, size, rng)
                    w[...] = _apply_segment(w, b, perms, phases)
                    sign *= b.signs
            vals = np.einsum("bjd,de,bje->bj", w0.conj(), o, w1).real @ weights
            return _finish(vals, sign, measure, rng)

    else:
        n_tot = n + 1
        perms, phases = _term_actions(h, n_tot, 1)
        ident = ([PauliString.identity(n_tot)], np.array([1.0]))
        tables, fixes, fix_gamma = {}, {}, {}
        for clifford in (False, True):
            entries, inv_entries, inv_signs, gammas = [], [], [], []
            for p in h.paulis:
                support = tuple(q + 1 for q in p.support)
                if ancilla_noise:
                    support = (0,) + support
                ch = noise.channel(n_tot, support, clifford=clifford)
                entries.append(ch.error_distribution())
                inv = ch.inverse() if ch.rate > 0 else ch
                ws = np.array(list(inv.weights.values()))
                inv_entries.append((list(inv.weights), np.abs(ws)))
                inv_signs.append(np.sign(ws))
                gammas.append(float(np.abs(ws).sum()))
            tables[clifford] = PauliTable(entries + [ident])
            fixes[clifford] = PauliTable(inv_entries + [ident], inv_signs + [np.ones(1)])
            fix_gamma[clifford] = np.array(gammas + [1.0])
        obs = np.kron(np.array([[0, 1], [1, 0]]), o)

        def block(rng, size):
            sign = np.ones(size)

            def hook(vecs, idx, clifford):
                p, ph, _ = tables[clifford].sample(idx, rng)
                vecs = apply_rows(vecs, p, ph)
                if pec:
                    p, ph, sg = fixes[clifford].sample(idx, rng)
                    vecs = apply_rows(vecs, p, ph)
                    sign[:] *= sg * fix_gamma[clifford][idx]
                return vecs

            joint = np.concatenate([comps, comps], axis=1) / math.sqrt(2.0)
            psi = np.broadcast_to(joint, (size,) + joint.shape).copy()
            for _ in range(r):
                for branch in (1, 0):
                    b = sample_segment_batch(h, lam, size, rng)
                    psi = _apply_segment(psi, b, perms, phases, hook, branch)
                    sign *= b.signs
            vals = np.einsum("bjd,de,bje->bj", psi.conj(), obs, psi).real @ weights
            return _finish(vals, sign, measure, rng)

    return run_blocks(block, shots, seed, block_size, workers)


def _finish(vals, sign, measure, rng):
    if measure:
        vals = np.where(rng.random(vals.size) < 0.5 * (1.0 + np.clip(vals, -1, 1)), 1.0, -1.0)
    return sign * vals


def run_rlcu_estimate(
    h: Hamiltonian,
    t: float,
    r: int,
    o: np.ndarray,
    rho0: np.ndarray,
    noise: NoiseModel | None = None,
    shots: int = 1000,
    seed: int = 0,
    measure: bool = False,
    ancilla_noise: bool = True,
    workers: int = 1,
    block_size: int = DEFAULT_BLOCK,
    pec: bool = False,
) -> RlcuEstimate:
    """RLCU estimate of ``Tr[O exp(-iHt) rho0 exp(iHt)]`` from ``shots`` sampled circuits."""
    vals = rlcu_shot_values(h, t, r, o, rho0, noise, shots, seed, measure, ancilla_noise, workers,
                            block_size, pec)
    lam = h.beta * t / r
    gamma = lcu_one_norm(lam) ** (2 * r)
    scaled = gamma * vals
    var = float(np.var(scaled, ddof=1)) if shots > 1 else 0.0
    return RlcuEstimate(float(np.mean(scaled)), var, gamma, shots, lam, r)


def ancilla_round_states(h: Hamiltonian, t: float, r: int, psi0: np.ndarray, rng: np.random.Generator):
    """Reduced ancilla density matrix after each round of one noiseless sampled circuit."""
    n = h.n_qubits
    dim = 1 << n
    lam = h.beta * t / r
    perms, phases = _term_actions(h, n + 1, 1)
    psi0 = np.asarray(psi0, dtype=complex).reshape(1, 1, dim)
    psi = np.concatenate([psi0, psi0], axis=2) / math.sqrt(2.0)
    out = []
    for _ in range(r):
        for branch in (1, 0):
            psi = _apply_segment(psi, sample_segment_batch(h, lam, 1, rng), perms, phases, None, branch)
        blocks = psi[0, 0].reshape(2, dim)
        out.append(blocks @ blocks.conj().T)
    return out


__all__ = [
    "RlcuConfig",
    "RlcuEstimate",
    "SegmentBatch",
    "SegmentSample",
    "ancilla_round_states",
    "build_segment_unitary",
    "even_poisson_mgf",
    "exact_moments",
    "k_moment_bounds",
    "lcu_one_norm",
    "rlcu_bias_bound",
    "rlcu_shot_values",
    "run_rlcu_estimate",
    "sample_segment",
    "sample_segment_batch",
    "sample_taylor_order",
    "sample_taylor_orders",
    "segment_operator_sum",
    "segment_unitary",
    "taylor_order_pmf",
]
