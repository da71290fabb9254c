"""Closed-form and numerically solved resource estimates.

All ``O(.)`` costs (GST and SNI characterization budgets) use a unit
constant and are reported in "model units".  Depths and sample counts stay
real-valued here; rounding happens only when results are reported.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import bisect, brentq

from .channels import NoiseModel
from .mitigation import segment_error_probability
from .errors import InfeasibleSegmentationError

MODEL_UNITS = "model units (unit constants in all O(.) budgets)"


def c_k(k: int) -> float:
    """``C_k = k^(1/(k+1)) + k^(-k/(k+1))``."""
    return k ** (1.0 / (k + 1)) + k ** (-k / (k + 1))


def _check_order(k: int) -> None:
    if k < 1 or (k > 1 and k % 2):
        raise ValueError(f"order must be 1 or even, got {k}")


# --------------------------------------------------------------------------
# Trotter
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TrotterCostInputs:
    """``alpha_k / d^k`` algorithmic error, ``L`` terms, per-gate error ``gamma``, PEC rate ``gamma_prime``."""

    alpha_k: float
    k: int
    L: int
    gamma: float
    gamma_prime: float | None = None

    def __post_init__(self):
        _check_order(self.k)
        if self.alpha_k <= 0 or self.L < 1 or self.gamma < 0:
            raise ValueError("alpha_k and L must be positive, gamma nonnegative")
        if self.gamma_prime is not None and self.gamma_prime < 0:
            raise ValueError("gamma_prime must be nonnegative")

    @classmethod
    def from_noise(cls, alpha_k: float, k: int, L: int, noise: NoiseModel) -> TrotterCostInputs:
        return cls(alpha_k, k, L, noise.gamma, noise.gamma_prime)

    @property
    def C_k(self) -> float:
        return c_k(self.k)

    @property
    def gp(self) -> float:
        if self.gamma_prime is None:
            raise ValueError("gamma_prime is required for mitigated costs")
        return self.gamma_prime


def trotter_error_bound(inp: TrotterCostInputs) -> float:
    """``eps_b = C_k alpha_k^(1/(k+1)) (L gamma)^(k/(k+1))``: the unmitigated error floor."""
    k = inp.k
    return inp.C_k * inp.alpha_k ** (1.0 / (k + 1)) * (inp.L * inp.gamma) ** (k / (k + 1))


def trotter_rmse_noqem(inp: TrotterCostInputs, d: float) -> float:
    """``alpha_k / d^k + L d gamma``."""
    return inp.alpha_k / d**inp.k + inp.L * d * inp.gamma


def trotter_optimal_depth_noqem(inp: TrotterCostInputs) -> float:
    """``d* = (k alpha_k / (L gamma))^(1/(k+1))``."""
    if inp.gamma == 0:
        return math.inf
    return (inp.k * inp.alpha_k / (inp.L * inp.gamma)) ** (1.0 / (inp.k + 1))


def critical_error(inp: TrotterCostInputs) -> float:
    """``eps_c = alpha_k (L gamma' / k)^k``."""
    return inp.alpha_k * (inp.L * inp.gp / inp.k) ** inp.k


def crossover_depth(inp: TrotterCostInputs) -> float:
    """``d = k / (gamma' L)``, where the algorithmic and sampling terms of the depth condition are equal."""
    return inp.k / (inp.gp * inp.L)


def depth_condition_terms(inp: TrotterCostInputs, d: float) -> tuple[float, float]:
    """The two summands ``(1, k / (gamma' L d))`` of the optimal-depth condition."""
    return 1.0, inp.k / (inp.gp * inp.L * d)


def depth_condition_rhs(inp: TrotterCostInputs, d: float) -> float:
    """``alpha_k^2 / d^(2k) * (1 + k / (gamma' L d))``, strictly decreasing in ``d``."""
    a, b = depth_condition_terms(inp, d)
    return inp.alpha_k**2 / d ** (2 * inp.k) * (a + b)


def trotter_optimal_depth_pec(inp: TrotterCostInputs, epsilon: float) -> float:
    """Unique root ``d`` of ``eps^2 = alpha_k^2/d^(2k) (1 + k/(gamma' L d))``, by bisection in ``log d``."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    target = 2.0 * math.log(epsilon)

    def f(u: float) -> float:
        return math.log(depth_condition_rhs(inp, math.exp(u))) - target

    lo, hi = -1.0, 1.0
    while f(lo) < 0:
        lo *= 2.0
    while f(hi) > 0:
        hi *= 2.0
    u = bisect(f, lo, hi, xtol=1e-15, rtol=4.0 * np.finfo(float).eps, maxiter=2000)
    return math.exp(u)


def _exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


def trotter_log_samples_at_depth(inp: TrotterCostInputs, d: float) -> float:
    k = inp.k
    return (math.log(inp.L * inp.gp / (k * inp.alpha_k**2)) + 2 * inp.L * d * inp.gp
            + (2 * k + 1) * math.log(d))


def trotter_samples_at_depth(inp: TrotterCostInputs, d: float) -> float:
    """``M = (L gamma' / (k alpha_k^2)) e^(2 L d gamma') d^(2k+1)`` (``inf`` past float range)."""
    return _exp(trotter_log_samples_at_depth(inp, d))


def trotter_m_branches(inp: TrotterCostInputs, epsilon: float) -> dict[str, float]:
    """The three asymptotic forms of ``M(eps)``: far below, at, and far above ``eps_c``."""
    k = inp.k
    ec = critical_error(inp)
    ratio = ec / epsilon
    small = _exp(math.log(ratio) / k + 2 * k * ratio ** (1.0 / k) - 2 * math.log(epsilon))
    critical = math.exp(2 * k) / ec**2
    large = (1.0 + 2 * k * ratio ** (2.0 / (2 * k + 1))) / epsilon**2
    return {"small_eps": small, "critical": critical, "large_eps": large}


def trotter_regime(inp: TrotterCostInputs, epsilon: float) -> str:
    return "below_critical" if epsilon < critical_error(inp) else "above_critical"


@dataclass(frozen=True)
class TrotterSamples:
    d: float
    M: float
    regime: str
    branches: dict


def trotter_samples(inp: TrotterCostInputs, epsilon: float) -> TrotterSamples:
    """Optimal depth and sample count for target ``epsilon`` (solve for ``d``, then evaluate ``M``)."""
    d = trotter_optimal_depth_pec(inp, epsilon)
    return TrotterSamples(d, trotter_samples_at_depth(inp, d), trotter_regime(inp, epsilon),
                          trotter_m_branches(inp, epsilon))


# --------------------------------------------------------------------------
# randomized LCU
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RlcuCostInputs:
    beta: float
    t: float
    gamma_prime: float
    gamma_c: float = 0.0

    def __post_init__(self):
        if self.beta <= 0 or self.t < 0 or self.gamma_prime < 0 or self.gamma_c < 0:
            raise ValueError("beta must be positive; t, gamma_prime, gamma_c nonnegative")

    @classmethod
    def from_t_tilde(cls, t_tilde: float, gamma_prime: float, gamma_c: float = 0.0) -> RlcuCostInputs:
        return cls(1.0, t_tilde, gamma_prime, gamma_c)

    @property
    def t_tilde(self) -> float:
        return self.beta * self.t


def rlcu_optimal_r(inp: RlcuCostInputs) -> tuple[float, str]:
    """``(t~ / sqrt(2 gamma'), "optimized")`` when ``sqrt(2 gamma') t~ >= 1``, else ``(t~^2, "shallow")``."""
    tt = inp.t_tilde
    if inp.gamma_prime > 0 and math.sqrt(2 * inp.gamma_prime) * tt >= 1.0:
        return tt / math.sqrt(2 * inp.gamma_prime), "optimized"
    return tt * tt, "shallow"


def rlcu_exponent(inp: RlcuCostInputs, r: float) -> float:
    """``t~^2 / r + 2 gamma' r + 2 gamma_c t~``."""
    tt = inp.t_tilde
    return tt * tt / r + 2 * inp.gamma_prime * r + 2 * inp.gamma_c * tt


def rlcu_samples(inp: RlcuCostInputs, epsilon: float, r: float | None = None) -> float:
    """``M = eps^-2 exp(t~^2/r + 2 gamma' r + 2 gamma_c t~)`` (at the optimal ``r`` by default)."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if r is None:
        r = rlcu_optimal_r(inp)[0]
    if r <= 0:
        raise ValueError("r must be positive")
    return math.exp(rlcu_exponent(inp, r)) / epsilon**2


def rlcu_mse_bound(inp: RlcuCostInputs, r: float, M: float) -> float:
    """``M^-1 exp(t~^2/r + 2 gamma' r + t~ (e^(2 gamma_c) - 1))``."""
    if r <= 0 or M <= 0:
        raise ValueError("r and M must be positive")
    tt = inp.t_tilde
    return math.exp(tt * tt / r + 2 * inp.gamma_prime * r + tt * math.expm1(2 * inp.gamma_c)) / M


def rlcu_unmitigated_bias(beta_t: float, gamma: float, gamma_c: float, r: float) -> float:
    """``b(r) = 2 e^((beta t)^2 / r) (gamma r + gamma_c (beta t)^2 / r)``."""
    return 2.0 * math.exp(beta_t**2 / r) * (gamma * r + gamma_c * beta_t**2 / r)


def rlcu_error_bound(beta_t: float, gamma: float, gamma_c: float = 0.0) -> tuple[float, float]:
    """``(min_r b(r), argmin)``.

    With ``u = log r`` the stationarity condition of ``log b`` has exactly one
    root (the positive root of ``r^3 - a r^2 - c a r - c a^2`` with
    ``a = (beta t)^2`` and ``c = gamma_c / gamma``), located with Brent's
    method on the derivative so the argmin is accurate to machine precision.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if beta_t == 0:
        return 0.0, 0.0
    a = beta_t**2

    def slope(u):
        r = math.exp(u)
        num, den = gamma * r - gamma_c * a / r, gamma * r + gamma_c * a / r
        return -a / r + num / den

    center = math.log(a)
    r = math.exp(brentq(slope, center - 30.0, center + 30.0, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return rlcu_unmitigated_bias(beta_t, gamma, gamma_c, r), r


# --------------------------------------------------------------------------
# characterization budgets
# --------------------------------------------------------------------------


def gst_budget(n_gates: float, epsilon: float, gamma: float = 1.0) -> float:
    """``M_g = Gamma^2 N_g^2 / eps^2`` in model units."""
    if n_gates <= 0 or epsilon <= 0 or gamma <= 0:
        raise ValueError("inputs must be positive")
    return gamma**2 * n_gates**2 / epsilon**2


def gst_ratio_trotter(inp: TrotterCostInputs, epsilon: float) -> dict[str, float | str]:
    """``M_g / R`` with ``R = d* L M`` and ``N_g = d* L``, using this module's own ``d*`` and ``M``."""
    s = trotter_samples(inp, epsilon)
    n_g = s.d * inp.L
    mg = gst_budget(n_g, epsilon)
    ratio = mg / (s.d * inp.L * s.M)
    k, gp = inp.k, inp.gp
    x = critical_error(inp) / epsilon
    branches = {
        "small_eps": k / gp * math.exp(-2 * k * x ** (1.0 / k)),
        "critical": k / gp * math.exp(-2 * k),
        "large_eps": k / gp * x ** (2.0 / (2 * k + 1)) / (1 + 2 * k * x ** (2.0 / (2 * k + 1))),
    }
    return {"M_g": mg, "R": s.d * inp.L * s.M, "ratio": ratio, "d": s.d, "M": s.M,
            "regime": s.regime, **{f"branch_{k_}": v for k_, v in branches.items()}}


def gst_ratio_rlcu(inp: RlcuCostInputs, epsilon: float) -> dict[str, float | str]:
    """``M_g / R`` with ``N_g ~ r``, ``Gamma_RLCU^2 = e^(t~^2 / r)`` and ``R = r M``."""
    r, regime = rlcu_optimal_r(inp)
    tt = inp.t_tilde
    gamma2 = math.exp(tt * tt / r)
    mg = gst_budget(r, epsilon, math.sqrt(gamma2))
    m = rlcu_samples(inp, epsilon, r)
    out = {"M_g": mg, "R": r * m, "ratio": mg / (r * m), "r": r, "M": m, "regime": regime}
    if inp.gamma_prime > 0:
        # the optimized branch is quoted with Gamma_RLCU taken at r = t~^2; both variants are reported
        out["M_g_at_r_opt"] = math.exp(tt * tt / (tt / math.sqrt(2 * inp.gamma_prime))) * tt**2 / (
            2 * inp.gamma_prime * epsilon**2)
        out["M_g_at_r_shallow"] = math.e * tt**2 / (2 * inp.gamma_prime * epsilon**2)
        out["branch_ratio"] = tt / math.sqrt(2 * inp.gamma_prime) if regime == "optimized" else tt**2
    else:
        out["branch_ratio"] = tt**2
    return out


def gst_ratio(inputs, epsilon: float) -> dict[str, float | str]:
    if isinstance(inputs, TrotterCostInputs):
        return gst_ratio_trotter(inputs, epsilon)
    if isinstance(inputs, RlcuCostInputs):
        return gst_ratio_rlcu(inputs, epsilon)
    raise TypeError(f"unsupported inputs {type(inputs).__name__}")


def sni_budgets(q: float, d: float, epsilon: float, s: float, L: int = 1) -> dict[str, float]:
    """SNI characterization budget ``M_qST`` and circuit budget ``M`` (model units).

    Also returns the ratio ``M_qST / (d L M)`` and its scaling form
    ``q^2 d / (L e^(4qd))``; with ``s = 4qd`` the ratio is at most 256 times
    the scaling form because ``q_ST <= qd/s = 1/4``.
    """
    if s <= 2.0 * q * d:
        raise InfeasibleSegmentationError(f"need s > 2qd = {2 * q * d:.6g}",
                                          minimal_segments=math.floor(2.0 * q * d) + 1)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    q_st = segment_error_probability(q, d, s)
    m_qst = s * s * (1.0 - 2.0 * q_st) ** -4 / epsilon**2
    m = (1.0 - 2.0 * q_st) ** (-2.0 * s) / epsilon**2
    x = q * d
    return {
        "q_st": q_st,
        "M_qst": m_qst,
        "M": m,
        "ratio": m_qst / (d * L * m),
        "ratio_scaling": q * q * d / (L * math.exp(4.0 * x)),
        "x_exp_bound_holds": float(x * math.exp(-4.0 * x) <= 1.0 / (4.0 * math.e)),
    }


def chebyshev_halfwidth(mse: float, alpha: float) -> float:
    """``sqrt(MSE / alpha)``: a distribution-free ``1 - alpha`` confidence half-width."""
    if mse < 0:
        raise ValueError("mse must be nonnegative")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return math.sqrt(mse / alpha)


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CostReport:
    algorithm: str
    epsilon: float
    epsilon_b: float
    epsilon_c: float | None
    d_star: float | None
    r_star: float | None
    M: float
    M_g: float
    M_qst: float | None
    ratio_Mg_R: float
    regime: str
    units: str = MODEL_UNITS

    def to_dict(self) -> dict:
        return asdict(self)


def trotter_cost_report(inp: TrotterCostInputs, epsilon: float, sni_segments: float | None = None) -> CostReport:
    g = gst_ratio_trotter(inp, epsilon)
    m_qst = None
    if sni_segments is not None:
        q = 1.0 - (1.0 - inp.gamma) ** inp.L
        m_qst = sni_budgets(q, g["d"], epsilon, sni_segments, inp.L)["M_qst"]
    return CostReport("trotter", epsilon, trotter_error_bound(inp), critical_error(inp), g["d"], None,
                      g["M"], g["M_g"], m_qst, g["ratio"], g["regime"])


def rlcu_cost_report(inp: RlcuCostInputs, epsilon: float, gamma: float | None = None) -> CostReport:
    """``gamma`` (the raw per-gate error) feeds the unmitigated error bound; it defaults to ``gamma'``."""
    g = gst_ratio_rlcu(inp, epsilon)
    gamma = inp.gamma_prime if gamma is None else gamma
    eb = rlcu_error_bound(inp.t_tilde, gamma, inp.gamma_c)[0] if gamma > 0 else 0.0
    return CostReport("rlcu", epsilon, eb, None, None, g["r"], g["M"], g["M_g"], None, g["ratio"],
                      g["regime"])


__all__ = [
    "CostReport",
    "MODEL_UNITS",
    "RlcuCostInputs",
    "TrotterCostInputs",
    "TrotterSamples",
    "c_k",
    "chebyshev_halfwidth",
    "critical_error",
    "crossover_depth",
    "depth_condition_rhs",
    "depth_condition_terms",
    "gst_budget",
    "gst_ratio",
    "gst_ratio_rlcu",
    "gst_ratio_trotter",
    "rlcu_cost_report",
    "rlcu_error_bound",
    "rlcu_exponent",
    "rlcu_mse_bound",
    "rlcu_optimal_r",
    "rlcu_samples",
    "rlcu_unmitigated_bias",
    "segment_error_probability",
    "sni_budgets",
    "trotter_cost_report",
    "trotter_error_bound",
    "trotter_m_branches",
    "trotter_optimal_depth_noqem",
    "trotter_optimal_depth_pec",
    "trotter_regime",
    "trotter_rmse_noqem",
    "trotter_samples",
    "trotter_log_samples_at_depth",
    "trotter_samples_at_depth",
]
