"""Experiment specs, reports, and the simulate / sweep / cost drivers behind the command line.

An experiment spec is an INI-style file::

    [experiment]
    scenario = pauli2        ; or: hamiltonian = path/to/file.ham
    t = 1.0
    algorithm = trotter      ; trotter | rlcu
    order = 1
    steps = 4

    [noise]
    gamma = 0.01

    [mitigation]
    mode = pec               ; none | pec | sni

Every recognised section and key is listed in :data:`SCHEMA`.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import hashlib
import io
import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import numpy as np
import scipy

from . import __version__
from .channels import NoiseModel, basis_state, exact_evolution, expectation, validate_state
from .cost import (
    RlcuCostInputs,
    TrotterCostInputs,
    rlcu_cost_report,
    trotter_cost_report,
)
from .errors import HamsimError, InfeasibleSegmentationError, SpecError
from .mitigation import (
    build_pec_model,
    ideal_expectation,
    mismatch_bias_bound,
    model_mismatch,
    noisy_expectation,
    pec_estimate,
    sni_estimate,
    sni_overhead,
    sni_plan,
)
from .pauli import Hamiltonian, PauliString
from .rlcu import rlcu_bias_bound, run_rlcu_estimate
from .trotter import noisy_bias_bound, stage_count, trotter_alpha, trotter_circuit

SCENARIOS = ("pauli2", "heis3")
ALGORITHMS = ("trotter", "rlcu")
MITIGATIONS = ("none", "pec", "sni")
FAMILIES = ("depolarizing", "dephasing", "bitflip")
SWEEP_AXES = {
    "trotter": ("d", "N", "gamma", "t", "s", "epsilon"),
    "rlcu": ("r", "gamma", "t", "epsilon"),
}
_AXIS_ALIASES = {"eps": "epsilon", "ε": "epsilon", "γ": "gamma", "n": "N"}


def load_scenario(name: str) -> Hamiltonian:
    """One of the shipped reference Hamiltonians (``pauli2`` or ``heis3``)."""
    if name not in SCENARIOS:
        raise SpecError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}", field="scenario")
    text = resources.files("hamsim").joinpath("data", f"{name}.ham").read_text()
    return Hamiltonian.parse(text)


# --------------------------------------------------------------------------
# spec files
# --------------------------------------------------------------------------


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text: str) -> tuple[float, ...]:
    items = [s for s in re.split(r"[,\s]+", text.strip()) if s]
    if not items:
        raise ValueError("empty list")
    return tuple(float(s) for s in items)


SCHEMA: dict[str, dict[str, Callable[[str], Any]]] = {
    "experiment": {
        "scenario": str,
        "hamiltonian": str,
        "t": float,
        "algorithm": str,
        "order": int,
        "steps": int,
        "repetitions": int,
        "observable": str,
        "initial_state": str,
        "shots": int,
        "seed": int,
        "epsilon": float,
        "measure": _bool,
    },
    "noise": {
        "gamma": float,
        "gamma_c": float,
        "family": str,
        "c_pec": float,
        "ancilla_noise": _bool,
    },
    "mitigation": {"mode": str, "segments": int, "rate_shift": float},
    "sweep": {"axis": str, "values": _floats},
    "validate": {"suites": str, "shots_scale": float},
    "cost": {"alpha_k": float, "terms": int, "beta": float},
}

# spec attribute for each (section, key)
_ATTR = {
    ("noise", "gamma"): "gamma",
    ("noise", "gamma_c"): "gamma_c",
    ("noise", "family"): "family",
    ("noise", "c_pec"): "c_pec",
    ("noise", "ancilla_noise"): "ancilla_noise",
    ("mitigation", "mode"): "mitigation",
    ("mitigation", "segments"): "segments",
    ("mitigation", "rate_shift"): "rate_shift",
    ("sweep", "axis"): "sweep_axis",
    ("sweep", "values"): "sweep_values",
    ("validate", "suites"): "suites",
    ("validate", "shots_scale"): "shots_scale",
    ("cost", "terms"): "n_terms",
}


@dataclass(frozen=True)
class ExperimentSpec:
    """A validated experiment description with defaults filled in."""

    hamiltonian_text: str
    t: float
    algorithm: str
    scenario: str = ""
    hamiltonian_path: str = ""
    order: int = 1
    steps: int = 1
    repetitions: int = 1
    observable: str = ""
    initial_state: str = "zero"
    shots: int = 100_000
    seed: int = 0
    epsilon: float = 0.01
    measure: bool = False
    gamma: float = 0.0
    gamma_c: float = 0.0
    family: str = "depolarizing"
    c_pec: float | None = None
    ancilla_noise: bool = True
    mitigation: str = "none"
    segments: int = 1
    rate_shift: float = 0.0
    sweep_axis: str = ""
    sweep_values: tuple[float, ...] = ()
    suites: str = "all"
    shots_scale: float = 1.0
    alpha_k: float | None = None
    n_terms: int | None = None
    beta: float | None = None

    # -- derived objects ---------------------------------------------------

    def hamiltonian(self) -> Hamiltonian:
        if not self.hamiltonian_text:
            raise SpecError("this command needs a Hamiltonian: set 'scenario' or 'hamiltonian'", field="hamiltonian")
        return Hamiltonian.parse(self.hamiltonian_text)

    def noise_model(self) -> NoiseModel | None:
        if self.gamma == 0.0 and self.gamma_c == 0.0:
            return None
        return NoiseModel(self.gamma, self.gamma_c, self.family, self.c_pec)

    def observable_label(self) -> str:
        n = self.hamiltonian().n_qubits
        return self.observable or "Z" + "I" * (n - 1)

    def observable_matrix(self) -> np.ndarray:
        return np.array(PauliString.from_label(self.observable_label()).to_matrix())

    def initial_rho(self) -> np.ndarray:
        n = self.hamiltonian().n_qubits
        label = self.initial_state
        if label.startswith("file:"):
            arr = np.load(label[5:])
            if arr.ndim == 1:
                arr = np.outer(arr, arr.conj())
            return validate_state(arr)
        return basis_state(n, label)

    def canonical(self) -> str:
        """Stable text form used for the spec-file hash."""
        items = dataclasses.asdict(self)
        return "\n".join(f"{k}={items[k]!r}" for k in sorted(items))

    def spec_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]

    def replace(self, **changes) -> ExperimentSpec:
        return dataclasses.replace(self, **changes)


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    lines: dict[tuple[str, str], int] = {}
    section = ""
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.match(r"\[(.+)\]$", line)
        if m:
            section = m.group(1).strip()
            lines[(section, "")] = no
            continue
        key = re.split(r"[=:]", line, maxsplit=1)[0].strip().lower()
        lines.setdefault((section, key), no)
    return lines


def parse_spec(text: str, base_dir: str | Path | None = None) -> ExperimentSpec:
    """Parse and validate spec text; relative Hamiltonian paths resolve against ``base_dir``."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise SpecError(f"cannot parse spec: {exc.message if hasattr(exc, 'message') else exc}",
                        line=getattr(exc, "lineno", None)) from exc
    where = _key_lines(text)
    values: dict[str, Any] = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise SpecError(f"unknown section [{section}]", line=where.get((section, "")), field=section)
        for key, raw in parser.items(section):
            line = where.get((section, key))
            if key not in SCHEMA[section]:
                raise SpecError(f"unknown field in [{section}]", line=line, field=key)
            try:
                value = SCHEMA[section][key](raw.strip())
            except ValueError as exc:
                raise SpecError(f"bad value {raw.strip()!r}: {exc}", line=line, field=key) from exc
            values[_ATTR.get((section, key), key)] = (value, line, key)
    return _build_spec(values, base_dir)


def _build_spec(values: dict[str, Any], base_dir) -> ExperimentSpec:
    def get(name, default=None):
        return values[name][0] if name in values else default

    def fail(name, message):
        line, key = (values[name][1], values[name][2]) if name in values else (None, name)
        raise SpecError(message, line=line, field=key)

    scenario, ham_path = get("scenario", ""), get("hamiltonian", "")
    if scenario and ham_path:
        fail("hamiltonian", "give either a scenario or a hamiltonian file, not both")
    if scenario:
        if scenario not in SCENARIOS:
            fail("scenario", f"unknown scenario {scenario!r}; choose from {', '.join(SCENARIOS)}")
        ham_text = load_scenario(scenario).to_text()
    elif ham_path:
        path = Path(ham_path)
        if not path.is_absolute() and base_dir is not None:
            path = Path(base_dir) / path
        try:
            ham_text = Hamiltonian.parse(path.read_text()).to_text()
        except OSError as exc:
            fail("hamiltonian", f"cannot read Hamiltonian file: {exc.strerror}")
        except (HamsimError, ValueError) as exc:
            fail("hamiltonian", f"invalid Hamiltonian file: {exc}")
    elif "alpha_k" in values or "beta" in values:
        ham_text = ""
    else:
        raise SpecError("missing Hamiltonian: set 'scenario' or 'hamiltonian'", field="hamiltonian")
    if "t" not in values:
        raise SpecError("missing evolution time", field="t")
    if "algorithm" not in values:
        raise SpecError("missing algorithm", field="algorithm")

    kwargs = {name: v[0] for name, v in values.items() if name not in ("scenario", "hamiltonian")}
    kwargs["sweep_axis"] = _AXIS_ALIASES.get(kwargs.get("sweep_axis", ""), kwargs.get("sweep_axis", ""))
    spec = ExperimentSpec(hamiltonian_text=ham_text, scenario=scenario, hamiltonian_path=str(ham_path), **kwargs)

    if spec.algorithm not in ALGORITHMS:
        fail("algorithm", f"algorithm must be one of {', '.join(ALGORITHMS)}")
    if spec.order < 1 or (spec.order > 1 and spec.order % 2):
        fail("order", f"order must be 1 or even, got {spec.order}")
    for name in ("steps", "repetitions", "shots", "segments"):
        if getattr(spec, name) < 1:
            fail(name, f"{name} must be at least 1")
    if spec.t < 0:
        fail("t", "t must be nonnegative")
    if spec.epsilon <= 0:
        fail("epsilon", "epsilon must be positive")
    if spec.seed < 0:
        fail("seed", "seed must be nonnegative")
    if spec.family not in FAMILIES:
        fail("family", f"noise family must be a stochastic Pauli family: {', '.join(FAMILIES)}")
    for name in ("gamma", "gamma_c"):
        if not 0.0 <= getattr(spec, name) < 0.5:
            fail(name, f"{name} must lie in [0, 0.5)")
    if spec.mitigation not in MITIGATIONS:
        fail("mitigation", f"mitigation mode must be one of {', '.join(MITIGATIONS)}")
    if spec.algorithm == "rlcu" and spec.mitigation == "sni":
        fail("mitigation", "sni is only available for trotter circuits")
    if not spec.shots_scale > 0:
        fail("shots_scale", "shots_scale must be positive")
    if spec.sweep_axis and spec.sweep_axis not in SWEEP_AXES[spec.algorithm]:
        fail("sweep_axis", f"axis {spec.sweep_axis!r} is not available for {spec.algorithm}; "
                           f"choose from {', '.join(SWEEP_AXES[spec.algorithm])}")
    if spec.sweep_axis and not spec.sweep_values:
        fail("sweep_axis", "sweep axis given without values")
    for name in ("alpha_k", "beta"):
        if getattr(spec, name) is not None and getattr(spec, name) <= 0:
            fail(name, f"{name} must be positive")
    if spec.n_terms is not None and spec.n_terms < 1:
        fail("n_terms", "terms must be at least 1")
    if not ham_text:
        if spec.algorithm == "trotter" and (spec.alpha_k is None or spec.n_terms is None):
            fail("alpha_k", "explicit trotter cost inputs need both alpha_k and terms")
        if spec.algorithm == "rlcu" and spec.beta is None:
            fail("beta", "explicit rlcu cost inputs need beta")
        return spec
    h = spec.hamiltonian()
    label = spec.observable_label()
    try:
        obs = PauliString.from_label(label)
    except (HamsimError, ValueError) as exc:
        fail("observable", f"invalid observable: {exc}")
    if obs.n_qubits != h.n_qubits:
        fail("observable", f"observable acts on {obs.n_qubits} qubits, Hamiltonian on {h.n_qubits}")
    try:
        spec.initial_rho()
    except (HamsimError, ValueError, OSError) as exc:
        fail("initial_state", f"invalid initial state: {exc}")
    return spec


def load_spec(path: str | Path) -> ExperimentSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpecError(f"cannot read spec file {str(path)!r}: {exc.strerror}") from exc
    return parse_spec(text, base_dir=path.parent)


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------

_RELATIONS = {
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
    "==": lambda a, b: a == b,
}


@dataclass(frozen=True)
class Check:
    """One recorded comparison ``value <relation> bound``; ``required=False`` marks report-only checks."""

    name: str
    value: float
    relation: str
    bound: float
    passed: bool
    required: bool = True
    note: str = ""

    @property
    def margin(self) -> float:
        if self.relation in ("<=", "<"):
            return self.bound - self.value
        if self.relation in (">=", ">"):
            return self.value - self.bound
        return -abs(self.value - self.bound)


def check(name: str, value: float, relation: str, bound: float, required: bool = True, note: str = "") -> Check:
    value, bound = float(value), float(bound)
    return Check(name, value, relation, bound, bool(_RELATIONS[relation](value, bound)), required, note)


@dataclass
class Report:
    name: str
    records: list[dict] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.required)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.required and not c.passed]

    def merge(self, other: Report) -> None:
        self.records.extend(other.records)
        self.checks.extend(other.checks)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "provenance": self.provenance,
            "checks": [dict(dataclasses.asdict(c), margin=c.margin) for c in self.checks],
            "records": self.records,
        }

    def to_json(self) -> str:
        return json.dumps(_plain(self.to_dict()), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> Report:
        data = json.loads(text)
        checks = [Check(**{k: v for k, v in c.items() if k != "margin"}) for c in data["checks"]]
        return cls(data["name"], data["records"], checks, data["provenance"])


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _cell(v) -> str:
    v = _plain(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _columns(rows: list[dict]) -> list[str]:
    cols: list[str] = []
    for row in rows:
        for k in row:
            if k not in cols:
                cols.append(k)
    return cols


def _check_rows(report: Report) -> list[dict]:
    return [dict(dataclasses.asdict(c), margin=c.margin) for c in report.checks]


def render(report: Report, fmt: str) -> str:
    """The report as ``csv``, ``json`` or ``plotdata`` text (records, or checks when there are none)."""
    if fmt == "json":
        return report.to_json()
    rows = report.records or _check_rows(report)
    if not rows:
        raise ValueError("report is empty")
    cols = _columns(rows)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_cell(row.get(c)) for c in cols])
        return buf.getvalue()
    if fmt == "plotdata":
        out = ["# " + " ".join(cols)]
        for row in rows:
            cells = []
            for c in cols:
                s = _cell(row.get(c)) or "nan"
                cells.append(re.sub(r"\s+", "_", s))
            out.append(" ".join(cells))
        return "\n".join(out) + "\n"
    raise ValueError(f"unknown format {fmt!r}; choose csv, json or plotdata")


_SUFFIX = {"csv": ".csv", "json": ".json", "plotdata": ".dat"}


def emit(report: Report, fmt: str, out_dir: str | Path, stem: str | None = None) -> Path:
    """Write ``report`` to ``out_dir/<stem><suffix>``; the text is byte-stable for fixed inputs."""
    text = render(report, fmt)
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{stem or report.name}{_SUFFIX[fmt]}"
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {str(out)!r}: {exc.strerror}") from exc
    return path


def provenance(spec: ExperimentSpec | None, seed: int) -> dict:
    return {
        "tool": "hamsim",
        "version": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "seed": seed,
        "spec_hash": spec.spec_hash() if spec is not None else "",
    }


# --------------------------------------------------------------------------
# drivers
# --------------------------------------------------------------------------


def _exact_value(h: Hamiltonian, t: float, o: np.ndarray, rho: np.ndarray) -> float:
    u = exact_evolution(h, t)
    return float(expectation(o, u @ rho @ u.conj().T))


def simulate(spec: ExperimentSpec, workers: int = 1) -> Report:
    """Run the spec's algorithm once and record estimates, bounds and pass/fail checks."""
    report = Report("simulate", provenance=provenance(spec, spec.seed))
    if spec.algorithm == "trotter":
        _simulate_trotter(spec, workers, report)
    else:
        _simulate_rlcu(spec, workers, report)
    return report


def _simulate_trotter(spec: ExperimentSpec, workers: int, report: Report, tag: str = "") -> None:
    h, o, rho = spec.hamiltonian(), spec.observable_matrix(), spec.initial_rho()
    k, N = spec.order, spec.steps
    noise = spec.noise_model()
    circuit = trotter_circuit(h, spec.t, N, k, noise)
    d = stage_count(k) * N
    exact = _exact_value(h, spec.t, o, rho)
    ideal = ideal_expectation(circuit, o, rho)
    noisy = noisy_expectation(circuit, o, rho)
    alpha = trotter_alpha(h, spec.t, k)
    bound_alg = alpha / d**k
    bound_total = noisy_bias_bound(alpha, k, h.L, d, spec.gamma)
    bias = abs(exact - noisy)
    rec = {"k": k, "N": N, "d": d, "gamma": spec.gamma, "bias": bias, "bound_alg": bound_alg,
           "bound_total": bound_total, "exact": exact, "trotter_ideal": ideal, "noisy": noisy,
           "mitigation": spec.mitigation}
    report.checks.append(check(f"noisy bias within algorithmic plus noise bound{tag}", bias, "<=", bound_total))
    if spec.mitigation != "none":
        if spec.mitigation == "pec":
            model = build_pec_model(circuit, spec.rate_shift)
            est = pec_estimate(circuit, model, o, rho, spec.shots, spec.seed, workers)
            bias_bound = mismatch_bias_bound(model_mismatch(circuit, model), factor=1.0)
        else:
            plan = sni_plan(circuit, spec.segments)
            est = sni_estimate(plan, circuit, o, rho, spec.shots, spec.seed, workers)
            bias_bound = 0.0
            rec["segments"] = plan.segments
            rec["q_st_max"] = max(plan.q_st)
        window = 4.0 * est.stderr + bias_bound
        rec.update({"mean": est.mean, "stderr": est.stderr, "Gamma": est.gamma, "shots": est.shots,
                    "halfwidth": est.halfwidth, "bias_bound": bias_bound})
        report.checks.append(check(f"{spec.mitigation} estimate recovers noiseless circuit value{tag}",
                                   abs(est.mean - ideal), "<=", window))
    report.records.append(rec)


def _simulate_rlcu(spec: ExperimentSpec, workers: int, report: Report, tag: str = "") -> None:
    h, o, rho = spec.hamiltonian(), spec.observable_matrix(), spec.initial_rho()
    r = spec.repetitions
    noise = spec.noise_model()
    pec = spec.mitigation == "pec" and noise is not None
    est = run_rlcu_estimate(h, spec.t, r, o, rho, noise, spec.shots, spec.seed, spec.measure,
                            spec.ancilla_noise, workers, pec=pec)
    exact = _exact_value(h, spec.t, o, rho)
    bias_bound = 0.0
    if noise is not None and not pec:
        bias_bound = rlcu_bias_bound(est.gamma_rlcu, spec.gamma, spec.gamma_c, h.beta * spec.t, r)
    report.records.append({"r": r, "lambda": est.lam, "gamma": spec.gamma, "mean": est.mean,
                           "stderr": est.stderr, "gamma_rlcu": est.gamma_rlcu, "bias_bound": bias_bound,
                           "exact": exact, "mitigation": spec.mitigation})
    report.checks.append(check(f"rlcu estimate within statistical window plus bias bound{tag}",
                               abs(est.mean - exact), "<=", 4.0 * est.stderr + bias_bound))


def cost(spec: ExperimentSpec) -> Report:
    """Cost report at the spec's ``epsilon`` (one row, or one per value when sweeping epsilon or t)."""
    report = Report("cost", provenance=provenance(spec, spec.seed))
    if spec.sweep_axis in ("epsilon", "t"):
        for v in spec.sweep_values:
            point = spec.replace(epsilon=v) if spec.sweep_axis == "epsilon" else spec.replace(t=v)
            report.records.append(_cost_row(point, scale_from=spec.t))
    else:
        report.records.append(_cost_row(spec, scale_from=spec.t))
    return report


def cost_sweep(spec: ExperimentSpec) -> Report:
    """Cost rows over the configured epsilon or t values, else over a log grid of epsilon.

    The default grid spans two decades either side of the critical error for
    Trotter and of the spec's ``epsilon`` for RLCU.
    """
    if spec.sweep_axis in ("epsilon", "t"):
        report = cost(spec)
    else:
        report = Report("cost", provenance=provenance(spec, spec.seed))
        center = _cost_row(spec, scale_from=spec.t).get("epsilon_c") or spec.epsilon
        for e in center * np.logspace(-2, 2, 9):
            report.records.append(_cost_row(spec.replace(epsilon=float(e)), scale_from=spec.t))
    report.name = "cost_sweep"
    return report


def _trotter_alpha_for(spec: ExperimentSpec, scale_from: float) -> tuple[float, int]:
    """``alpha_k`` and ``L``; an explicit ``alpha_k`` is taken at ``scale_from`` and scaled as ``t^(k+1)``."""
    if spec.alpha_k is not None:
        n_terms = spec.n_terms if spec.n_terms is not None else spec.hamiltonian().L
        ratio = spec.t / scale_from if scale_from > 0 else 1.0
        return spec.alpha_k * ratio ** (spec.order + 1), n_terms
    h = spec.hamiltonian()
    return trotter_alpha(h, spec.t, spec.order), (spec.n_terms or h.L)


def _cost_row(spec: ExperimentSpec, scale_from: float) -> dict:
    noise = spec.noise_model() or NoiseModel(0.0)
    if spec.algorithm == "trotter":
        if noise.gamma_prime <= 0:
            raise SpecError("the trotter cost model needs gamma > 0", field="gamma")
        alpha, n_terms = _trotter_alpha_for(spec, scale_from)
        inp = TrotterCostInputs(alpha, spec.order, n_terms, noise.gamma, noise.gamma_prime)
        segments = spec.segments if spec.mitigation == "sni" else None
        try:
            row = trotter_cost_report(inp, spec.epsilon, segments).to_dict()
        except InfeasibleSegmentationError as exc:
            raise SpecError(f"{exc}; use at least {exc.minimal_segments} segments", field="segments") from exc
        row["alpha_k"] = alpha
    else:
        beta = spec.beta if spec.beta is not None else spec.hamiltonian().beta
        inp = RlcuCostInputs(beta, spec.t, noise.gamma_prime, noise.gamma_c)
        row = rlcu_cost_report(inp, spec.epsilon, noise.gamma).to_dict()
    row["t"] = spec.t
    row["gamma"] = noise.gamma
    row["gamma_prime"] = noise.gamma_prime
    return row


def sweep(spec: ExperimentSpec, workers: int = 1) -> Report:
    """One record per value of the spec's sweep axis."""
    if not spec.sweep_axis:
        raise SpecError("no sweep axis configured", field="axis")
    axis = spec.sweep_axis
    if axis not in SWEEP_AXES[spec.algorithm]:
        raise SpecError(f"axis {axis!r} is not available for {spec.algorithm}", field="axis")
    if axis == "epsilon":
        report = cost(spec)
        report.name = "sweep"
        return report
    spec.hamiltonian()
    report = Report("sweep", provenance=provenance(spec, spec.seed))
    for v in spec.sweep_values:
        tag = f" [{axis}={v:g}]"
        if axis == "s":
            _sweep_segments(spec, int(v), report, tag)
            continue
        point = _point_spec(spec, axis, v)
        if spec.algorithm == "trotter":
            _simulate_trotter(point, workers, report, tag)
        else:
            _simulate_rlcu(point, workers, report, tag)
    return report


def _point_spec(spec: ExperimentSpec, axis: str, v: float) -> ExperimentSpec:
    if axis == "N":
        return spec.replace(steps=int(v))
    if axis == "d":
        ups = stage_count(spec.order)
        if int(v) % ups:
            raise SpecError(f"depth {v:g} is not a multiple of the {ups} stages per step", field="values")
        return spec.replace(steps=int(v) // ups)
    if axis == "r":
        return spec.replace(repetitions=int(v))
    if axis == "gamma":
        return spec.replace(gamma=float(v))
    if axis == "t":
        return spec.replace(t=float(v))
    raise SpecError(f"unsupported axis {axis!r}", field="axis")


def _sweep_segments(spec: ExperimentSpec, s: int, report: Report, tag: str) -> None:
    h = spec.hamiltonian()
    d = stage_count(spec.order) * spec.steps
    q = 1.0 - (1.0 - spec.gamma) ** h.L
    rec: dict[str, Any] = {"s": s, "q": q, "d": d}
    try:
        exact, lower, upper = sni_overhead(q, d, s)
    except InfeasibleSegmentationError as exc:
        rec.update({"feasible": False, "minimal_segments": exc.minimal_segments})
        report.records.append(rec)
        return
    rec.update({"feasible": True, "overhead": exact, "lower": lower, "upper": upper})
    circuit = trotter_circuit(h, spec.t, spec.steps, spec.order, spec.noise_model())
    try:
        plan = sni_plan(circuit, s)
        rec.update({"plan_q_st_max": max(plan.q_st), "plan_gamma_sq": plan.gamma**2})
    except (InfeasibleSegmentationError, ValueError):
        rec["plan_q_st_max"] = math.nan
    report.records.append(rec)
    report.checks.append(check(f"sni overhead above exponential lower bound{tag}", exact, ">", lower))
    report.checks.append(check(f"sni overhead below exponential upper bound{tag}", exact, "<", upper))


def validate(
    spec: ExperimentSpec | None = None, workers: int = 1, seed: int | None = None, suites: str | None = None
) -> Report:
    """Run the requested validation suites (``suites`` overrides the spec file) and merge them into one report."""
    from .suites import SuiteContext, resolve_suites, run_suite

    if suites is None:
        suites = spec.suites if spec is not None else "all"
    names = resolve_suites(suites)
    seed = seed if seed is not None else (spec.seed if spec is not None else 0)
    ctx = SuiteContext(seed=seed, workers=workers, shots_scale=spec.shots_scale if spec is not None else 1.0)
    report = Report("validate", provenance=provenance(spec, seed))
    report.provenance["suites"] = list(names)
    for name in names:
        report.merge(run_suite(name, ctx))
    return report
