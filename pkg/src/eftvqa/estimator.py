"""Analytic fidelity estimates for NISQ, pQEC, distillation and cultivation execution.

Every error source i with per-event probability p_i and count n_i contributes
n_i * -log(1 - p_i) to the log-infidelity; fidelity is exp(-sum).  Sources are
grouped as gate, rz_t (injection, T states, synthesis), measurement and
memory (idle patch-cycles).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import AnsatzSpec, Circuit, build_ansatz, gate_counts
from .layout import LayoutSpec, NoFitError, fits, layout_metrics
from .noise import (
    CodeParams,
    CultivationSpec,
    FactorySpec,
    NisqNoiseModel,
    PqecNoiseModel,
    SynthesisSpec,
    builtin_factories,
    logical_error_rate,
    patch_physical_qubits,
    t_count_per_rz,
)
from .scheduler import EXPECTED_ATTEMPTS, schedule

SOURCES = ("gate", "rz_t", "measurement", "memory")
ONE_Q = ("H", "S", "Sdg", "X", "Y", "Z")


class EstimatorError(ValueError):
    pass


class ConfigurationError(EstimatorError):
    pass


@dataclass(frozen=True)
class NisqStrategy:
    model: NisqNoiseModel
    name: str = "nisq"


@dataclass(frozen=True)
class PqecStrategy:
    model: PqecNoiseModel
    budget: int | None = None
    layout: LayoutSpec | None = None
    name: str = "pqec"


@dataclass(frozen=True)
class ConventionalStrategy:
    """Clifford+T with identical distillation factories filling the spare budget.

    ``allow_overcommit`` places one factory even when none fits the residual
    budget (flagged in the report) instead of raising.
    """

    factory: FactorySpec
    code: CodeParams = field(default_factory=CodeParams)
    budget: int = 10_000
    synthesis: SynthesisSpec = field(default_factory=SynthesisSpec)
    allow_overcommit: bool = False
    name: str = "conventional"


@dataclass(frozen=True)
class CultivationStrategy:
    spec: CultivationSpec
    code: CodeParams = field(default_factory=CodeParams)
    budget: int = 10_000
    synthesis: SynthesisSpec = field(default_factory=SynthesisSpec)
    allow_overcommit: bool = False
    name: str = "cultivation"


@dataclass
class FidelityReport:
    strategy: str
    fidelity: float
    breakdown: dict
    t_circ: float
    qubits_used: int
    stall_cycles: float
    fits: bool = True
    details: dict = field(default_factory=dict)

    @property
    def log_error(self) -> float:
        return float(sum(self.breakdown.values()))

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "fidelity": self.fidelity,
            "log_error": self.log_error,
            "breakdown": dict(self.breakdown),
            "t_circ": self.t_circ,
            "qubits_used": self.qubits_used,
            "stall_cycles": self.stall_cycles,
            "fits": self.fits,
            **self.details,
        }


def _nll(p: float) -> float:
    if p >= 1:
        return math.inf
    return -math.log1p(-p)


def _report(name, contrib, t, qubits, stall, fits_=True, **details):
    br = {s: 0.0 for s in SOURCES}
    for src, p, n in contrib:
        if n and p:
            br[src] += n * _nll(p)
    fid = math.exp(-sum(br.values()))
    return FidelityReport(name, fid, br, t, qubits, stall, fits_, details)


def _census(circuit: Circuit) -> dict:
    return circuit.census()


def estimate(circuit: Circuit, strategy, strict: bool = True) -> FidelityReport:
    """Fidelity estimate of ``circuit`` under one execution strategy.

    With ``strict`` a program that does not fit the device raises; otherwise the
    report is returned with ``fits=False``.
    """
    if isinstance(strategy, NisqStrategy):
        return _estimate_nisq(circuit, strategy)
    if isinstance(strategy, PqecStrategy):
        return _estimate_pqec(circuit, strategy, strict)
    if isinstance(strategy, (ConventionalStrategy, CultivationStrategy)):
        return _estimate_tfactory(circuit, strategy, strict)
    raise EstimatorError(f"unknown strategy {strategy!r}")


def _estimate_nisq(circuit, st: NisqStrategy) -> FidelityReport:
    c = _census(circuit)
    m = st.model
    n_1q = sum(c.get(g, 0) for g in ONE_Q)
    n_meas = c.get("MeasureZ", 0) or circuit.width
    contrib = [
        ("gate", m.p_cnot, c.get("CX", 0)),
        ("gate", m.p_1q, n_1q),
        ("rz_t", m.p_rz, c.get("Rz", 0)),
        ("measurement", m.p_meas, n_meas),
    ]
    return _report(st.name, contrib, 0, circuit.width, 0)


def _estimate_pqec(circuit, st: PqecStrategy, strict) -> FidelityReport:
    code = st.model.code
    layout = st.layout or LayoutSpec("proposed", n=circuit.width, code=code)
    met = layout_metrics(layout)
    ok = st.budget is None or met.physical_qubits <= st.budget
    if not ok and strict:
        raise NoFitError(
            f"{circuit.width} logical qubits need {met.physical_qubits} physical "
            f"qubits (> budget {st.budget})"
        )
    sch = schedule(circuit, layout)
    c = _census(circuit)
    rates = st.model.p_logical
    n_meas = c.get("MeasureZ", 0) or circuit.width
    attempts = EXPECTED_ATTEMPTS * c.get("Rz", 0)
    idle = sum(sch.idle.values())
    contrib = [
        ("gate", rates["CX"], c.get("CX", 0)),
        ("gate", rates["H"], c.get("H", 0)),
        ("gate", rates["S"], sum(c.get(g, 0) for g in ("S", "Sdg"))),
        ("rz_t", st.model.p_rz_inject, attempts),
        ("measurement", rates["Measure"], n_meas),
        ("memory", rates["Memory"], idle),
    ]
    return _report(st.name, contrib, sch.t_circ, met.physical_qubits, 0, ok,
                   layout_k=layout.k, idle_patch_cycles=idle)


def conventional_data_patches(n: int) -> int:
    """Data block for Clifford+T execution: a compact block of 1.5n + 3 tiles."""
    return math.ceil(1.5 * n) + 3


def _estimate_tfactory(circuit, st, strict) -> FidelityReport:
    code = st.code
    if isinstance(st, CultivationStrategy):
        factory = st.spec.as_factory()
    else:
        factory = st.factory
    patch = patch_physical_qubits(code.d)
    live = conventional_data_patches(circuit.width)
    data_qubits = live * patch
    if data_qubits > st.budget and strict:
        raise NoFitError(f"data block ({data_qubits} qubits) exceeds budget {st.budget}")
    residual = st.budget - data_qubits
    count = max(residual, 0) // factory.qubit_footprint
    overcommit = False
    if count == 0:
        if not st.allow_overcommit:
            raise ConfigurationError(
                f"no {factory.name} factory ({factory.qubit_footprint} qubits) fits the "
                f"residual budget of {residual} qubits"
            )
        count, overcommit = 1, True
    c = _census(circuit)
    t_per = t_count_per_rz(st.synthesis)
    n_rz = c.get("Rz", 0)
    n_t = n_rz * t_per
    # demand: Clifford schedule with every Rz replaced by its T sequence (1 cycle per T)
    t_demand = schedule(circuit, LayoutSpec("proposed", n=circuit.width, code=code),
                        rz_cycles=t_per).t_raw if n_rz else \
        schedule(circuit, LayoutSpec("proposed", n=circuit.width, code=code)).t_raw
    t_supply = n_t * factory.cycles_per_t / count
    t_total = max(t_demand, t_supply)
    stall = t_total - t_demand
    rate = logical_error_rate(code)
    n_meas = c.get("MeasureZ", 0) or circuit.width
    contrib = [
        ("gate", rate, c.get("CX", 0) + sum(c.get(g, 0) for g in ONE_Q)),
        ("rz_t", factory.t_error, n_t),
        ("rz_t", st.synthesis.eps, n_rz),
        ("measurement", rate, n_meas),
        ("memory", rate, live * t_total),
    ]
    used = data_qubits + count * factory.qubit_footprint
    return _report(st.name, contrib, t_total, used, stall, used <= st.budget,
                   factory=factory.name, factories=count, overcommitted=overcommit,
                   t_count=n_t, assumed=factory.assumed)


# --------------------------------------------------------------------------- comparisons


def default_strategies(code: CodeParams, budget: int, factories=None) -> list:
    pq = PqecStrategy(PqecNoiseModel.from_code(code), budget)
    out = [pq]
    for f in factories or builtin_factories():
        out.append(ConventionalStrategy(f, code, budget, allow_overcommit=True,
                                        name=f"conventional[{f.name}]"))
    return out


@dataclass
class ComparisonRow:
    circuit: str
    n: int
    reports: list

    def ratio(self, a: str, b: str) -> float:
        fa = next(r for r in self.reports if r.strategy == a).fidelity
        fb = next(r for r in self.reports if r.strategy == b).fidelity
        return fa / fb if fb > 0 else math.inf


def compare_strategies(circuits: dict, strategies: list) -> list[ComparisonRow]:
    """Estimate every circuit under every strategy; nothing raises on no-fit."""
    if len(strategies) < 2:
        raise EstimatorError("need at least two strategies")
    rows = []
    for name, circ in circuits.items():
        reps = [estimate(circ, st, strict=False) for st in strategies]
        rows.append(ComparisonRow(name, circ.width, reps))
    return rows


def comparison_dict(rows: list[ComparisonRow], baseline: str = "pqec") -> list[dict]:
    out = []
    for r in rows:
        base = next(x for x in r.reports if x.strategy == baseline)
        out.append({
            "circuit": r.circuit,
            "n": r.n,
            "reports": [x.to_dict() for x in r.reports],
            "ratios": {x.strategy: r.ratio(baseline, x.strategy)
                       for x in r.reports if x.strategy != baseline},
            "fits": base.fits,
        })
    return out


def benchmark_circuits(n: int, depths=(1, 2, 3)) -> dict:
    kinds = ["linear", "fche"] + (["blocked_all_to_all"] if n >= 4 else [])
    return {f"{k}-p{p}": build_ansatz(AnsatzSpec(k, n, p)) for k in kinds for p in depths}


@dataclass
class WinMatrix:
    programs: list
    devices: list
    values: np.ndarray  # nan where infeasible

    def infeasible(self, i, j) -> bool:
        return bool(np.isnan(self.values[i, j]))

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["device_qubits", "logical_qubits", "win_fraction"])
        for i, n in enumerate(self.programs):
            for j, b in enumerate(self.devices):
                v = self.values[i, j]
                w.writerow([b, n, "NA" if np.isnan(v) else f"{v:.6f}"])
        return buf.getvalue()


def best_conventional(circ: Circuit, code: CodeParams, budget: int, factories=None):
    """Highest-fidelity factory choice that fits (None if none fits)."""
    best = None
    for f in factories or builtin_factories():
        try:
            rep = estimate(circ, ConventionalStrategy(f, code, budget), strict=True)
        except (ConfigurationError, NoFitError):
            continue
        if best is None or rep.fidelity > best.fidelity:
            best = rep
    return best


def win_matrix(programs, devices, depths=(1, 2, 3), code: CodeParams | None = None,
               factories=None) -> WinMatrix:
    """Fraction of benchmark circuits where pQEC beats the best conventional setup.

    A cell is infeasible (nan) when the tiled layout for the program does not
    fit the device.  When no conventional configuration fits but pQEC does,
    pQEC wins by default.
    """
    code = code or CodeParams()
    pq = PqecNoiseModel.from_code(code)
    vals = np.full((len(programs), len(devices)), np.nan)
    for i, n in enumerate(programs):
        circs = benchmark_circuits(n, depths)
        pq_reps = {k: estimate(c, PqecStrategy(pq), strict=False) for k, c in circs.items()}
        for j, budget in enumerate(devices):
            if not fits(n, budget, code):
                continue
            wins = 0
            for k, c in circs.items():
                conv = best_conventional(c, code, budget, factories)
                if conv is None or pq_reps[k].fidelity > conv.fidelity:
                    wins += 1
            vals[i, j] = wins / len(circs)
    return WinMatrix(list(programs), list(devices), vals)


@dataclass
class CrossoverScan:
    kind: str
    ns: list
    depths: list
    nisq: np.ndarray  # log-fidelity, shape (len(ns), len(depths))
    pqec: np.ndarray
    nisq_slope: np.ndarray
    pqec_slope: np.ndarray

    @property
    def crossover(self) -> float | None:
        """Smallest N where pQEC loses fidelity more slowly per layer than NISQ."""
        for n, a, b in zip(self.ns, self.nisq_slope, self.pqec_slope):
            if b > a:  # slopes are negative; larger is slower decay
                return n
        return None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind, "ns": list(self.ns), "depths": list(self.depths),
            "nisq_log_fidelity": self.nisq.tolist(), "pqec_log_fidelity": self.pqec.tolist(),
            "nisq_slope": self.nisq_slope.tolist(), "pqec_slope": self.pqec_slope.tolist(),
            "crossover_n": self.crossover,
        }


def crossover_depth_scan(kind: str = "blocked_all_to_all", ns=range(8, 17),
                         depths=range(1, 11), code: CodeParams | None = None) -> CrossoverScan:
    """Log-fidelity vs depth for NISQ and pQEC; slopes are per added layer."""
    code = code or CodeParams()
    nisq = NisqStrategy(NisqNoiseModel.from_physical(code.p_phys))
    pq = PqecStrategy(PqecNoiseModel.from_code(code))
    ns, depths = list(ns), list(depths)
    a = np.zeros((len(ns), len(depths)))
    b = np.zeros_like(a)
    for i, n in enumerate(ns):
        for j, p in enumerate(depths):
            circ = build_ansatz(AnsatzSpec(kind, n, p))
            a[i, j] = math.log(estimate(circ, nisq).fidelity)
            b[i, j] = math.log(estimate(circ, pq, strict=False).fidelity)
    x = np.array(depths, dtype=float)
    sa = np.polyfit(x, a.T, 1)[0] if len(depths) > 1 else a[:, 0]
    sb = np.polyfit(x, b.T, 1)[0] if len(depths) > 1 else b[:, 0]
    return CrossoverScan(kind, ns, depths, a, b, np.atleast_1d(sa), np.atleast_1d(sb))


def predicted_crossover(kind: str, code: CodeParams | None = None, n_max: int = 64):
    """First N where per-layer NISQ error (CNOT + 1q) exceeds per-layer pQEC Rz error."""
    code = code or CodeParams()
    nisq = NisqNoiseModel.from_physical(code.p_phys)
    pq = PqecNoiseModel.from_code(code)
    for n in range(4 if kind == "blocked_all_to_all" else 2, n_max + 1):
        g = gate_counts(AnsatzSpec(kind, n, 1))
        nisq_layer = g.cnot_count * nisq.p_cnot + 2 * n * nisq.p_1q
        pq_layer = g.rz_runtime_expected * pq.p_rz_inject
        if nisq_layer > pq_layer:
            return n
    return None
