"""Clifford-restricted VQE: a genetic algorithm over quarter-turn Rz parameters.

Every Rz angle is a multiple of pi/2, so each candidate circuit is Clifford and
its (noisy) energy is evaluated with the stabilizer simulator.  Regimes:

* ``noiseless``: exact stabilizer energy.
* ``nisq``: physical-gate Pauli noise.
* ``pqec``: logical Clifford noise, injection noise on every Rz (charged for
  the expected number of consumption attempts) and memory noise on the idle
  patch-cycles reported by the scheduler.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .circuit import AnsatzSpec, Hamiltonian, build_ansatz
from .noise import CodeParams, NisqNoiseModel, PqecNoiseModel
from .scheduler import EXPECTED_ATTEMPTS, schedule
from .stabilizer import (
    NoiseMap,
    TrajectoryConfig,
    channel_power,
    nisq_noise_map,
    noisy_energy,
    pqec_noise_map,
    term_values,
)

REGIMES = ("noiseless", "nisq", "pqec")
MAX_EXACT_QUBITS = 12


class VqeError(ValueError):
    pass


@dataclass(frozen=True)
class GaConfig:
    """Genetic-algorithm hyperparameters (defaults are choices, not calibrated)."""

    population: int = 64
    generations: int = 200
    mutation_rate: float = 0.05
    elite_fraction: float = 0.1
    seed: int = 0
    restarts: int = 3
    tournament: int = 3
    fitness_shots: int = 256
    final_shots: int = 4096

    def __post_init__(self):
        if self.population < 2:
            raise VqeError("population must be >= 2")
        if not 0 <= self.mutation_rate <= 1:
            raise VqeError("mutation_rate must be in [0, 1]")
        if not 0 <= self.elite_fraction <= 1:
            raise VqeError("elite_fraction must be in [0, 1]")
        if self.generations < 1 or self.restarts < 1:
            raise VqeError("generations and restarts must be >= 1")
        if self.tournament < 1 or self.fitness_shots < 2 or self.final_shots < 2:
            raise VqeError("tournament >= 1 and shot counts >= 2 required")

    @property
    def n_elite(self) -> int:
        return min(self.population, max(1, round(self.elite_fraction * self.population)))


@dataclass
class RunRecord:
    seed: int
    regime: str
    best_params: list
    best_energy: float
    best_stderr: float
    evaluations: int
    trace: list  # best fitness per generation
    mean_trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["generation", "best", "mean"])
        for g, (b, m) in enumerate(zip(self.trace, self.mean_trace)):
            w.writerow([g, repr(float(b)), repr(float(m))])
        return buf.getvalue()


@dataclass(frozen=True)
class GammaReport:
    e0: float
    e_a: float
    e_b: float
    gamma: float

    def to_dict(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------- references


_PAULI = {
    "I": sp.identity(2, format="csr", dtype=complex),
    "X": sp.csr_matrix(np.array([[0, 1], [1, 0]], dtype=complex)),
    "Y": sp.csr_matrix(np.array([[0, -1j], [1j, 0]], dtype=complex)),
    "Z": sp.csr_matrix(np.array([[1, 0], [0, -1]], dtype=complex)),
}


def hamiltonian_matrix(ham: Hamiltonian) -> sp.csr_matrix:
    """Sparse 2^n x 2^n matrix, qubit 0 as the most significant tensor factor."""
    dim = 2 ** ham.width
    out = sp.csr_matrix((dim, dim), dtype=complex)
    for c, p in ham.terms:
        if c == 0:
            continue
        m = _PAULI[p.letters[0]]
        for ch in p.letters[1:]:
            m = sp.kron(m, _PAULI[ch], format="csr")
        out = out + (c * getattr(p, "sign", 1)) * m
    return out


def exact_ground_energy(ham: Hamiltonian) -> float:
    """Lowest eigenvalue (dense for small widths, Lanczos above)."""
    if ham.width > MAX_EXACT_QUBITS:
        raise VqeError(
            f"exact diagonalization limited to {MAX_EXACT_QUBITS} qubits; "
            "use clifford_reference instead"
        )
    m = hamiltonian_matrix(ham)
    if ham.width <= 6:
        return float(np.linalg.eigvalsh(m.toarray())[0])
    val = spla.eigsh(m, k=1, which="SA", return_eigenvectors=False, tol=1e-10)
    return float(val[0])


def _energy_fn(ham: Hamiltonian):
    coeffs = np.array([c for c, _ in ham.terms], dtype=float)
    return lambda circ: float(coeffs @ term_values(circ, ham))


def brute_force_clifford(ham: Hamiltonian, spec: AnsatzSpec) -> tuple[float, tuple]:
    """Exhaustive minimum over all 4^k quarter-turn assignments (small k only)."""
    k = spec.num_params
    if k > 10:
        raise VqeError(f"4^{k} assignments is too many for brute force")
    energy = _energy_fn(ham)
    best = (math.inf, ())
    for steps in itertools.product(range(4), repeat=k):
        e = energy(build_ansatz(spec.with_quarter_turns(steps)))
        if e < best[0] - 1e-12:
            best = (e, steps)
    return best


def clifford_reference(ham: Hamiltonian, spec: AnsatzSpec,
                       ga: GaConfig | None = None) -> float:
    """Best noiseless stabilizer energy reachable by the ansatz (exhaustive when small)."""
    if spec.num_params <= 8:
        return brute_force_clifford(ham, spec)[0]
    return optimize(ham, spec, "noiseless", ga or GaConfig()).best_energy


def gamma(e0: float, e_a: float, e_b: float) -> float:
    """Relative gap reduction of regime A over regime B: (E0 - E_B) / (E0 - E_A)."""
    if e_a == e0:
        raise ZeroDivisionError(
            "gamma undefined: regime A reaches the reference energy (E_A == E0)"
        )
    return (e0 - e_b) / (e0 - e_a)


def gamma_report(e0: float, e_a: float, e_b: float) -> GammaReport:
    return GammaReport(e0, e_a, e_b, gamma(e0, e_a, e_b))


# --------------------------------------------------------------------------- regimes


def regime_noise(regime: str, spec: AnsatzSpec, code: CodeParams | None = None,
                 rus="deterministic", seed: int | None = None) -> NoiseMap | None:
    """Per-gate noise map for a regime (None for noiseless)."""
    code = code or CodeParams()
    if regime == "noiseless":
        return None
    if regime == "nisq":
        return nisq_noise_map(NisqNoiseModel.from_physical(code.p_phys))
    if regime == "pqec":
        model = PqecNoiseModel.from_code(code)
        # idle map depends on circuit structure only, not on the angles
        sch = schedule(build_ansatz(spec), rus=rus, seed=seed)
        nm = pqec_noise_map(model, sch.idle)
        rz = nm.channels["Rz"]
        nm.channels["Rz"] = channel_power(rz, int(EXPECTED_ATTEMPTS))
        return nm
    raise VqeError(f"unknown regime {regime!r}; expected one of {REGIMES}")


class _Evaluator:
    def __init__(self, ham, spec, regime, noise, seed):
        self.ham, self.spec, self.regime = ham, spec, regime
        self.noise, self.seed = noise, seed
        self.count = 0
        self._clean = _energy_fn(ham)
        self._cache: dict = {}

    def circuit(self, genome):
        return build_ansatz(self.spec.with_quarter_turns(genome))

    def __call__(self, genome, shots, stream) -> tuple[float, float]:
        self.count += 1
        if self.noise is None:
            key = tuple(int(g) for g in genome)
            if key not in self._cache:
                self._cache[key] = self._clean(self.circuit(genome))
            return self._cache[key], 0.0
        seed = int(np.random.SeedSequence([self.seed, *stream]).generate_state(1)[0])
        est = noisy_energy(self.circuit(genome), self.ham, self.noise,
                           TrajectoryConfig(shots, seed))
        return est.mean, est.stderr


def _tournament(rng, fitness, size):
    idx = rng.integers(0, fitness.size, size=size)
    return idx[np.argmin(fitness[idx])]


def _run_once(ev: _Evaluator, ga: GaConfig, restart: int):
    k = ev.spec.num_params
    rng = np.random.Generator(np.random.Philox([ga.seed, restart]))
    pop = rng.integers(0, 4, size=(ga.population, k))
    pop[0] = 0  # the all-zero assignment is always a candidate
    fit = np.array([ev(g, ga.fitness_shots, (restart, 0, i))[0] for i, g in enumerate(pop)])
    best_trace, mean_trace = [], []
    best_g, best_f = pop[np.argmin(fit)].copy(), float(fit.min())
    for gen in range(ga.generations):
        order = np.argsort(fit, kind="stable")
        new = [pop[i].copy() for i in order[: ga.n_elite]]
        new_fit = [fit[i] for i in order[: ga.n_elite]]
        children = []
        while len(new) + len(children) < ga.population:
            a = pop[_tournament(rng, fit, ga.tournament)]
            b = pop[_tournament(rng, fit, ga.tournament)]
            cut = int(rng.integers(1, k)) if k > 1 else 0
            child = np.concatenate([a[:cut], b[cut:]])
            mut = rng.random(k) < ga.mutation_rate
            child[mut] = (child[mut] + rng.choice([-1, 1], size=int(mut.sum()))) % 4
            children.append(child)
        for i, c in enumerate(children):
            new.append(c)
            new_fit.append(ev(c, ga.fitness_shots, (restart, gen + 1, i))[0])
        pop, fit = np.array(new), np.array(new_fit)
        i = int(np.argmin(fit))
        if fit[i] < best_f:
            best_f, best_g = float(fit[i]), pop[i].copy()
        best_trace.append(best_f)
        mean_trace.append(float(fit.mean()))
    return best_g, best_f, best_trace, mean_trace


def optimize(ham: Hamiltonian, spec: AnsatzSpec, regime: str = "noiseless",
             ga: GaConfig = GaConfig(), code: CodeParams | None = None) -> RunRecord:
    """Minimize the regime's energy over quarter-turn parameters.

    Each restart runs the GA from its own seeded population; the best champion
    over restarts is re-scored with ``ga.final_shots`` shots (and, for pqec,
    with a sampled rather than mean-attempt schedule for the idle map).
    """
    if ham.width != spec.n:
        raise VqeError(f"Hamiltonian width {ham.width} != ansatz width {spec.n}")
    noise = regime_noise(regime, spec, code)
    ev = _Evaluator(ham, spec, regime, noise, ga.seed)
    runs = [_run_once(ev, ga, r) for r in range(ga.restarts)]
    best = min(runs, key=lambda r: r[1])
    trace = [min(r[2][g] for r in runs) for g in range(ga.generations)]
    mean_trace = [float(np.mean([r[3][g] for r in runs])) for g in range(ga.generations)]
    if regime == "pqec":
        ev.noise = regime_noise(regime, spec, code, rus="sample", seed=ga.seed)
    energy, stderr = ev(best[0], ga.final_shots, (ga.restarts, 0, 0))
    return RunRecord(ga.seed, regime, [int(g) for g in best[0]], float(energy),
                     float(stderr), ev.count, trace, mean_trace)


def compare_regimes(ham: Hamiltonian, spec: AnsatzSpec, ga: GaConfig = GaConfig(),
                    code: CodeParams | None = None, e0: float | None = None) -> dict:
    """pQEC vs NISQ runs and gamma_{pqec/nisq} against the reference energy.

    The reference is the exact ground energy up to 12 qubits and the noiseless
    Clifford optimum above.
    """
    if e0 is None:
        if ham.width <= MAX_EXACT_QUBITS:
            e0 = exact_ground_energy(ham)
        else:
            e0 = clifford_reference(ham, spec, ga)
    a = optimize(ham, spec, "pqec", ga, code)
    b = optimize(ham, spec, "nisq", ga, code)
    rep = gamma_report(e0, a.best_energy, b.best_energy)
    return {"pqec": a, "nisq": b, "gamma": rep}
