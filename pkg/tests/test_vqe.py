import math

import pytest

from eftvqa.circuit import AnsatzSpec, build_heisenberg, build_ising
from eftvqa.vqe import (
    GaConfig,
    VqeError,
    brute_force_clifford,
    clifford_reference,
    exact_ground_energy,
    gamma,
    gamma_report,
    optimize,
    regime_noise,
)

from oracles import brute_force_clifford_min, ground_energy

SMALL_GA = GaConfig(population=32, generations=60, restarts=3, seed=5)


def test_exact_ground_examples():
    assert exact_ground_energy(build_ising(2, 1.0)) == pytest.approx(-math.sqrt(5))
    assert exact_ground_energy(build_heisenberg(2, 1.0)) == pytest.approx(-3.0)
    assert exact_ground_energy(build_ising(2, 0.0)) == pytest.approx(-2.0)


@pytest.mark.parametrize("n", [3, 5, 8])
def test_exact_ground_matches_dense_oracle(n):
    for ham in (build_ising(n, 0.7), build_heisenberg(n, 0.4)):
        assert exact_ground_energy(ham) == pytest.approx(ground_energy(ham), abs=1e-8)


def test_exact_ground_size_limit():
    with pytest.raises(VqeError):
        exact_ground_energy(build_ising(13, 1.0))


def test_clifford_reference_examples():
    spec = AnsatzSpec("fche", 2)
    assert clifford_reference(build_ising(2, 1.0), spec) == pytest.approx(-2.0)
    assert clifford_reference(build_heisenberg(2, 1.0), spec) == pytest.approx(-3.0)


@pytest.mark.parametrize("kind", ["linear", "fche"])
@pytest.mark.parametrize("build", [build_ising, build_heisenberg])
def test_brute_force_matches_statevector_oracle(kind, build):
    spec = AnsatzSpec(kind, 2)
    ham = build(2, 0.6)
    assert brute_force_clifford(ham, spec)[0] == pytest.approx(
        brute_force_clifford_min(spec, ham), abs=1e-9)


@pytest.mark.parametrize("kind", ["linear", "fche"])
@pytest.mark.parametrize("build,j", [(build_ising, 1.0), (build_heisenberg, 1.0),
                                     (build_ising, 0.5), (build_heisenberg, 0.3)])
@pytest.mark.parametrize("n", [2, 3])
def test_ga_reaches_clifford_optimum(kind, build, j, n):
    spec = AnsatzSpec(kind, n)
    ham = build(n, j)
    best = brute_force_clifford(ham, spec)[0]
    rec = optimize(ham, spec, "noiseless", SMALL_GA)
    assert rec.best_energy == pytest.approx(best, abs=1e-9)
    assert best >= exact_ground_energy(ham) - 1e-9


def test_trace_non_increasing_and_deterministic():
    spec = AnsatzSpec("linear", 3)
    ham = build_ising(3, 1.0)
    ga = GaConfig(population=12, generations=15, restarts=2, seed=3, final_shots=512)
    a = optimize(ham, spec, "nisq", ga)
    b = optimize(ham, spec, "nisq", ga)
    assert a.to_json() == b.to_json()
    assert all(x >= y for x, y in zip(a.trace, a.trace[1:]))
    assert len(a.trace) == ga.generations
    assert a.trace_csv().splitlines()[0] == "generation,best,mean"


def test_noisy_regime_not_below_noiseless_optimum():
    spec = AnsatzSpec("fche", 3)
    ham = build_heisenberg(3, 1.0)
    ideal = brute_force_clifford(ham, spec)[0]
    for regime in ("nisq", "pqec"):
        rec = optimize(ham, spec, regime, GaConfig(population=16, generations=20, restarts=1))
        assert rec.best_energy >= ideal - 4 * rec.best_stderr - 1e-9


def test_pqec_noise_map_uses_schedule_idle_cycles():
    spec = AnsatzSpec("linear", 4)
    nm = regime_noise("pqec", spec)
    assert set(nm.idle_cycles) == {f"q{i}" for i in range(4)}
    assert nm.get("Rz").total > 23e-3 / 30
    assert regime_noise("noiseless", spec) is None
    with pytest.raises(VqeError):
        regime_noise("perfect", spec)


def test_width_mismatch():
    with pytest.raises(VqeError):
        optimize(build_ising(3, 1.0), AnsatzSpec("linear", 4))


def test_ga_config_validation():
    with pytest.raises(VqeError):
        GaConfig(population=1)
    with pytest.raises(VqeError):
        GaConfig(mutation_rate=1.5)
    with pytest.raises(VqeError):
        GaConfig(elite_fraction=-0.1)
    assert GaConfig().n_elite == 6


def test_gamma_formula():
    assert gamma(-2, -1.5, -1) == pytest.approx(2.0)
    assert gamma(-2, -1.2, -1.2) == 1.0
    assert gamma(-2.2361, -2.0, -1.0) == pytest.approx(1.2361 / 0.2361)
    with pytest.raises(ZeroDivisionError, match="E_A == E0"):
        gamma(-2, -2, -1)
    assert gamma_report(-2, -1.5, -1).to_dict()["gamma"] == pytest.approx(2.0)
