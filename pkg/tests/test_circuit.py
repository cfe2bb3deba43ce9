import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eftvqa.circuit import (
    CX,
    AnsatzSpec,
    Circuit,
    CircuitError,
    Gate,
    H,
    Hamiltonian,
    PauliString,
    Rz,
    UnsupportedAnsatzError,
    blocked_cnots_per_layer,
    blocked_partition,
    build_ansatz,
    build_heisenberg,
    build_ising,
    circuit_depth,
    cnot_rz_ratio,
    entangler_clusters,
    gate_counts,
    iter_clusters,
    measure_all,
    quarter_turns,
)

from oracles import dense_hamiltonian, statevector


def test_pauli_string_validation_and_commutation():
    with pytest.raises(CircuitError):
        PauliString("XQ")
    with pytest.raises(CircuitError):
        PauliString("X", sign=2)
    assert PauliString("XX").commutes_with(PauliString("ZZ"))
    assert not PauliString("XI").commutes_with(PauliString("ZI"))
    assert PauliString.from_sparse(4, {1: "Y"}).letters == "IYII"
    assert PauliString("IXZ").support() == [1, 2]


def test_circuit_rejects_out_of_range_qubit():
    with pytest.raises(CircuitError):
        Circuit(2, (CX(0, 2),))


def test_quarter_turns():
    assert quarter_turns(0.0) == 0
    assert quarter_turns(math.pi / 2) == 1
    assert quarter_turns(-math.pi / 2) == 3
    assert quarter_turns(5 * math.pi) == 2
    assert quarter_turns(0.3) is None


@pytest.mark.parametrize("k", range(4))
def test_canonicalize_preserves_state(k):
    circ = Circuit(1, (H(0), Rz(0, k * math.pi / 2), H(0)))
    a = statevector(circ)
    b = statevector(circ.canonicalize())
    # equal up to a global phase
    assert abs(abs(np.vdot(a, b)) - 1) < 1e-12


def test_canonicalize_rejects_non_clifford():
    with pytest.raises(CircuitError):
        Circuit(1, (Rz(0, 0.1),)).canonicalize()


def test_circuit_json_roundtrip():
    circ = build_ansatz(AnsatzSpec("linear", 3).with_quarter_turns([1, 2, 3, 0, 1, 2]))
    assert Circuit.from_json(circ.to_json()) == circ


def test_hamiltonian_json_roundtrip():
    ham = build_heisenberg(3, 0.5)
    back = Hamiltonian.from_json(ham.to_json())
    assert np.allclose(dense_hamiltonian(back), dense_hamiltonian(ham))


def test_ising_terms():
    ham = build_ising(3, 0.7)
    assert len(ham) == 2 + 3
    assert ham.identity_offset_on_zero_state() == pytest.approx(3.0)


def test_heisenberg_keeps_zero_weight_terms():
    ham = build_heisenberg(3, 0.0)
    assert len(ham) == 3 * 2


def test_hamiltonian_size_check():
    with pytest.raises(CircuitError):
        build_ising(1, 1.0)


def test_ansatz_validation():
    with pytest.raises(UnsupportedAnsatzError):
        AnsatzSpec("ring", 4)
    with pytest.raises(CircuitError):
        AnsatzSpec("blocked_all_to_all", 3)
    with pytest.raises(CircuitError):
        AnsatzSpec("linear", 4, 0)
    with pytest.raises(CircuitError):
        AnsatzSpec("linear", 4, params=(0.0,))


@pytest.mark.parametrize("kind", ["linear", "fche", "blocked_all_to_all"])
@pytest.mark.parametrize("n", [4, 5, 8, 13, 20])
@pytest.mark.parametrize("p", [1, 2])
def test_gate_counts_match_census(kind, n, p):
    spec = AnsatzSpec(kind, n, p)
    circ = build_ansatz(spec)
    counts = gate_counts(spec)
    assert circ.count("CX") == counts.cnot_count
    assert circ.count("Rz") == counts.rz_count == spec.num_params
    assert counts.rz_runtime_expected == 2 * counts.rz_count


def test_closed_form_cnot_counts():
    assert gate_counts(AnsatzSpec("linear", 10)).cnot_count == 10
    assert gate_counts(AnsatzSpec("fche", 10)).cnot_count == 45
    # N^2/2 - 5N + 20 for even N
    for n in (8, 10, 20, 40):
        assert blocked_cnots_per_layer(n) == n * n // 2 - 5 * n + 20


def test_blocked_partition_has_eight_links():
    for n in range(4, 30):
        core_a, core_b, links = blocked_partition(n)
        assert len(links) == 8
        assert all(c != t for c, t in links)
        assert not set(core_a) & set(core_b)


def test_linear_ratio_is_quarter():
    assert cnot_rz_ratio(AnsatzSpec("linear", 12)) == 0.25
    assert cnot_rz_ratio(AnsatzSpec("linear", 12), asymptotic=False) == 0.25


def test_blocked_ratio_crosses_076_between_13_and_14():
    r13 = cnot_rz_ratio(AnsatzSpec("blocked_all_to_all", 13))
    r14 = cnot_rz_ratio(AnsatzSpec("blocked_all_to_all", 14))
    assert r13 < 0.76 < r14


def test_fche_clusters_cover_each_pair_once():
    pairs = {(c, t) for c, ts in entangler_clusters("fche", 6) for t in ts}
    assert pairs == {(a, b) for a in range(6) for b in range(a + 1, 6)}


def test_iter_clusters_groups_consecutive_controls():
    circ = Circuit(4, (CX(0, 1), CX(0, 2), H(3), CX(1, 3), CX(1, 2)))
    assert list(iter_clusters(circ)) == [(0, (1, 2)), (1, (3, 2))]


def test_measure_all_appends_measurements():
    circ = measure_all(Circuit(3, (H(0),)))
    assert circ.count("MeasureZ") == 3


def test_circuit_depth():
    circ = Circuit(2, (H(0), Rz(0, 0.1), CX(0, 1)))
    assert circuit_depth(circ) == 3
    assert circuit_depth(circ, rz_weight=2) == 4


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["linear", "fche", "blocked_all_to_all"]), st.integers(4, 12),
       st.integers(1, 3))
def test_ansatz_width_and_params(kind, n, p):
    spec = AnsatzSpec(kind, n, p)
    circ = build_ansatz(spec)
    assert circ.width == n
    assert all(isinstance(g, Gate) for g in circ)
    assert circ.count("H") == 2 * n * p
