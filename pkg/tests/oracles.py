"""Independent reference implementations used only by the tests.

Dense statevector simulation (any angle), brute-force energies, and exhaustive
search over quarter-turn parameters.
"""
import itertools
import math

import numpy as np

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1, -1]).astype(complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_S = np.diag([1, 1j])
PAULI = {"I": _I, "X": _X, "Y": _Y, "Z": _Z}
ONE_Q = {"H": _H, "S": _S, "Sdg": _S.conj(), "X": _X, "Y": _Y, "Z": _Z}


def _apply_1q(psi, n, q, u):
    psi = psi.reshape([2] * n)
    psi = np.moveaxis(np.tensordot(u, psi, axes=([1], [q])), 0, q)
    return psi.reshape(-1)


def _apply_cx(psi, n, c, t):
    psi = psi.reshape([2] * n).copy()
    idx = [slice(None)] * n
    idx[c] = 1
    sub = psi[tuple(idx)]
    t_ax = t if t < c else t - 1
    psi[tuple(idx)] = np.flip(sub, axis=t_ax)
    return psi.reshape(-1)


def statevector(circuit):
    """Final state; qubit 0 is the most significant tensor axis."""
    n = circuit.width
    psi = np.zeros(2 ** n, dtype=complex)
    psi[0] = 1
    for g in circuit.gates:
        if g.op == "CX":
            psi = _apply_cx(psi, n, *g.qubits)
        elif g.op == "Rz":
            u = np.diag([np.exp(-0.5j * g.angle), np.exp(0.5j * g.angle)])
            psi = _apply_1q(psi, n, g.qubits[0], u)
        elif g.op in ONE_Q:
            psi = _apply_1q(psi, n, g.qubits[0], ONE_Q[g.op])
        elif g.op == "MeasureZ":
            continue
        else:
            raise ValueError(g.op)
    return psi


def pauli_matrix(letters):
    m = np.array([[1]], dtype=complex)
    for c in letters:
        m = np.kron(m, PAULI[c])
    return m


def pauli_expectation(psi, pauli):
    n = pauli.width
    v = _pauli_apply(psi, n, pauli.letters)
    return pauli.sign * float(np.real(np.vdot(psi, v)))


def _pauli_apply(psi, n, letters):
    out = psi
    for q, c in enumerate(letters):
        if c != "I":
            out = _apply_1q(out, n, q, PAULI[c])
    return out


def energy(psi, ham):
    return sum(c * pauli_expectation(psi, p) for c, p in ham.terms)


def dense_hamiltonian(ham):
    dim = 2 ** ham.width
    h = np.zeros((dim, dim), dtype=complex)
    for c, p in ham.terms:
        h += c * p.sign * pauli_matrix(p.letters)
    return h


def ground_energy(ham):
    return float(np.linalg.eigvalsh(dense_hamiltonian(ham))[0])


def brute_force_clifford_min(spec, ham):
    """Minimum statevector energy over all 4^k quarter-turn settings."""
    from eftvqa.circuit import build_ansatz

    best = math.inf
    for steps in itertools.product(range(4), repeat=spec.num_params):
        psi = statevector(build_ansatz(spec.with_quarter_turns(steps)))
        best = min(best, energy(psi, ham))
    return best
