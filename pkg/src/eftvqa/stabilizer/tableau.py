"""Aaronson-Gottesman stabilizer tableau with bit-packed rows."""
from __future__ import annotations

import numpy as np

from ..circuit import Circuit, Gate, PauliString, quarter_turns
from . import _backend

OPCODES = {"H": 0, "S": 1, "Sdg": 2, "X": 3, "Y": 4, "Z": 5, "CX": 6}
# Rz(k pi/2) up to global phase
_QUARTER = {0: (), 1: ("S",), 2: ("Z",), 3: ("Sdg",)}


class UnsupportedGateError(ValueError):
    pass


class Tableau:
    """Stabilizer state on ``n`` qubits, initialised to |0...0>.

    Rows 0..n-1 are destabilizers, n..2n-1 stabilizers, row 2n is scratch.
    """

    def __init__(self, n: int, kernels=None):
        if n < 1:
            raise ValueError("need at least one qubit")
        self.n = n
        self.words = (n + 63) // 64
        self.k = kernels or _backend.kernels
        self.x = np.zeros((2 * n + 1, self.words), dtype=np.uint64)
        self.z = np.zeros((2 * n + 1, self.words), dtype=np.uint64)
        self.r = np.zeros(2 * n + 1, dtype=np.uint8)
        for q in range(n):
            w, m = q >> 6, np.uint64(1) << np.uint64(q & 63)
            self.x[q, w] = m
            self.z[n + q, w] = m

    def copy(self) -> "Tableau":
        t = Tableau.__new__(Tableau)
        t.n, t.words, t.k = self.n, self.words, self.k
        t.x, t.z, t.r = self.x.copy(), self.z.copy(), self.r.copy()
        return t

    # gates -----------------------------------------------------------------
    def h(self, q):
        self.k.apply_h(self.x, self.z, self.r, q)

    def s(self, q):
        self.k.apply_s(self.x, self.z, self.r, q)

    def sdg(self, q):
        self.k.apply_sdg(self.x, self.z, self.r, q)

    def cx(self, c, t):
        self.k.apply_cx(self.x, self.z, self.r, c, t)

    def pauli(self, letter: str, q: int):
        if letter == "X":
            self.k.apply_x(self.x, self.z, self.r, q)
        elif letter == "Y":
            self.k.apply_y(self.x, self.z, self.r, q)
        elif letter == "Z":
            self.k.apply_z(self.x, self.z, self.r, q)

    def apply(self, gate: Gate):
        apply_gate(self, gate)
        return self

    def run(self, ops: np.ndarray):
        """Apply an encoded op array (see ``encode``)."""
        if len(ops):
            self.k.run(self.x, self.z, self.r, ops)
        return self

    # queries ---------------------------------------------------------------
    def measure(self, q: int, rng: np.random.Generator) -> int:
        return measure_z(self, q, rng)

    def expectation(self, obs: PauliString) -> int:
        return expectation(self, obs)

    def stabilizers(self) -> list[PauliString]:
        return [self._row(i) for i in range(self.n, 2 * self.n)]

    def destabilizers(self) -> list[PauliString]:
        return [self._row(i) for i in range(self.n)]

    def _row(self, i) -> PauliString:
        letters = []
        for q in range(self.n):
            w, b = q >> 6, np.uint64(q & 63)
            xb = int((self.x[i, w] >> b) & np.uint64(1))
            zb = int((self.z[i, w] >> b) & np.uint64(1))
            letters.append("IXZY"[xb + 2 * zb])
        return PauliString("".join(letters), -1 if self.r[i] else 1)

    def validate(self) -> None:
        """Check the symplectic invariants; raises AssertionError if broken."""
        n = self.n
        rows = [(self.x[i], self.z[i]) for i in range(2 * n)]

        def anti(a, b):
            return _sympl(rows[a], rows[b])

        for i in range(n):
            for j in range(n):
                assert anti(n + i, n + j) == 0, "stabilizers must commute"
                assert anti(i, j) == 0, "destabilizers must commute"
                assert anti(i, n + j) == (1 if i == j else 0), "pairing broken"


def _sympl(a, b) -> int:
    ax, az = a
    bx, bz = b
    v = np.bitwise_xor(ax & bz, az & bx)
    return int(sum(bin(int(w)).count("1") for w in v)) & 1


def pack_pauli(obs: PauliString, words: int) -> tuple[np.ndarray, np.ndarray]:
    ox = np.zeros(words, dtype=np.uint64)
    oz = np.zeros(words, dtype=np.uint64)
    for q, c in enumerate(obs.letters):
        m = np.uint64(1) << np.uint64(q & 63)
        if c in "XY":
            ox[q >> 6] |= m
        if c in "ZY":
            oz[q >> 6] |= m
    return ox, oz


def clifford_ops(gate: Gate) -> list[tuple[str, tuple[int, ...]]]:
    """Lower one gate to Clifford primitives; quarter-turn Rz are canonicalised."""
    if gate.op == "Rz":
        k = quarter_turns(gate.angle)
        if k is None:
            raise UnsupportedGateError(
                f"Rz({gate.angle}) is not a multiple of pi/2; cannot simulate"
            )
        return [(name, gate.qubits) for name in _QUARTER[k]]
    if gate.op in OPCODES:
        return [(gate.op, gate.qubits)]
    if gate.op == "I":
        return []
    raise UnsupportedGateError(f"gate {gate.op} is not a tableau gate")


def encode(circuit: Circuit) -> np.ndarray:
    """Unitary part of ``circuit`` as an int64 (m, 3) op array."""
    rows = []
    for g in circuit.gates:
        if g.op == "MeasureZ":
            continue
        for name, qs in clifford_ops(g):
            rows.append((OPCODES[name], qs[0], qs[1] if len(qs) > 1 else 0))
    return np.array(rows, dtype=np.int64).reshape(-1, 3)


def apply_gate(tab: Tableau, gate: Gate) -> Tableau:
    for name, qs in clifford_ops(gate):
        code = OPCODES[name]
        if code == 6:
            tab.cx(*qs)
        elif code == 0:
            tab.h(qs[0])
        elif code == 1:
            tab.s(qs[0])
        elif code == 2:
            tab.sdg(qs[0])
        else:
            tab.pauli(name, qs[0])
    return tab


def measure_z(tab: Tableau, q: int, rng: np.random.Generator) -> int:
    if not 0 <= q < tab.n:
        raise IndexError(q)
    rbit = int(rng.integers(2))
    return int(tab.k.measure(tab.x, tab.z, tab.r, tab.n, q, rbit))


def expectation(tab: Tableau, obs: PauliString) -> int:
    if obs.width != tab.n:
        raise ValueError(f"observable width {obs.width} != {tab.n}")
    ox, oz = pack_pauli(obs, tab.words)
    v = int(tab.k.expectation(tab.x, tab.z, tab.r, tab.n, ox, oz))
    return v * obs.sign


def simulate(circuit: Circuit, kernels=None) -> Tableau:
    """Noiseless final state of the unitary part of a Clifford circuit."""
    return Tableau(circuit.width, kernels).run(encode(circuit))
