"""Logical circuits, Pauli observables, spin Hamiltonians and VQE ansatz builders."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

CLIFFORD_1Q = ("H", "S", "Sdg", "X", "Y", "Z")
GATE_OPS = CLIFFORD_1Q + ("CX", "Rz", "MeasureZ")
ANSATZ_KINDS = ("linear", "fche", "blocked_all_to_all")

HALF_PI = math.pi / 2
# Rz(k*pi/2) up to global phase
_QUARTER_TURN_GATE = {0: None, 1: "S", 2: "Z", 3: "Sdg"}


class CircuitError(ValueError):
    """Raised for malformed circuits, observables or ansatz specifications."""


class UnsupportedAnsatzError(CircuitError):
    pass


@dataclass(frozen=True)
class PauliString:
    letters: str
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise CircuitError(f"Pauli sign must be +1 or -1, got {self.sign}")
        bad = set(self.letters) - set("IXYZ")
        if bad:
            raise CircuitError(f"invalid Pauli letters {sorted(bad)}")

    @property
    def width(self) -> int:
        return len(self.letters)

    @classmethod
    def from_sparse(cls, width: int, ops: dict[int, str], sign: int = 1) -> "PauliString":
        letters = ["I"] * width
        for q, p in ops.items():
            letters[q] = p
        return cls("".join(letters), sign)

    def support(self) -> list[int]:
        return [i for i, c in enumerate(self.letters) if c != "I"]

    def weight(self) -> int:
        return len(self.support())

    def commutes_with(self, other: "PauliString") -> bool:
        if other.width != self.width:
            raise CircuitError("width mismatch")
        anti = sum(
            1 for a, b in zip(self.letters, other.letters) if a != "I" and b != "I" and a != b
        )
        return anti % 2 == 0

    def __str__(self) -> str:
        return ("+" if self.sign > 0 else "-") + self.letters


@dataclass(frozen=True)
class Gate:
    """One logical instruction. ``angle`` is only meaningful for ``Rz`` (radians)."""

    op: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.op not in GATE_OPS:
            raise CircuitError(f"unknown gate {self.op!r}")
        arity = 2 if self.op == "CX" else 1
        if len(self.qubits) != arity:
            raise CircuitError(f"{self.op} takes {arity} qubit(s), got {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise CircuitError("negative qubit index")
        if self.op == "CX" and self.qubits[0] == self.qubits[1]:
            raise CircuitError("CX control equals target")
        if self.op == "Rz":
            if self.angle is None or not math.isfinite(self.angle):
                raise CircuitError("Rz needs a finite angle")

    @property
    def is_clifford(self) -> bool:
        return self.op != "Rz" or quarter_turns(self.angle) is not None

    def __repr__(self) -> str:
        args = ",".join(map(str, self.qubits))
        if self.op == "Rz":
            return f"Rz({args};{self.angle:.6g})"
        return f"{self.op}({args})"


def H(q): return Gate("H", (q,))
def S(q): return Gate("S", (q,))
def CX(c, t): return Gate("CX", (c, t))
def Rz(q, theta): return Gate("Rz", (q,), float(theta))


def quarter_turns(angle: float, tol: float = 1e-9) -> int | None:
    """Return ``k`` in 0..3 if ``angle`` is ``k*pi/2`` mod ``2*pi``, else ``None``."""
    x = angle / HALF_PI
    k = round(x)
    if abs(x - k) > tol:
        return None
    return k % 4


@dataclass(frozen=True)
class Circuit:
    width: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        if self.width < 1:
            raise CircuitError("circuit width must be positive")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits) >= self.width:
                raise CircuitError(f"{g!r} out of range for width {self.width}")

    def __iter__(self) -> Iterator[Gate]:
        return iter(self.gates)

    def __len__(self) -> int:
        return len(self.gates)

    def count(self, op: str) -> int:
        return sum(1 for g in self.gates if g.op == op)

    def census(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for g in self.gates:
            out[g.op] = out.get(g.op, 0) + 1
        return out

    def is_clifford(self) -> bool:
        return all(g.is_clifford for g in self.gates)

    def canonicalize(self) -> "Circuit":
        """Replace quarter-turn Rz gates by I/S/Z/Sdg; raise on any other angle."""
        out = []
        for g in self.gates:
            if g.op != "Rz":
                out.append(g)
                continue
            k = quarter_turns(g.angle)
            if k is None:
                raise CircuitError(f"{g!r} is not a Clifford rotation")
            name = _QUARTER_TURN_GATE[k]
            if name is not None:
                out.append(Gate(name, g.qubits))
        return Circuit(self.width, tuple(out))

    def to_dict(self) -> dict:
        gates = []
        for g in self.gates:
            d = {"op": g.op, "qubits": list(g.qubits)}
            if g.angle is not None:
                d["angle"] = g.angle
            gates.append(d)
        return {"width": self.width, "gates": gates}

    @classmethod
    def from_dict(cls, doc: dict) -> "Circuit":
        gates = tuple(
            Gate(d["op"], tuple(d["qubits"]), d.get("angle")) for d in doc["gates"]
        )
        return cls(int(doc["width"]), gates)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Hamiltonian:
    width: int
    terms: tuple[tuple[float, PauliString], ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((float(c), p) for c, p in self.terms))
        for c, p in self.terms:
            if p.width != self.width:
                raise CircuitError("term width differs from Hamiltonian width")
            if not math.isfinite(c):
                raise CircuitError("non-finite coefficient")

    def __iter__(self):
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "terms": [{"coeff": c * p.sign, "pauli": p.letters} for c, p in self.terms],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Hamiltonian":
        terms = [(t["coeff"], PauliString(t["pauli"])) for t in doc["terms"]]
        return cls(int(doc["width"]), tuple(terms))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Hamiltonian":
        return cls.from_dict(json.loads(text))

    def identity_offset_on_zero_state(self) -> float:
        """Energy of |0...0>: sum of coefficients of terms made only of I and Z."""
        return sum(c * p.sign for c, p in self.terms if set(p.letters) <= {"I", "Z"})


def _check_size(n: int):
    if n < 2:
        raise CircuitError(f"need at least 2 qubits, got {n}")


def build_ising(n: int, j: float) -> Hamiltonian:
    """Transverse-field Ising chain: J * sum X_i X_{i+1} + sum Z_i."""
    _check_size(n)
    terms = []
    for i in range(n - 1):
        terms.append((j, PauliString.from_sparse(n, {i: "X", i + 1: "X"})))
    for i in range(n):
        terms.append((1.0, PauliString.from_sparse(n, {i: "Z"})))
    return Hamiltonian(n, tuple(terms))


def build_heisenberg(n: int, j: float) -> Hamiltonian:
    """Field-free XXZ chain with unit ZZ coupling. Zero-weight terms are kept."""
    _check_size(n)
    terms = []
    for i in range(n - 1):
        for letter, c in (("X", j), ("Y", j), ("Z", 1.0)):
            terms.append((c, PauliString.from_sparse(n, {i: letter, i + 1: letter})))
    return Hamiltonian(n, tuple(terms))


@dataclass(frozen=True)
class GateCounts:
    cnot_count: int
    rz_count: int
    rz_runtime_expected: float


# mean number of consumption attempts per logical Rz (fair-coin repeat-until-success)
EXPECTED_ATTEMPTS = 2.0


def blocked_cnots_per_layer(n: int) -> int:
    """Integer form of N^2/2 - 5N + 20; odd N round up (half-integer otherwise)."""
    return (n * n - 10 * n + 40 + 1) // 2


@dataclass(frozen=True)
class AnsatzSpec:
    kind: str
    n: int
    p: int = 1
    params: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ANSATZ_KINDS:
            raise UnsupportedAnsatzError(f"unsupported ansatz {self.kind!r}")
        if self.n < 2 or (self.kind == "blocked_all_to_all" and self.n < 4):
            raise CircuitError(f"{self.kind} needs more qubits (got {self.n})")
        if self.p < 1:
            raise CircuitError("depth p must be >= 1")
        if self.params is not None:
            object.__setattr__(self, "params", tuple(float(t) for t in self.params))
            if len(self.params) != self.num_params:
                raise CircuitError(
                    f"expected {self.num_params} parameters, got {len(self.params)}"
                )

    @property
    def num_params(self) -> int:
        return 2 * self.n * self.p

    def with_params(self, params: Sequence[float]) -> "AnsatzSpec":
        return AnsatzSpec(self.kind, self.n, self.p, tuple(params))

    def with_quarter_turns(self, steps: Sequence[int]) -> "AnsatzSpec":
        return self.with_params([HALF_PI * (int(s) % 4) for s in steps])


def gate_counts(spec: AnsatzSpec) -> GateCounts:
    n, p = spec.n, spec.p
    if spec.kind == "linear":
        cnot = n * p
    elif spec.kind == "fche":
        cnot = n * (n - 1) // 2 * p
    else:
        cnot = blocked_cnots_per_layer(n) * p
    rz = 2 * n * p
    return GateCounts(cnot, rz, rz * EXPECTED_ATTEMPTS)


def cnot_rz_ratio(spec: AnsatzSpec, asymptotic: bool = True) -> float:
    """CNOT growth per runtime-Rz growth (per unit depth).

    With ``asymptotic`` the closed forms are used (blocked: N/8 - 5/4 + 5/N);
    otherwise the integer gate census of one layer.
    """
    n = spec.n
    if asymptotic:
        if spec.kind == "linear":
            return 0.25
        if spec.kind == "fche":
            return (n - 1) / 8
        return n / 8 - 5 / 4 + 5 / n
    one = gate_counts(AnsatzSpec(spec.kind, n, 1))
    return one.cnot_count / one.rz_runtime_expected


def blocked_partition(n: int) -> tuple[list[int], list[int], list[tuple[int, int]]]:
    """Split qubits into two all-to-all cores and the 8 linking CNOTs.

    Each half keeps its last two qubits as linking qubits; the rest form the
    all-to-all core of that block.
    """
    ha = n // 2
    half_a = list(range(ha))
    half_b = list(range(ha, n))
    core_a, (a1, a2) = half_a[:-2], half_a[-2:]
    core_b, (b1, b2) = half_b[:-2], half_b[-2:]
    anchor_a = core_a[-1] if core_a else a1
    anchor_b = core_b[-1] if core_b else b1
    links = [
        (anchor_a, a1), (anchor_b, b1), (a1, b1), (b2, a2),
        (a2, anchor_a), (b1, b2), (a1, a2), (b2, anchor_b),
    ]
    links = [(c, t) for c, t in links if c != t]
    spare = [(a1, b2), (b1, a2), (a2, b1), (b2, a1)]
    while len(links) < 8:
        links.append(spare[len(links) % len(spare)])
    return core_a, core_b, links


def entangler_clusters(kind: str, n: int) -> list[tuple[int, tuple[int, ...]]]:
    """One layer's CNOTs grouped as (control, targets) clusters, in program order."""
    if kind == "linear":
        return [(i, ((i + 1) % n,)) for i in range(n)]
    if kind == "fche":
        # every unordered pair once, control is the lower index
        return [(c, tuple(range(c + 1, n))) for c in range(n - 1)]
    core_a, core_b, links = blocked_partition(n)
    clusters = []
    for core in (core_a, core_b):
        for c in core:
            targets = tuple(t for t in core if t != c)
            if targets:
                clusters.append((c, targets))
    clusters.extend((c, (t,)) for c, t in links)
    return clusters


def build_ansatz(spec: AnsatzSpec) -> Circuit:
    """Layered ansatz: X-rotation sublayer (H Rz H), entangler, Z-rotation sublayer.

    Missing parameters default to zero.
    """
    n = spec.n
    params = spec.params if spec.params is not None else (0.0,) * spec.num_params
    clusters = entangler_clusters(spec.kind, n)
    gates: list[Gate] = []
    it = iter(params)
    for _ in range(spec.p):
        for q in range(n):
            gates += [H(q), Rz(q, next(it)), H(q)]
        for c, targets in clusters:
            gates += [CX(c, t) for t in targets]
        for q in range(n):
            gates.append(Rz(q, next(it)))
    return Circuit(n, tuple(gates))


def iter_clusters(circuit: Circuit) -> Iterable[tuple[int, tuple[int, ...]]]:
    """Group maximal runs of consecutive CX gates sharing a control."""
    run_c, run_t = None, []
    for g in circuit.gates:
        if g.op == "CX" and g.qubits[0] == run_c and g.qubits[1] not in run_t:
            run_t.append(g.qubits[1])
            continue
        if run_c is not None:
            yield run_c, tuple(run_t)
            run_c, run_t = None, []
        if g.op == "CX":
            run_c, run_t = g.qubits[0], [g.qubits[1]]
    if run_c is not None:
        yield run_c, tuple(run_t)


def measure_all(circuit: Circuit) -> Circuit:
    return Circuit(
        circuit.width,
        circuit.gates + tuple(Gate("MeasureZ", (q,)) for q in range(circuit.width)),
    )


def circuit_depth(circuit: Circuit, rz_weight: float = 1.0) -> float:
    """ASAP depth where every gate takes one step and Rz takes ``rz_weight``."""
    front = [0.0] * circuit.width
    for g in circuit.gates:
        w = rz_weight if g.op == "Rz" else 1.0
        t = max(front[q] for q in g.qubits) + w
        for q in g.qubits:
            front[q] = t
    return max(front, default=0.0)
