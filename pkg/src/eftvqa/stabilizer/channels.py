"""Pauli channels and per-gate noise maps."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..circuit import PauliString


class InvalidChannelError(ValueError):
    pass


@dataclass(frozen=True)
class PauliChannel:
    """Apply ``pauli`` with probability ``prob`` for each outcome, else identity."""

    outcomes: tuple[tuple[float, PauliString], ...] = ()

    def __post_init__(self):
        outs = tuple((float(p), P) for p, P in self.outcomes)
        object.__setattr__(self, "outcomes", outs)
        widths = {P.width for _, P in outs}
        if len(widths) > 1:
            raise InvalidChannelError("outcomes must share one arity")
        probs = [p for p, _ in outs]
        if any(p < 0 or p > 1 or math.isnan(p) for p in probs):
            raise InvalidChannelError("probabilities must lie in [0, 1]")
        if sum(probs) > 1 + 1e-12:
            raise InvalidChannelError(f"probabilities sum to {sum(probs)} > 1")

    @property
    def arity(self) -> int:
        return self.outcomes[0][1].width if self.outcomes else 0

    @property
    def total(self) -> float:
        return float(sum(p for p, _ in self.outcomes))

    def is_identity(self) -> bool:
        return self.total == 0.0


def depolarizing(p: float, arity: int = 1) -> PauliChannel:
    """Each non-identity Pauli on ``arity`` qubits with probability p / (4^a - 1)."""
    paulis = ["".join(t) for t in itertools.product("IXYZ", repeat=arity)][1:]
    return PauliChannel(tuple((p / len(paulis), PauliString(s)) for s in paulis))


def bit_flip(p: float) -> PauliChannel:
    return PauliChannel(((p, PauliString("X")),))


def phase_flip(p: float) -> PauliChannel:
    return PauliChannel(((p, PauliString("Z")),))


def pauli_xyz(px: float, py: float, pz: float) -> PauliChannel:
    return PauliChannel(((px, PauliString("X")), (py, PauliString("Y")), (pz, PauliString("Z"))))


def single_qubit_probs(ch: PauliChannel) -> tuple[float, float, float]:
    if ch.arity not in (0, 1):
        raise InvalidChannelError("not a single-qubit channel")
    p = {"X": 0.0, "Y": 0.0, "Z": 0.0}
    for prob, P in ch.outcomes:
        if P.letters != "I":
            p[P.letters] += prob
    return p["X"], p["Y"], p["Z"]


def channel_power(ch: PauliChannel, k: int) -> PauliChannel:
    """Single-qubit channel applied ``k`` times, composed exactly."""
    px, py, pz = single_qubit_probs(ch)
    pi = 1 - px - py - pz
    # Pauli-transfer eigenvalues of X, Y, Z
    lx, ly, lz = pi + px - py - pz, pi - px + py - pz, pi - px - py + pz
    lx, ly, lz = lx ** k, ly ** k, lz ** k
    qx = (1 + lx - ly - lz) / 4
    qy = (1 - lx + ly - lz) / 4
    qz = (1 - lx - ly + lz) / 4
    return pauli_xyz(max(qx, 0.0), max(qy, 0.0), max(qz, 0.0))


def twirled_relaxation_channel(duration: float, t1: float = 100.0, t2: float = 100.0,
                               ) -> PauliChannel:
    """Pauli twirl of amplitude + phase damping over ``duration``.

    ``t1``/``t2`` share the unit of ``duration``; the defaults (100 in cycle
    units, T2 = T1) are assumptions, not measured values.
    """
    if duration < 0:
        raise InvalidChannelError("duration must be nonnegative")
    if t2 > 2 * t1:
        raise InvalidChannelError("need T2 <= 2 T1")
    gamma = 1 - math.exp(-duration / t1)
    px = py = gamma / 4
    pz = max(0.0, (1 - math.exp(-duration / t2)) / 2 - gamma / 4)
    return pauli_xyz(px, py, pz)


def apply_channel(tab, channel: PauliChannel, qubits, rng: np.random.Generator):
    """Sample one outcome (or identity) and apply it to the tableau."""
    qubits = tuple(qubits)
    if channel.outcomes and channel.arity != len(qubits):
        raise InvalidChannelError(
            f"channel arity {channel.arity} != {len(qubits)} target qubits"
        )
    u = rng.random()
    acc = 0.0
    for prob, P in channel.outcomes:
        acc += prob
        if u < acc:
            for q, c in zip(qubits, P.letters):
                if c != "I":
                    tab.pauli(c, q)
            break
    return tab


GATE_CLASSES = ("H", "S", "Sdg", "X", "Y", "Z", "CX", "Rz", "MeasureZ", "idle")


@dataclass
class NoiseMap:
    """Channel per gate class, applied after each gate of that class.

    ``MeasureZ`` is a single-qubit channel applied before readout of every
    qubit; ``idle`` is a per-cycle single-qubit channel applied ``idle_cycles[q]``
    times to qubit q.
    """

    channels: dict = field(default_factory=dict)
    idle_cycles: dict = field(default_factory=dict)

    def get(self, op: str) -> PauliChannel | None:
        ch = self.channels.get(op)
        if ch is None or ch.is_identity():
            return None
        return ch

    def with_idle(self, idle_cycles: dict) -> "NoiseMap":
        return NoiseMap(dict(self.channels), dict(idle_cycles))

    def scaled(self, factor: float) -> "NoiseMap":
        out = {}
        for k, ch in self.channels.items():
            out[k] = PauliChannel(tuple((min(1.0, p * factor), P) for p, P in ch.outcomes))
        return NoiseMap(out, dict(self.idle_cycles))


def nisq_noise_map(model) -> NoiseMap:
    """Physical-gate noise: CX depolarizing p, 1q gates p/10, Rz virtual, readout 10p."""
    one = depolarizing(model.p_1q)
    ch = {g: one for g in ("H", "S", "Sdg", "X", "Y", "Z")}
    ch["CX"] = depolarizing(model.p_cnot, 2)
    ch["Rz"] = depolarizing(model.p_rz)
    ch["MeasureZ"] = bit_flip(model.p_meas)
    return NoiseMap(ch)


def pqec_noise_map(model, idle_cycles: dict | None = None) -> NoiseMap:
    """Logical noise: Clifford gates at the logical rate, every Rz at the injection rate."""
    rates = model.p_logical
    ch = {g: depolarizing(rates["H"] if g == "H" else rates["S"])
          for g in ("H", "S", "Sdg")}
    ch["CX"] = depolarizing(rates["CX"], 2)
    ch["Rz"] = depolarizing(model.p_rz_inject)
    ch["MeasureZ"] = bit_flip(rates["Measure"])
    ch["idle"] = depolarizing(rates["Memory"])
    return NoiseMap(ch, dict(idle_cycles or {}))
