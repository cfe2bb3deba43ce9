"""Error-rate tables and resource parameters for the execution strategies.

Four strategies are modelled: NISQ (bare physical gates), pQEC (Clifford gates
on surface-code patches, Rz by direct injection), conventional Clifford+T with
15-to-1 distillation factories, and magic-state cultivation.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict, field
from typing import Any

# surface-code scaling folklore: A * (p / p_th) ** ceil((d + 1) / 2)
P_THRESHOLD = 0.01
SCALE_A = 0.1
# anchor: d=11, p=1e-3 -> 1e-7 per logical op (the scaling constants already give it)
ANCHOR = (11, 1e-3, 1e-7)

LOGICAL_OPS = ("Memory", "CX", "H", "S", "Measure")


class NoiseModelError(ValueError):
    pass


class AboveThresholdError(NoiseModelError):
    pass


@dataclass(frozen=True)
class CodeParams:
    """Surface-code distance and physical error rate.

    ``d`` is the data distance; ``d_x``/``d_z``/``d_m`` default to ``d`` and only
    matter for factory descriptions.
    """

    d: int = 11
    p_phys: float = 1e-3
    d_x: int | None = None
    d_z: int | None = None
    d_m: int | None = None

    def __post_init__(self):
        if self.d < 3 or self.d % 2 == 0:
            raise NoiseModelError(f"code distance must be odd and >= 3 (got {self.d})")
        if not 0 < self.p_phys:
            raise NoiseModelError("p_phys must be positive")
        if self.p_phys >= P_THRESHOLD:
            raise AboveThresholdError(
                f"p_phys={self.p_phys} is not below threshold {P_THRESHOLD}"
            )
        for name in ("d_x", "d_z", "d_m"):
            if getattr(self, name) is None:
                object.__setattr__(self, name, self.d)


def _raw_rate(d: int, p: float) -> float:
    return SCALE_A * (p / P_THRESHOLD) ** math.ceil((d + 1) / 2)


CALIBRATION = ANCHOR[2] / _raw_rate(ANCHOR[0], ANCHOR[1])


def logical_error_rate(code: CodeParams) -> float:
    """Per-operation logical error rate of a distance-``d`` patch.

    Shared by memory, CX, H, S and measurement (no per-op differentiation).
    """
    if code.p_phys >= P_THRESHOLD:
        raise AboveThresholdError(f"p_phys={code.p_phys} at or above threshold")
    return CALIBRATION * _raw_rate(code.d, code.p_phys)


def injection_error(p_phys: float) -> float:
    """Logical error of a post-selected injected rotation state: 23 p / 30."""
    if not 0 <= p_phys < 1:
        raise NoiseModelError("p_phys must lie in [0, 1)")
    return 23.0 * p_phys / 30.0


def patch_physical_qubits(d: int) -> int:
    """d^2 data plus d^2 - 1 measure qubits."""
    if d < 3:
        raise NoiseModelError("d must be >= 3")
    return 2 * d * d - 1


@dataclass(frozen=True)
class NisqNoiseModel:
    p_cnot: float
    p_1q: float
    p_rz: float
    p_meas: float

    @classmethod
    def from_physical(cls, p_phys: float) -> "NisqNoiseModel":
        # Rz is virtual (frame change) on most hardware, hence error-free
        return cls(p_phys, p_phys / 10, 0.0, min(1.0, 10 * p_phys))

    def to_dict(self) -> dict:
        return {"kind": "nisq", **asdict(self)}


@dataclass(frozen=True)
class PqecNoiseModel:
    p_logical: dict
    p_rz_inject: float
    code: CodeParams = field(default_factory=CodeParams)

    @classmethod
    def from_code(cls, code: CodeParams) -> "PqecNoiseModel":
        rate = logical_error_rate(code)
        return cls({op: rate for op in LOGICAL_OPS}, injection_error(code.p_phys), code)

    def to_dict(self) -> dict:
        return {
            "kind": "pqec",
            "p_logical": dict(self.p_logical),
            "p_rz_inject": self.p_rz_inject,
            "code": asdict(self.code),
        }


@dataclass(frozen=True)
class FactorySpec:
    name: str
    d_x: int
    d_z: int
    d_m: int
    qubit_footprint: int
    cycles_per_t: float
    t_error: float
    assumed: bool = False

    def __post_init__(self):
        if self.qubit_footprint <= 0 or self.cycles_per_t <= 0:
            raise NoiseModelError("factory footprint and cycles must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "FactorySpec":
        return cls(**d)


def _geo(a: float, b: float) -> float:
    return math.sqrt(a * b)


_SMALL = FactorySpec("15-to-1_7_3_3", 7, 3, 3, 810, 22, 5.4e-4)
_LARGE = FactorySpec("15-to-1_17_7_7", 17, 7, 7, 4600, 42, 4.5e-8)
# intermediate configuration: geometric midpoint of the two published ones
_MID = FactorySpec(
    "15-to-1_11_5_5", 11, 5, 5,
    int(round(_geo(_SMALL.qubit_footprint, _LARGE.qubit_footprint))),
    round(_geo(_SMALL.cycles_per_t, _LARGE.cycles_per_t), 1),
    float(f"{_geo(_SMALL.t_error, _LARGE.t_error):.3g}"),
    assumed=True,
)


def builtin_factories() -> tuple[FactorySpec, ...]:
    return (_SMALL, _MID, _LARGE)


def factory_by_name(name: str) -> FactorySpec:
    for f in builtin_factories():
        if name in (f.name, f.name.replace("15-to-1_", "")):
            return f
    raise NoiseModelError(f"unknown factory {name!r}")


@dataclass(frozen=True)
class SynthesisSpec:
    """Clifford+T synthesis cost model for arbitrary-angle Rz.

    ``t_per_rz = ceil(c1 * log2(1/eps) + c0)``.  ``gate_factor`` and
    ``depth_factor`` convert T count into synthesized gate count and depth per
    rotation (T gates plus interleaved Cliffords).
    """

    eps: float = 1e-6
    c1: float = 3.0
    c0: float = 0.0
    gate_factor: float = 1.0
    depth_factor: float = 1.0

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise NoiseModelError("synthesis precision must be in (0, 1)")


def t_count_per_rz(spec: SynthesisSpec) -> int:
    return max(1, math.ceil(spec.c1 * math.log2(1 / spec.eps) + spec.c0 - 1e-9))


def synthesis_growth(circuit, spec: SynthesisSpec) -> tuple[float, float]:
    """(gate-count ratio, depth ratio) after replacing every Rz by its sequence."""
    from .circuit import circuit_depth

    t = t_count_per_rz(spec)
    n_rz = circuit.count("Rz")
    n_gates = len(circuit.gates)
    grown = n_gates - n_rz + n_rz * spec.gate_factor * t
    depth0 = circuit_depth(circuit)
    depth1 = circuit_depth(circuit, rz_weight=spec.depth_factor * t)
    return grown / n_gates, depth1 / depth0


def calibrate_synthesis(
    eps: float = 1e-6, n: int = 20, gate_ratio: float = 20.0, depth_ratio: float = 7.0
) -> SynthesisSpec:
    """Fit gate/depth factors so one FCHE layer on ``n`` qubits grows as given."""
    from .circuit import AnsatzSpec, build_ansatz, circuit_depth

    circ = build_ansatz(AnsatzSpec("fche", n, 1))
    base = SynthesisSpec(eps=eps)
    t = t_count_per_rz(base)
    n_rz = circ.count("Rz")
    n_gates = len(circ.gates)
    gate_factor = (gate_ratio * n_gates - (n_gates - n_rz)) / (n_rz * t)
    # depth is piecewise linear in the Rz weight; bisect
    target = depth_ratio * circuit_depth(circ)
    lo, hi = 0.0, 1.0
    while circuit_depth(circ, rz_weight=hi * t) < target:
        hi *= 2
    for _ in range(60):
        mid = (lo + hi) / 2
        if circuit_depth(circ, rz_weight=mid * t) < target:
            lo = mid
        else:
            hi = mid
    return SynthesisSpec(eps, base.c1, base.c0, gate_factor, hi)


@dataclass(frozen=True)
class CultivationSpec:
    """Magic-state cultivation: about one patch of space, user-chosen speed/quality.

    No published defaults exist for cycles or output error; both are required
    inputs and always flagged as assumptions.
    """

    d: int
    expected_cycles_per_t: float
    t_error: float
    patches: float = 1.0

    def __post_init__(self):
        if self.patches > 2:
            raise NoiseModelError("cultivation footprint is at most two patches")
        if self.expected_cycles_per_t <= 0 or not 0 <= self.t_error < 1:
            raise NoiseModelError("invalid cultivation parameters")

    @property
    def footprint(self) -> int:
        return int(math.ceil(self.patches * patch_physical_qubits(self.d)))

    def as_factory(self) -> FactorySpec:
        return FactorySpec(
            "cultivation", self.d, self.d, self.d, self.footprint,
            self.expected_cycles_per_t, self.t_error, assumed=True,
        )


def noise_tables(code: CodeParams) -> dict[str, Any]:
    """All rate tables for one code point, with assumption markers."""
    return {
        "code": asdict(code),
        "nisq": NisqNoiseModel.from_physical(code.p_phys).to_dict(),
        "pqec": PqecNoiseModel.from_code(code).to_dict(),
        "factories": [f.to_dict() for f in builtin_factories()],
        "synthesis": {**asdict(SynthesisSpec()), "assumed": True},
        "logical_rate_model": {
            "A": SCALE_A, "p_th": P_THRESHOLD, "calibration": CALIBRATION, "assumed": True,
        },
    }


def tables_to_json(tables: dict) -> str:
    return json.dumps(tables, sort_keys=True, indent=2)


def tables_from_json(text: str) -> dict:
    return json.loads(text)
