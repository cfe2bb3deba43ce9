"""Cycle-level list scheduler for lattice-surgery execution on the tiled layout.

One clock cycle is one lattice-surgery step.  Costs:

* a CNOT cluster (one control, many targets) whose patches all sit in one
  column-half takes 4 cycles and holds that half's bus; a cluster that crosses
  the halves takes 8 cycles and holds both buses;
* an Rz consumption takes 2 cycles per attempt on the data patch and holds the
  qubit's routing channel for the first cycle (the merge with the magic patch);
* an Rz on a still-fresh qubit (only single-qubit Cliffords since |0>) is
  prepared by injecting the rotated state directly and costs nothing;
* single-qubit Cliffords are tracked in the Pauli frame and cost nothing.

If some cluster has targets on both sides of the boundary, the two buses are
merged into one routing channel for the whole circuit.
"""
from __future__ import annotations

import bisect
import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, Gate
from .layout import LayoutSpec, half_of, layout_metrics

FAST_CLUSTER = 4
SLOW_CLUSTER = 8
CYCLES_PER_ATTEMPT = 2
CHANNEL_HOLD = 1
MEASURE_CYCLES = 0
EXPECTED_ATTEMPTS = 2
# fitted constant for merged-channel routing (see module notes in README)
MERGED_CHANNEL_OFFSET = 6

FREE_1Q = {"H", "S", "Sdg", "X", "Y", "Z", "I"}


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class MacroOp:
    kind: str  # cnot_cluster | rz_consume | rz_prepare | measure
    qubits: tuple[int, ...]
    cycles: int
    fast: bool | None = None
    attempts: int = 0

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "qubits": list(self.qubits), "cycles": self.cycles}
        if self.fast is not None:
            d["fast"] = self.fast
        if self.attempts:
            d["attempts"] = self.attempts
        return d


@dataclass(frozen=True)
class ScheduledOp:
    start: int
    op: MacroOp
    patches: tuple[str, ...]
    channels: tuple[str, ...] = ()

    @property
    def end(self) -> int:
        return self.start + self.op.cycles


@dataclass
class Schedule:
    timeline: list[ScheduledOp]
    t_circ: int
    t_raw: int
    n_circ: int
    v_circ: int
    idle: dict[str, int]
    routing: str
    layout: LayoutSpec | None = None
    meta: dict = field(default_factory=dict)

    @property
    def v_layout(self) -> int:
        """Spacetime volume of the whole layout: t_circ x all patches."""
        return self.t_circ * self.n_circ

    def to_dict(self) -> dict:
        return {
            "t_circ": self.t_circ,
            "t_raw": self.t_raw,
            "N_circ": self.n_circ,
            "V_circ": self.v_circ,
            "routing": self.routing,
            "idle": self.idle,
            "timeline": [
                {"start": s.start, **s.op.to_dict(), "patches": list(s.patches),
                 "channels": list(s.channels)}
                for s in self.timeline
            ],
            **self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def gantt(self, width: int = 100) -> str:
        """Plain-text Gantt dump: one row per data patch, one char per cycle."""
        horizon = max(self.t_raw, 1)
        scale = max(1, -(-horizon // width))
        rows: dict[str, list[str]] = {}
        mark = {"cnot_cluster": "C", "rz_consume": "R", "measure": "M"}
        for s in self.timeline:
            for p in s.patches:
                if not p.startswith("q"):
                    continue
                row = rows.setdefault(p, ["."] * (-(-horizon // scale)))
                for t in range(s.start, s.end):
                    row[t // scale] = mark.get(s.op.kind, "?")
        lines = [f"# t_circ={self.t_circ} (raw {self.t_raw}), {scale} cycle(s)/char"]
        for p in sorted(rows, key=lambda x: int(x[1:])):
            lines.append(f"{p:>5} {''.join(rows[p])}")
        return "\n".join(lines)

    def csv_row(self, **extra) -> dict:
        pe = None
        if self.layout is not None:
            pe = layout_metrics(self.layout).packing_efficiency
        return {**extra, "t_circ": self.t_circ, "N_circ": self.n_circ,
                "V_circ": self.v_circ, "PE": pe}


def metrics_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    fields = ["N", "kind", "layout", "t_circ", "N_circ", "V_circ", "PE"]
    w = csv.DictWriter(buf, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


class _Channel:
    """Busy intervals of one routing resource, kept sorted and disjoint."""

    def __init__(self):
        self.starts: list[int] = []
        self.ends: list[int] = []

    def free(self, t: int, d: int) -> bool:
        i = bisect.bisect_right(self.starts, t) - 1
        if i >= 0 and self.ends[i] > t:
            return False
        j = i + 1
        return j >= len(self.starts) or self.starts[j] >= t + d

    def next_end(self, t: int) -> int:
        """Smallest end > t among intervals overlapping or after t."""
        i = bisect.bisect_right(self.ends, t)
        return self.ends[i] if i < len(self.ends) else t + 1

    def add(self, t: int, d: int):
        if d <= 0:
            return
        i = bisect.bisect_left(self.starts, t)
        self.starts.insert(i, t)
        self.ends.insert(i, t + d)


def _earliest(chans: list[_Channel], t: int, d: int) -> int:
    while True:
        blocked = [c for c in chans if not c.free(t, d)]
        if not blocked:
            return t
        t = min(c.next_end(t) for c in blocked)


def _lower(circuit: Circuit) -> list[tuple[str, tuple[int, ...], tuple[int, ...]]]:
    """Circuit -> (kind, control-or-qubit, targets) items, CX runs fused."""
    items = []
    run = None
    for g in circuit.gates:
        if g.op == "CX" and run is not None and g.qubits[0] == run[1][0] \
                and g.qubits[1] not in run[2]:
            run[2].append(g.qubits[1])
            continue
        if run is not None:
            items.append(("cx", run[1], tuple(run[2])))
            run = None
        if g.op == "CX":
            run = ["cx", (g.qubits[0],), [g.qubits[1]]]
        elif g.op == "Rz":
            items.append(("rz", g.qubits, ()))
        elif g.op == "MeasureZ":
            items.append(("m", g.qubits, ()))
        elif g.op in FREE_1Q:
            items.append(("1q", g.qubits, ()))
        else:
            raise ScheduleError(f"cannot schedule gate {g.op}")
    if run is not None:
        items.append(("cx", run[1], tuple(run[2])))
    return items


def routing_mode(circuit: Circuit, n_data: int) -> str:
    for kind, ctl, tg in _lower(circuit):
        if kind == "cx" and len({half_of(t, n_data) for t in tg}) > 1:
            return "merged"
    return "split"


def schedule(
    circuit: Circuit,
    layout: LayoutSpec | None = None,
    rus: str | np.random.Generator = "deterministic",
    seed: int | None = None,
    limit_magic: bool = False,
    routing: str | None = None,
    rz_cycles: int | None = None,
) -> Schedule:
    """Greedy list schedule of ``circuit`` on the tiled layout.

    Args:
        circuit: logical circuit (H/S/CX/Rz/MeasureZ...).
        layout: tiled layout; defaults to the smallest one holding the circuit.
        rus: ``"deterministic"`` (one consumption window per Rz, the retry being
            overlapped by patch shuffling), ``"expected"`` (E[g] = 2 attempts on
            the critical path), ``"sample"`` or a numpy Generator (attempts drawn
            from the fair-coin repeat-until-success process).
        seed: seed for ``"sample"`` mode.
        limit_magic: cap concurrent consumptions at the layout's magic-state
            parallelism 2*floor(k/3) (at least 1).
        routing: force ``"split"`` or ``"merged"`` routing; by default it is
            derived from the circuit.
        rz_cycles: fixed duration of every Rz (e.g. a synthesized T sequence);
            disables direct preparation on fresh qubits.
    """
    if layout is None:
        layout = LayoutSpec("proposed", n=circuit.width)
    if layout.kind != "proposed":
        raise ScheduleError("cycle-level scheduling targets the tiled layout")
    met = layout_metrics(layout)
    n_data = met.data_patches
    if circuit.width > n_data:
        raise ScheduleError(
            f"circuit width {circuit.width} exceeds {n_data} data patches"
        )
    rng = None
    if isinstance(rus, np.random.Generator):
        rng = rus
    elif rus == "sample":
        rng = np.random.Generator(np.random.Philox(seed))
    elif rus not in ("deterministic", "expected"):
        raise ScheduleError(f"unknown rus mode {rus!r}")

    mode = routing or routing_mode(circuit, n_data)
    if mode not in ("split", "merged"):
        raise ScheduleError(f"unknown routing {mode!r}")
    buses = [_Channel(), _Channel()] if mode == "split" else [_Channel()]
    bus_name = ["bus0", "bus1"] if mode == "split" else ["channel"]
    magic_slots = [_Channel() for _ in range(max(1, met.max_parallel_magic))]

    def bus_of(q):
        return half_of(q, n_data) if mode == "split" else 0

    ready = [0] * circuit.width
    fresh = [True] * circuit.width
    busy = [0] * circuit.width
    timeline: list[ScheduledOp] = []
    v_circ = 0

    for kind, qs, tg in _lower(circuit):
        if kind == "1q":
            continue
        if kind == "cx":
            c = qs[0]
            members = (c,) + tg
            halves = {half_of(q, n_data) for q in members}
            fast = len(halves) == 1
            d = FAST_CLUSTER if fast else SLOW_CLUSTER
            used = sorted({bus_of(q) for q in members}) if not fast else [bus_of(c)]
            chans = [buses[i] for i in used]
            t = _earliest(chans, max(ready[q] for q in members), d)
            for ch in chans:
                ch.add(t, d)
            for q in members:
                ready[q] = t + d
                busy[q] += d
                fresh[q] = False
            op = MacroOp("cnot_cluster", members, d, fast=fast)
            timeline.append(ScheduledOp(t, op, tuple(f"q{q}" for q in members),
                                        tuple(bus_name[i] for i in used)))
            v_circ += d * len(members)
        elif kind == "rz":
            q = qs[0]
            if fresh[q] and rz_cycles is None:
                # rotated state injected straight into the fresh data patch
                fresh[q] = False
                op = MacroOp("rz_prepare", (q,), 0)
                timeline.append(ScheduledOp(ready[q], op, (f"q{q}",)))
                continue
            if rz_cycles is not None:
                attempts = 1
            elif rng is not None:
                attempts = int(rng.geometric(0.5))
            elif rus == "expected":
                attempts = EXPECTED_ATTEMPTS
            else:
                attempts = 1
            d = CYCLES_PER_ATTEMPT * attempts if rz_cycles is None else rz_cycles
            bus = buses[bus_of(q)]
            t = ready[q]
            while True:
                t = _earliest([bus], t, CHANNEL_HOLD)
                if not limit_magic:
                    slot = None
                    break
                slot = next((s for s in magic_slots if s.free(t, d)), None)
                if slot is not None:
                    break
                t = min(s.next_end(t) for s in magic_slots)
            bus.add(t, CHANNEL_HOLD)
            if slot is not None:
                slot.add(t, d)
            ready[q] = t + d
            busy[q] += d
            op = MacroOp("rz_consume", (q,), d, attempts=attempts)
            timeline.append(ScheduledOp(t, op, (f"q{q}", f"m{q}"),
                                        (bus_name[bus_of(q)],)))
            v_circ += d * 2
        else:
            q = qs[0]
            t = ready[q]
            op = MacroOp("measure", (q,), MEASURE_CYCLES)
            timeline.append(ScheduledOp(t, op, (f"q{q}",)))
            ready[q] = t + MEASURE_CYCLES
            busy[q] += MEASURE_CYCLES
            v_circ += MEASURE_CYCLES

    t_raw = max(ready, default=0)
    offset = MERGED_CHANNEL_OFFSET if mode == "merged" and routing is None else 0
    t_circ = max(t_raw - offset, 0)
    idle = {f"q{q}": t_raw - busy[q] for q in range(circuit.width)}
    timeline.sort(key=lambda s: (s.start, s.op.kind, s.op.qubits))
    return Schedule(timeline, t_circ, t_raw, met.total_patches, v_circ, idle, mode,
                    layout, {"rus": rus if isinstance(rus, str) else "sample"})


def layout_volume(circuit: Circuit, layout: LayoutSpec) -> float:
    """Spacetime volume (cycles x patches) of ``circuit`` on ``layout``."""
    if layout.kind == "proposed":
        return float(schedule(circuit, layout).v_layout)
    from .layout import BASELINES

    cost = BASELINES[layout.kind]
    # one shared routing lane, same per-op costs, layout-specific speed
    lane = schedule(circuit, LayoutSpec("proposed", n=circuit.width), routing="merged")
    return cost.time_scale * lane.t_raw * cost.patches(circuit.width)


def layout_volume_ratio(kind: str, ns=range(8, 165, 4), layout: str = "compact",
                        p: int = 1) -> float:
    """Mean over N of V(layout) / V(tiled layout) for one ansatz kind."""
    from .circuit import AnsatzSpec, build_ansatz

    ratios = []
    for n in ns:
        circ = build_ansatz(AnsatzSpec(kind, n, p))
        ref = layout_volume(circ, LayoutSpec("proposed", n=n))
        ratios.append(layout_volume(circ, LayoutSpec(layout, n=n)) / ref)
    return float(np.mean(ratios))
