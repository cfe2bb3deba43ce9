import dataclasses
import math

import numpy as np
import pytest

from eftvqa.circuit import AnsatzSpec, Circuit, Gate, S, build_ansatz
from eftvqa.estimator import (
    ConfigurationError,
    ConventionalStrategy,
    CultivationStrategy,
    EstimatorError,
    NisqStrategy,
    PqecStrategy,
    SOURCES,
    benchmark_circuits,
    best_conventional,
    compare_strategies,
    comparison_dict,
    conventional_data_patches,
    crossover_depth_scan,
    default_strategies,
    estimate,
    predicted_crossover,
    win_matrix,
)
from eftvqa.layout import NoFitError
from eftvqa.noise import (
    CodeParams,
    CultivationSpec,
    NisqNoiseModel,
    PqecNoiseModel,
    SynthesisSpec,
    builtin_factories,
    factory_by_name,
    injection_error,
)

CODE = CodeParams()
NISQ = NisqStrategy(NisqNoiseModel.from_physical(1e-3))
PQEC = PqecStrategy(PqecNoiseModel.from_code(CODE))


def fche(n, p=1):
    return build_ansatz(AnsatzSpec("fche", n, p))


@pytest.mark.parametrize("strategy", [
    NISQ, PQEC, ConventionalStrategy(factory_by_name("11_5_5"), CODE, 10_000),
])
def test_breakdown_consistency(strategy):
    rep = estimate(fche(12), strategy)
    assert set(rep.breakdown) == set(SOURCES)
    assert -math.log(rep.fidelity) == pytest.approx(sum(rep.breakdown.values()), abs=1e-12)
    assert 0 < rep.fidelity <= 1


def test_nisq_breakdown_closed_form():
    circ = fche(8)
    rep = estimate(circ, NISQ)
    c = circ.census()
    gate = c["CX"] * -math.log1p(-1e-3) + c["H"] * -math.log1p(-1e-4)
    assert rep.breakdown["gate"] == pytest.approx(gate)
    assert rep.breakdown["measurement"] == pytest.approx(8 * -math.log1p(-1e-2))
    assert rep.breakdown["rz_t"] == 0


def test_pqec_charges_two_attempts_per_rz():
    circ = fche(8)
    rep = estimate(circ, PQEC)
    expect = 2 * circ.count("Rz") * -math.log1p(-injection_error(1e-3))
    assert rep.breakdown["rz_t"] == pytest.approx(expect)
    assert rep.breakdown["memory"] > 0


def test_monotone_in_rates():
    base_circ = fche(10)
    # every gate class present so that every rate has a nonzero count
    circ = Circuit(10, base_circ.gates + (S(0), Gate("MeasureZ", (3,))))
    base = estimate(circ, NISQ).fidelity
    for field in ("p_cnot", "p_1q", "p_meas"):
        worse = dataclasses.replace(NISQ.model, **{field: getattr(NISQ.model, field) * 1.5})
        assert estimate(circ, NisqStrategy(worse)).fidelity < base
    m = PQEC.model
    assert estimate(circ, PqecStrategy(dataclasses.replace(m, p_rz_inject=m.p_rz_inject * 1.1))
                    ).fidelity < estimate(circ, PQEC).fidelity
    for op in m.p_logical:
        rates = dict(m.p_logical, **{op: m.p_logical[op] * 10})
        worse = PqecStrategy(dataclasses.replace(m, p_logical=rates))
        assert estimate(circ, worse).fidelity < estimate(circ, PQEC).fidelity
    f = factory_by_name("11_5_5")
    a = estimate(circ, ConventionalStrategy(f, CODE, 10_000)).fidelity
    b = estimate(circ, ConventionalStrategy(dataclasses.replace(f, t_error=f.t_error * 2),
                                            CODE, 10_000)).fidelity
    assert b < a


def test_monotone_in_counts():
    small, big = fche(10, 1), fche(10, 2)
    for st in (NISQ, PQEC, ConventionalStrategy(factory_by_name("11_5_5"), CODE, 10_000)):
        assert estimate(big, st).fidelity < estimate(small, st).fidelity


def test_conventional_reduces_to_injection_limit():
    circ = fche(8)
    synth = SynthesisSpec(eps=1e-300, c1=0.0, c0=1.0)
    f = dataclasses.replace(factory_by_name("7_3_3"), t_error=injection_error(1e-3))
    rep = estimate(circ, ConventionalStrategy(f, CODE, 10_000, synth))
    per_rz = -math.log1p(-injection_error(1e-3))
    assert rep.details["t_count"] == circ.count("Rz")
    assert rep.breakdown["rz_t"] == pytest.approx(circ.count("Rz") * per_rz)
    # pQEC pays the same per consumption, twice on average
    assert estimate(circ, PQEC).breakdown["rz_t"] == pytest.approx(2 * rep.breakdown["rz_t"])


def test_estimates_are_deterministic():
    circ = fche(12)
    st = ConventionalStrategy(factory_by_name("17_7_7"), CODE, 10_000, allow_overcommit=True)
    assert estimate(circ, st).to_dict() == estimate(circ, st).to_dict()


def test_factory_count_and_stall():
    circ = fche(12)
    rep = estimate(circ, ConventionalStrategy(factory_by_name("7_3_3"), CODE, 10_000))
    live = conventional_data_patches(12)
    assert rep.details["factories"] == (10_000 - live * 241) // 810
    assert rep.stall_cycles >= 0
    assert rep.qubits_used <= 10_000


def test_no_factory_fits():
    circ = fche(20)
    st = ConventionalStrategy(factory_by_name("17_7_7"), CODE, 10_000)
    with pytest.raises(ConfigurationError):
        estimate(circ, st)
    rep = estimate(circ, dataclasses.replace(st, allow_overcommit=True))
    assert rep.details["overcommitted"] and not rep.fits


def test_pqec_no_fit():
    strict = PqecStrategy(PQEC.model, budget=10_000)
    with pytest.raises(NoFitError):
        estimate(fche(24), strict)
    assert not estimate(fche(24), strict, strict=False).fits
    assert estimate(fche(20), strict).fits


def test_cultivation_strategy():
    spec = CultivationSpec(11, expected_cycles_per_t=10.0, t_error=1e-6)
    rep = estimate(fche(12), CultivationStrategy(spec, CODE, 10_000))
    assert rep.details["assumed"]
    assert rep.details["factory"] == "cultivation"
    assert 0 < rep.fidelity < 1


def test_unknown_strategy():
    with pytest.raises(EstimatorError):
        estimate(fche(4), object())


def test_pqec_beats_conventional_for_fche_at_ten_thousand():
    ratios = []
    for n in (12, 16, 20, 24):
        row = compare_strategies({"c": fche(n)}, default_strategies(CODE, 10_000))[0]
        for f in builtin_factories():
            assert row.ratio("pqec", f"conventional[{f.name}]") >= 1
        ratios.append(row.ratio("pqec", "conventional[15-to-1_11_5_5]"))
    assert all(1 <= r <= 2.5 for r in ratios)
    assert ratios == sorted(ratios)


def test_comparison_dict_reports_fit():
    rows = compare_strategies({"a": fche(20), "b": fche(24)},
                              default_strategies(CODE, 10_000))
    doc = comparison_dict(rows)
    assert [d["fits"] for d in doc] == [True, False]
    with pytest.raises(EstimatorError):
        compare_strategies({"a": fche(4)}, [PQEC])


def test_best_conventional_picks_highest_fidelity():
    circ = fche(8)
    best = best_conventional(circ, CODE, 20_000)
    for f in builtin_factories():
        try:
            rep = estimate(circ, ConventionalStrategy(f, CODE, 20_000))
        except ConfigurationError:
            continue
        assert rep.fidelity <= best.fidelity


def test_win_matrix_trends():
    programs = [4, 8, 12, 16, 20]
    devices = [5_000, 10_000, 20_000, 50_000]
    wm = win_matrix(programs, devices, depths=(1, 2))
    v = wm.values
    for i in range(len(programs)):
        row = v[i][~np.isnan(v[i])]
        assert all(a >= b for a, b in zip(row, row[1:]))
    for j in range(len(devices)):
        col = v[:, j][~np.isnan(v[:, j])]
        assert all(a <= b for a, b in zip(col, col[1:]))
    assert wm.infeasible(2, 0)
    assert "NA" in wm.csv()


def test_benchmark_circuits():
    circs = benchmark_circuits(8, depths=(1, 2))
    assert len(circs) == 6
    assert "linear-p1" in benchmark_circuits(2, depths=(1,))


def test_crossover_in_expected_window():
    assert 12 <= predicted_crossover("blocked_all_to_all") <= 14
    scan = crossover_depth_scan(ns=range(8, 17), depths=range(1, 6))
    assert 12 <= scan.crossover <= 14
    assert all(s < 0 for s in scan.nisq_slope)
    assert scan.to_dict()["crossover_n"] == scan.crossover
