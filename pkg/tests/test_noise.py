import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from eftvqa.circuit import AnsatzSpec, build_ansatz
from eftvqa.noise import (
    AboveThresholdError,
    CodeParams,
    CultivationSpec,
    FactorySpec,
    NisqNoiseModel,
    NoiseModelError,
    PqecNoiseModel,
    SynthesisSpec,
    builtin_factories,
    calibrate_synthesis,
    factory_by_name,
    injection_error,
    logical_error_rate,
    noise_tables,
    patch_physical_qubits,
    synthesis_growth,
    t_count_per_rz,
    tables_from_json,
    tables_to_json,
)


def test_code_params_validation():
    with pytest.raises(NoiseModelError):
        CodeParams(d=10)
    with pytest.raises(NoiseModelError):
        CodeParams(d=1)
    with pytest.raises(AboveThresholdError):
        CodeParams(p_phys=0.02)
    assert CodeParams(d=7).d_x == 7


def test_logical_rate_anchor():
    assert logical_error_rate(CodeParams(11, 1e-3)) == pytest.approx(1e-7, rel=1e-12)


@given(st.sampled_from([3, 5, 7, 9, 11, 13, 15]), st.floats(1e-5, 9e-3))
def test_logical_rate_decreases_with_distance(d, p):
    assert logical_error_rate(CodeParams(d + 2, p)) < logical_error_rate(CodeParams(d, p))


def test_injection_error():
    assert injection_error(1e-3) == pytest.approx(23e-3 / 30)
    assert injection_error(0.0) == 0.0
    with pytest.raises(NoiseModelError):
        injection_error(1.0)


@pytest.mark.parametrize("d,q", [(3, 17), (11, 241), (17, 577)])
def test_patch_qubits(d, q):
    assert patch_physical_qubits(d) == q


def test_nisq_model_ratios():
    m = NisqNoiseModel.from_physical(1e-3)
    assert m.p_cnot == 1e-3
    assert m.p_1q == pytest.approx(1e-4)
    assert m.p_meas == pytest.approx(1e-2)
    assert m.p_rz == 0.0


def test_pqec_model():
    m = PqecNoiseModel.from_code(CodeParams())
    assert set(m.p_logical) == {"Memory", "CX", "H", "S", "Measure"}
    assert m.p_rz_inject == pytest.approx(7.6667e-4, rel=1e-4)


def test_builtin_factories():
    small, mid, large = builtin_factories()
    assert (small.qubit_footprint, small.cycles_per_t, small.t_error) == (810, 22, 5.4e-4)
    assert (large.qubit_footprint, large.cycles_per_t, large.t_error) == (4600, 42, 4.5e-8)
    assert mid.assumed and not small.assumed and not large.assumed
    assert small.qubit_footprint < mid.qubit_footprint < large.qubit_footprint
    assert small.t_error > mid.t_error > large.t_error
    assert factory_by_name("11_5_5") is mid
    with pytest.raises(NoiseModelError):
        factory_by_name("nope")


def test_factory_validation():
    with pytest.raises(NoiseModelError):
        FactorySpec("bad", 3, 3, 3, 0, 1, 0.1)


def test_t_count():
    assert t_count_per_rz(SynthesisSpec(eps=1e-6)) == 60
    assert t_count_per_rz(SynthesisSpec(eps=1e-3)) == 30
    with pytest.raises(NoiseModelError):
        SynthesisSpec(eps=0)


def test_synthesis_calibration_reproduces_growth():
    spec = calibrate_synthesis()
    circ = build_ansatz(AnsatzSpec("fche", 20, 1))
    g, d = synthesis_growth(circ, spec)
    assert g == pytest.approx(20.0, rel=1e-9)
    assert d == pytest.approx(7.0, rel=1e-6)


def test_cultivation_spec():
    c = CultivationSpec(11, 8.0, 1e-6)
    f = c.as_factory()
    assert f.qubit_footprint == 241 and f.assumed
    with pytest.raises(NoiseModelError):
        CultivationSpec(11, 8.0, 1e-6, patches=3)
    with pytest.raises(NoiseModelError):
        CultivationSpec(11, 0.0, 1e-6)


def test_tables_roundtrip_and_assumptions():
    tables = noise_tables(CodeParams())
    back = tables_from_json(tables_to_json(tables))
    assert back == tables_from_json(tables_to_json(back))
    assert back["synthesis"]["assumed"] is True
    assert back["logical_rate_model"]["assumed"] is True
    assert any(f["assumed"] for f in back["factories"])
    assert math.isclose(back["pqec"]["p_rz_inject"], 23e-3 / 30)
