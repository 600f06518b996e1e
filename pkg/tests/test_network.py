import json

import numpy as np
import numpy.testing as npt
import pytest

from conftest import born_oracle
from starcert.errors import ConditioningError, DimensionError, ValidationError
from starcert.measurements import ghz_basis_measurement
from starcert.network import (
    BinaryObservableTriple,
    CorrelationTable,
    EveMeasurement,
    Scenario,
    assemble_joint_state,
    born_table,
    effects_from_observable,
    load_scenario,
    matrix_from_json,
    matrix_to_json,
    save_scenario,
    scenario_from_json,
    scenario_to_json,
)
from starcert.presets import ideal_scenario, random_scenario
from starcert.tensor import PAULI_X, PAULI_Y, PAULI_Z


def test_observable_triple_rejects_nonhermitian():
    with pytest.raises(ValueError):
        BinaryObservableTriple(np.array([[0, 1], [0, 0]]), PAULI_X, PAULI_Y)


def test_observable_triple_rejects_large_spectrum():
    with pytest.raises(ValidationError):
        BinaryObservableTriple(2 * PAULI_Z, PAULI_X, PAULI_Y)


def test_observable_triple_rejects_mixed_dims():
    with pytest.raises(DimensionError):
        BinaryObservableTriple(PAULI_Z, PAULI_X, np.eye(3))


def test_eve_measurement_requires_completeness():
    with pytest.raises(ValidationError):
        EveMeasurement((np.eye(2) / 2, np.eye(2) / 3))


def test_eve_measurement_requires_psd():
    with pytest.raises(ValidationError):
        EveMeasurement((np.diag([1.5, 0.5]), np.diag([-0.5, 0.5])))


def test_scenario_rejects_wrong_e0_outcome_count():
    scen = ideal_scenario(2)
    effects = scen.eve[0].effects
    merged = (effects[0] + effects[1],) + effects[2:]
    with pytest.raises(ValidationError, match="2\\^N"):
        Scenario(
            n_parties=2,
            sources=scen.sources,
            alice_observables=scen.alice_observables,
            eve=(EveMeasurement(merged), scen.eve[1]),
        )


def test_scenario_accepts_vector_sources():
    scen = ideal_scenario(2)
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    s = Scenario(
        n_parties=2,
        sources=(phi, phi),
        alice_observables=scen.alice_observables,
        eve=scen.eve,
    )
    npt.assert_allclose(s.sources[0], np.outer(phi, phi), atol=1e-12)


def test_effects_from_observable():
    m0, m1 = effects_from_observable(PAULI_Z)
    npt.assert_allclose(m0, np.diag([1.0, 0.0]))
    npt.assert_allclose(m1, np.diag([0.0, 1.0]))


def test_assemble_joint_state_groups_factors(rng):
    # two distinguishable product sources: joint must be A1 A2 (x) E1 E2
    a1 = np.diag([1.0, 0.0])
    e1 = np.diag([0.0, 1.0])
    a2 = np.diag([0.5, 0.5])
    e2 = np.diag([1.0, 0.0])
    scen = ideal_scenario(2)
    s = Scenario(
        n_parties=2,
        sources=(np.kron(a1, e1), np.kron(a2, e2)),
        alice_observables=scen.alice_observables,
        eve=scen.eve,
    )
    joint = assemble_joint_state(s)
    expected = np.kron(np.kron(a1, a2), np.kron(e1, e2))
    npt.assert_allclose(joint, expected, atol=1e-12)


def test_born_table_matches_bruteforce_oracle(rng):
    scen = random_scenario(2, rng)
    table = born_table(scen)
    for e, got in ((0, table.p0), (1, table.p1)):
        npt.assert_allclose(got, born_oracle(scen, e), atol=1e-12)


def test_born_table_matches_oracle_ideal():
    scen = ideal_scenario(2, eve_second=ghz_basis_measurement(2))
    table = born_table(scen)
    npt.assert_allclose(table.p0, born_oracle(scen, 0), atol=1e-12)
    npt.assert_allclose(table.p1, born_oracle(scen, 1), atol=1e-12)


def test_table_validation_flags_signaling():
    scen = ideal_scenario(2)
    table = born_table(scen)
    bad = table.p0.copy()
    bad[:, :, 0] = bad[:, :, 1]  # breaks normalization consistency per input
    bad[0, 0, 0] += 0.2
    bad[1, 0, 0] -= 0.2
    with pytest.raises(ValidationError):
        CorrelationTable(n=2, p0=bad, p1=table.p1)


def test_correlator_against_direct_sum(rng):
    scen = random_scenario(2, rng)
    table = born_table(scen)
    # <A_{1,0} A_{2,2} R_{1|0}> by explicit signed sum
    expected = 0.0
    for a1 in (0, 1):
        for a2 in (0, 1):
            sign = (-1) ** (a1 + a2)
            expected += sign * table.prob([a1, a2], 1, [0, 2], 0)
    assert table.correlator([0, 2], 1, 0) == pytest.approx(expected, abs=1e-12)


def test_correlator_marginalizes_none(rng):
    scen = random_scenario(2, rng)
    table = born_table(scen)
    # identity slot: result independent of the marginalized party's input
    by_sum = sum(
        (-1) ** a1 * sum(table.prob([a1, a2], 0, [1, x2], 0) for a2 in (0, 1))
        for a1 in (0, 1)
        for x2 in (0,)
    )
    assert table.correlator([1, None], 0, 0) == pytest.approx(by_sum, abs=1e-12)


def test_conditional_correlator_raises_on_zero_probability():
    scen = ideal_scenario(2)
    # e=1 is the trivial single-outcome measurement; build a zero-weight case
    table = born_table(scen)
    p1 = np.zeros((4, 2, 9))
    p1[:, 0, :] = table.p1[:, 0, :]
    table2 = CorrelationTable(n=2, p0=table.p0, p1=p1)
    with pytest.raises(ConditioningError):
        table2.conditional_correlator([0, 0], 1, 1)


def test_pbar_uniform_for_ideal():
    table = born_table(ideal_scenario(3))
    for l in range(8):
        assert table.pbar(l, 0) == pytest.approx(1 / 8, abs=1e-12)


def test_matrix_json_round_trip(rng):
    m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    npt.assert_allclose(matrix_from_json(matrix_to_json(m), "m"), m)


def test_matrix_from_json_rejects_bad_entries():
    with pytest.raises(ValidationError, match="doc.m"):
        matrix_from_json({"dim": 2, "entries": [[0, 0]] * 3}, "doc.m")


def test_scenario_json_round_trip(tmp_path):
    scen = ideal_scenario(2, eve_second=ghz_basis_measurement(2))
    path = tmp_path / "scen.json"
    save_scenario(scen, path)
    loaded = load_scenario(path)
    assert loaded.n_parties == scen.n_parties
    for a, b in zip(loaded.sources, scen.sources):
        npt.assert_allclose(a, b)
    for ta, tb in zip(loaded.alice_observables, scen.alice_observables):
        for ma, mb in zip(ta.observables(), tb.observables()):
            npt.assert_allclose(ma, mb)
    for ea, eb in zip(loaded.eve, scen.eve):
        for ma, mb in zip(ea.effects, eb.effects):
            npt.assert_allclose(ma, mb)
    # serialized form is stable under a round trip
    assert scenario_to_json(loaded) == scenario_to_json(scen)


def test_load_scenario_rejects_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ValidationError):
        load_scenario(path)


def test_scenario_from_json_reports_path():
    doc = scenario_to_json(ideal_scenario(2))
    doc["sources"][1]["entries"] = doc["sources"][1]["entries"][:-1]
    with pytest.raises(ValidationError, match="sources\\[1\\]"):
        scenario_from_json(doc)
