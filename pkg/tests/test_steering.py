import json

import numpy as np
import pytest

from rocent.qubit import IDENTITY4, pauli, random_density_matrix
from rocent.states import NamedState, make_state
from rocent.steering import (BellConfiguration, BinaryMeasurement, CorrelationTable, canonical_chsh_configuration,
                             chsh_score, half_plane, max_chsh_search, pauli_from_roc, random_bell_configuration,
                             roc_pauli_differences, steering_functional, steering_report_json)
from rocent.povm import AnglePartition

SX, SY = pauli("x"), pauli("y")


@pytest.mark.parametrize("r", [1.0, 0.5, 0.13])
def test_pauli_from_roc(r):
    x, y = pauli_from_roc(r)
    assert np.abs(x - SX).max() < 1e-12 and np.abs(y - SY).max() < 1e-12
    dx, dy = roc_pauli_differences(r)
    assert np.abs(dx - 2 * r / np.pi * SX).max() < 1e-12
    assert np.abs(dy - 2 * r / np.pi * SY).max() < 1e-12
    for m in (x, y, dx, dy):
        assert abs(np.trace(m)) < 1e-12 and np.allclose(m, m.conj().T)


def test_pauli_from_roc_rejects_zero():
    with pytest.raises(ValueError):
        pauli_from_roc(0.0)
    assert np.allclose(roc_pauli_differences(0.5)[0], SX / np.pi)


def test_table_validation():
    with pytest.raises(ValueError):
        CorrelationTable(1.1, 0, 0, 0)
    assert steering_functional(CorrelationTable(0, 0, 0, 0)) == 0.0


def test_werner_functional():
    for f in np.linspace(0, 1, 51):
        t = CorrelationTable.from_state(make_state(NamedState.werner(f)))
        assert abs(steering_functional(t) - 2 * np.sqrt(2) * f) < 1e-9
        for r in (0.3, 0.8, 1.0):
            known = CorrelationTable.from_roc_bob(make_state(NamedState.werner(f)), r, True)
            unknown = CorrelationTable.from_roc_bob(make_state(NamedState.werner(f)), r, False)
            assert abs(steering_functional(known) - 2 * np.sqrt(2) * f) < 1e-9
            assert abs(steering_functional(unknown) - 2 * np.sqrt(2) * f * r) < 1e-9


def test_report_json():
    t = CorrelationTable.from_state(make_state(NamedState.singlet()))
    d = json.loads(steering_report_json(t, True))
    assert set(d) == {"functional_value", "threshold", "demonstrated", "assumptions", "r_known"}
    assert d["threshold"] == 2.0 and d["demonstrated"] is True
    assert d["assumptions"] == "alice-trusted" and d["r_known"] is True
    assert abs(d["functional_value"] - 2 * np.sqrt(2)) < 1e-11


def test_zero_contrast_chsh_is_zero():
    rho = random_density_matrix(np.random.default_rng(0))
    assert abs(chsh_score(rho, canonical_chsh_configuration(), 0.0, 0.0)) < 1e-15


def test_canonical_chsh_value():
    s = chsh_score(make_state(NamedState.singlet()), canonical_chsh_configuration(), 1.0, 1.0)
    assert abs(s - (2 / np.pi) ** 2 * 2 * np.sqrt(2)) < 1e-12
    assert s <= 2


def test_half_plane_observable():
    for theta in (0.0, 0.3, np.pi / 2, 2.5):
        obs = half_plane(theta).observable(1.0)
        expected = -(2 / np.pi) * (np.sin(2 * theta) * SX + np.cos(2 * theta) * SY)
        assert np.allclose(obs, expected, atol=1e-12)


def test_binary_measurement_validation():
    with pytest.raises(ValueError):
        BinaryMeasurement(AnglePartition.uniform(2), (1,))
    with pytest.raises(ValueError):
        BinaryMeasurement(AnglePartition.uniform(2), (1, 0))


def test_random_search_respects_lhv_bound():
    rng = np.random.default_rng(2024)
    configs = [random_bell_configuration(rng) for _ in range(100)]
    states = [make_state(NamedState.singlet())] + [random_density_matrix(rng) for _ in range(19)]
    assert max_chsh_search(configs, states, [(1.0, 1.0), (0.7, 0.9)]) <= 2 + 1e-6
