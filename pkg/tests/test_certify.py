import json

import numpy as np
import pytest

from oracles import bell_diagonal_min_negativity, eig_negativity
from rocent.certify import (CertStatus, ConfidenceSettings, certify, hoeffding_radius, min_negativity,
                            witness_negativity)
from rocent.povm import AnglePartition
from rocent.qubit import IDENTITY4
from rocent.semidi import exact_statistics
from rocent.states import NamedState, joint_probabilities, make_state, sample_record, uniform_povms

P8 = AnglePartition.uniform(8)


def stats(state, r=1.0, part=P8):
    return exact_statistics(state, r, r, part, part)


def test_hoeffding_radius():
    assert abs(hoeffding_radius(10**6, 0.99) - np.sqrt(np.log(200) / 2e6)) < 1e-15
    assert abs(hoeffding_radius(10**6, 0.99) - 1.628e-3) < 1e-6
    assert abs(hoeffding_radius(50, 0.0) - np.sqrt(np.log(2) / 100)) < 1e-15
    radii = [hoeffding_radius(n, 0.95) for n in (1, 10, 100, 1000)]
    assert all(a > b for a, b in zip(radii, radii[1:]))
    for bad in [(10, 1.0), (0, 0.5), (10, -0.1)]:
        with pytest.raises(ValueError):
            hoeffding_radius(*bad)


def test_confidence_settings_validation():
    with pytest.raises(ValueError):
        ConfidenceSettings(c=1.0)
    with pytest.raises(ValueError):
        ConfidenceSettings(mode="bayes")


def test_exact_singlet():
    res = min_negativity(stats(NamedState.singlet()), P8, P8, 1.0, 1.0)
    assert res.status is CertStatus.ENTANGLED
    assert abs(res.min_negativity - 0.5) < 1e-4
    assert abs(witness_negativity(res) - 0.5) < 1e-4
    assert res.witness_violation < 1e-7


def test_exact_mixed_is_inconclusive():
    p = joint_probabilities(IDENTITY4 / 4, *uniform_povms(0.6, 0.8, 8, 8))
    res = min_negativity(p, P8, P8, 0.6, 0.8)
    assert res.status is CertStatus.INCONCLUSIVE
    assert res.min_negativity < 1e-6


def test_broken_normalization_is_infeasible():
    p = stats(NamedState.singlet()).copy()
    p[0, 0] += 0.05
    assert min_negativity(p, P8, P8, 1.0, 1.0).status is CertStatus.INFEASIBLE_DATA


def test_statistics_stronger_than_hypothesis_are_infeasible():
    p = stats(NamedState.werner(0.8))
    res = min_negativity(p, P8, P8, 0.85, 0.85)
    assert res.status is CertStatus.INFEASIBLE_DATA
    assert res.min_negativity is None


@pytest.mark.parametrize("c", np.round(np.linspace(0, 1, 11), 1))
def test_bell_diagonal_oracle(c):
    res = min_negativity(stats(NamedState.werner(c)), P8, P8, 1.0, 1.0)
    assert abs(res.min_negativity - bell_diagonal_min_negativity(c)) < 1e-5


def test_hypothesis_with_weaker_devices_matches_rescaled_oracle():
    # Werner(0.8) statistics read with hypothesis r=0.95 look like correlations 0.8/0.9025
    res = min_negativity(stats(NamedState.werner(0.8)), P8, P8, 0.95, 0.95)
    assert abs(res.min_negativity - bell_diagonal_min_negativity(0.8 / 0.9025)) < 1e-5


def test_hoeffding_pipeline_singlet_and_ortho():
    pa, pb = uniform_povms(0.9, 0.9, 8, 8)
    for state, expected in [(NamedState.singlet(), CertStatus.ENTANGLED),
                            (NamedState.ortho_mixture("x"), CertStatus.INCONCLUSIVE),
                            (NamedState.ortho_mixture("z"), CertStatus.INCONCLUSIVE)]:
        rec = sample_record(make_state(state), pa, pb, 10**6, seed=42)
        res = certify(rec, 0.9, 0.9)
        assert res.status is expected, state
        assert res.witness_violation < 1e-7


def test_tiny_record_is_inconclusive():
    pa, pb = uniform_povms(0.9, 0.9, 8, 8)
    rec = sample_record(make_state(NamedState.singlet()), pa, pb, 10, seed=1)
    res = certify(rec, 0.9, 0.9)
    assert res.status is CertStatus.INCONCLUSIVE
    assert abs(res.epsilon_used.flat[0] - np.sqrt(np.log(200) / 20)) < 1e-12


def test_larger_radius_never_increases_negativity():
    p = stats(NamedState.singlet(), r=0.9)
    values = []
    for n in (10**8, 10**6, 10**5, 10**4, 10**3):
        res = min_negativity(p, P8, P8, 0.9, 0.9, ConfidenceSettings(0.99, "hoeffding"), n=n)
        values.append(res.min_negativity)
    assert all(b <= a + 1e-7 for a, b in zip(values, values[1:])), values


def test_bonferroni_widens_radius():
    p = stats(NamedState.singlet(), r=0.9)
    plain = min_negativity(p, P8, P8, 0.9, 0.9, ConfidenceSettings(0.99, "hoeffding"), n=10**5)
    bonf = min_negativity(p, P8, P8, 0.9, 0.9, ConfidenceSettings(0.99, "hoeffding", True), n=10**5)
    assert bonf.epsilon_used.flat[0] > plain.epsilon_used.flat[0]
    assert bonf.min_negativity <= plain.min_negativity + 1e-7


def test_hoeffding_needs_n():
    with pytest.raises(ValueError):
        min_negativity(stats(NamedState.singlet()), P8, P8, 1, 1, ConfidenceSettings(0.9, "hoeffding"))


def test_result_json():
    res = min_negativity(stats(NamedState.singlet()), P8, P8, 1.0, 1.0)
    d = json.loads(res.to_json())
    assert set(d) >= {"status", "min_negativity", "c", "epsilon", "n", "solver_iterations", "residuals"}
    assert d["status"] == "ENTANGLED"


def test_nonuniform_partitions():
    pa = AnglePartition.from_edges([0, 0.5, 1.7, 2.2, np.pi])
    pb = AnglePartition.from_edges([0, 1.0, 2.0, np.pi])
    p = exact_statistics(NamedState.werner(0.9), 1.0, 1.0, pa, pb)
    res = min_negativity(p, pa, pb, 1.0, 1.0)
    assert abs(res.min_negativity - 0.4) < 1e-5
    assert abs(eig_negativity(res.witness_state.matrix) - 0.4) < 1e-4
