"""Probe accounting, budget enforcement, and phase separation."""

import numpy as np
import pytest

from evasim.core import LEGITIMATE, MALICIOUS
from evasim.models import LinearSVMModel
from evasim.oracle import BudgetExhaustedError, ProbeOracle, local_oracle


def constant_oracle(label, d=2, budget=None, record_history=False):
    return ProbeOracle(lambda x: label, d, budget=budget,
                       record_history=record_history)


def test_budget_of_one_allows_one_explore_probe():
    oracle = constant_oracle(LEGITIMATE, budget=1)
    assert oracle.predict(np.zeros(2)) == LEGITIMATE
    with pytest.raises(BudgetExhaustedError):
        oracle.predict(np.zeros(2))
    assert oracle.probes_used == 1


def test_constant_predictor_counts_every_call():
    oracle = constant_oracle(LEGITIMATE, budget=10)
    for i in range(5):
        assert oracle.predict(np.zeros(2)) == LEGITIMATE
        assert oracle.probes_used == i + 1


def test_seed_probes_do_not_touch_explore_budget():
    oracle = constant_oracle(MALICIOUS, budget=2)
    for _ in range(50):
        oracle.predict(np.zeros(2), phase="seed")
    assert oracle.seed_probes_used == 50
    assert oracle.probes_used == 0
    assert oracle.remaining_budget == 2
    oracle.predict(np.zeros(2), phase="explore")
    oracle.predict(np.zeros(2), phase="explore")
    with pytest.raises(BudgetExhaustedError):
        oracle.predict(np.zeros(2), phase="explore")
    # seed probes stay possible after the explore budget is gone
    assert oracle.predict(np.zeros(2), phase="seed") == MALICIOUS


def test_ledger_per_phase_counts_sum_to_totals():
    oracle = constant_oracle(LEGITIMATE)
    for _ in range(3):
        oracle.predict(np.zeros(2), phase="seed")
    for _ in range(4):
        oracle.predict(np.zeros(2), phase="explore")
    ledger = oracle.ledger
    assert ledger.seed_probes == 3 and ledger.explore_probes == 4
    assert ledger.total == oracle.probes_used + oracle.seed_probes_used == 7
    assert ledger.first_probe_at["seed"] <= ledger.last_probe_at["seed"]


def test_history_records_phase_sample_label():
    model = LinearSVMModel(np.array([1.0, 0.0]), -0.5)
    oracle = local_oracle(model, record_history=True)
    x = np.array([0.9, 0.2])
    oracle.predict(x, phase="explore")
    phase, recorded, label = oracle.history[0]
    assert phase == "explore"
    assert np.array_equal(recorded, x)
    assert label == model.predict(x)


def test_unknown_phase_and_dimension_mismatch():
    oracle = constant_oracle(LEGITIMATE, d=3)
    with pytest.raises(ValueError, match="phase"):
        oracle.predict(np.zeros(3), phase="exploit")
    with pytest.raises(ValueError, match="dimension mismatch"):
        oracle.predict(np.zeros(2))


def test_oracle_answers_are_bare_binary_labels():
    model = LinearSVMModel(np.array([2.0, -1.0]), 0.1)
    oracle = local_oracle(model)
    answer = oracle.predict(np.array([0.3, 0.7]))
    assert isinstance(answer, int)
    assert answer in (LEGITIMATE, MALICIOUS)


def test_negative_budget_rejected():
    with pytest.raises(ValueError):
        constant_oracle(LEGITIMATE, budget=-1)
