"""Anchor-points attack: seed search, adaptive exploration, exploitation."""

import numpy as np
import pytest

from evasim.attack_ap import (
    AnchorSet,
    ApConfig,
    SeedSearchError,
    SeedSet,
    ap_exploit,
    ap_explore,
    dynamic_radius,
    find_seed,
    perturb,
)
from evasim.core import LEGITIMATE, MALICIOUS
from evasim.models import LinearSVMModel
from evasim.oracle import BudgetExhaustedError, ProbeOracle, local_oracle
from evasim.rng import Rng


def constant_oracle(label, d=2, budget=None, record_history=False):
    return ProbeOracle(lambda x: label, d, budget=budget,
                       record_history=record_history)


class StubRng:
    """Rng double returning scripted values for exploit-order tests."""

    def __init__(self, integers=(), randoms=(), normals=()):
        self._integers = list(integers)
        self._randoms = list(randoms)
        self._normals = list(normals)

    def integers(self, upper, n=None):
        return self._integers.pop(0)

    def random(self, n=None):
        return self._randoms.pop(0)

    def normal(self, n=None):
        return np.array(self._normals.pop(0), dtype=np.float64)


class TestFindSeed:
    def test_constant_legitimate_needs_one_probe(self):
        oracle = constant_oracle(LEGITIMATE)
        seeds = find_seed(oracle, Rng(1))
        assert seeds.seed_probe_count == 1
        assert len(seeds.legitimate) == 1 and not seeds.malicious
        assert oracle.seed_probes_used == 1

    def test_missing_class_fails_at_cap_naming_it(self):
        oracle = constant_oracle(LEGITIMATE)
        with pytest.raises(SeedSearchError, match="malicious"):
            find_seed(oracle, Rng(1), need_malicious=True, max_seed_probes=200)
        reject = constant_oracle(MALICIOUS)
        with pytest.raises(SeedSearchError, match="legitimate"):
            find_seed(reject, Rng(1), max_seed_probes=200)

    def test_balanced_halfspace_finds_both_classes_cheaply(self):
        defender = LinearSVMModel(np.array([1.0, 1.0]), -1.0)
        oracle = local_oracle(defender)
        seeds = find_seed(oracle, Rng(3), need_malicious=True,
                          max_seed_probes=10000)
        assert seeds.seed_probe_count <= 500
        assert defender.predict(seeds.legitimate[0]) == LEGITIMATE
        assert defender.predict(seeds.malicious[0]) == MALICIOUS


class TestPerturb:
    def test_vanishing_radius_returns_input(self):
        x = np.array([0.4, 0.6])
        out = perturb(x, 1e-12, Rng(1))
        assert np.allclose(out, x, atol=1e-9)

    def test_output_always_clipped_to_unit_box(self):
        rng = Rng(2)
        x = np.array([0.05, 0.95])
        for _ in range(200):
            out = perturb(x, 0.8, rng)
            assert (out >= 0).all() and (out <= 1).all()

    def test_monte_carlo_std_matches_radius(self):
        # interior point, radius 0.1: clipping is a >4 sigma event, so the
        # empirical per-component std of the offsets estimates the radius
        rng = Rng(3)
        x = np.full(2, 0.5)
        offsets = np.array([perturb(x, 0.1, rng) - x for _ in range(100_000)])
        stds = offsets.std(axis=0)
        assert (stds > 0.095).all() and (stds < 0.105).all()

    def test_radius_must_be_positive(self):
        with pytest.raises(ValueError):
            perturb(np.zeros(2), 0.0, Rng(1))


class TestDynamicRadius:
    def test_exact_values(self):
        assert dynamic_radius(10, 0, 0.1, 0.5) == pytest.approx(0.1)
        assert dynamic_radius(10, 10, 0.1, 0.5) == pytest.approx(0.5)
        assert dynamic_radius(4, 2, 0.1, 0.5) == pytest.approx(0.3)

    def test_monotone_in_acceptance_count(self):
        radii = [dynamic_radius(20, c, 0.1, 0.5) for c in range(21)]
        assert all(a <= b for a, b in zip(radii, radii[1:]))
        assert radii[0] == pytest.approx(0.1)
        assert radii[-1] == pytest.approx(0.5)

    def test_index_must_be_positive(self):
        with pytest.raises(ValueError):
            dynamic_radius(0, 0, 0.1, 0.5)


class TestApExplore:
    def test_accept_all_keeps_every_probe(self):
        cfg = ApConfig(b_explore=50)
        oracle = constant_oracle(LEGITIMATE)
        seeds = SeedSet(legitimate=[np.full(2, 0.5)])
        anchors = ap_explore(seeds, oracle, cfg, Rng(4))
        assert len(anchors) == 50 + 1
        assert anchors.probes_spent == 50
        assert oracle.probes_used == 50

    def test_reject_all_keeps_only_seeds(self):
        cfg = ApConfig(b_explore=50)
        oracle = constant_oracle(MALICIOUS)
        seed = np.full(2, 0.5)
        anchors = ap_explore(SeedSet(legitimate=[seed]), oracle, cfg, Rng(4))
        assert len(anchors) == 1
        assert np.array_equal(anchors.anchors[0], seed)
        assert oracle.probes_used == 50

    def test_anchor_soundness_replayable_from_history(self):
        defender = LinearSVMModel(np.array([1.0, 1.0]), -1.0)
        cfg = ApConfig(b_explore=200)
        oracle = local_oracle(defender, budget=200, record_history=True)
        seeds = SeedSet(legitimate=[np.array([0.1, 0.1])])
        anchors = ap_explore(seeds, oracle, cfg, Rng(5))
        probed = {
            tuple(x): label for phase, x, label in oracle.history
            if phase == "explore"
        }
        for anchor in anchors.anchors[1:]:
            assert probed[tuple(anchor)] == LEGITIMATE
        assert all(defender.predict(a) == LEGITIMATE for a in anchors.anchors)

    def test_external_budget_shortfall_surfaces_cleanly(self):
        cfg = ApConfig(b_explore=50)
        oracle = constant_oracle(LEGITIMATE, budget=10)
        seeds = SeedSet(legitimate=[np.full(2, 0.5)])
        with pytest.raises(BudgetExhaustedError):
            ap_explore(seeds, oracle, cfg, Rng(4))
        assert oracle.probes_used == 10

    def test_halfspace_anchor_fraction_at_least_half(self):
        defender = LinearSVMModel(np.array([1.0, 1.0]), -1.0)
        cfg = ApConfig(b_explore=1000)
        oracle = local_oracle(defender, budget=1000)
        rng = Rng(6)
        seeds = find_seed(oracle, rng)
        anchors = ap_explore(seeds, oracle, cfg, rng)
        assert (len(anchors) - 1) / cfg.b_explore >= 0.50

    def test_requires_legitimate_seed(self):
        with pytest.raises(ValueError, match="legitimate seed"):
            ap_explore(SeedSet(), constant_oracle(LEGITIMATE), ApConfig(), Rng(1))


class TestApExploit:
    def test_single_anchor_tiny_radius_repeats_anchor(self):
        anchor = np.array([0.3, 0.7])
        anchors = AnchorSet(anchors=[anchor], probes_spent=0)
        out = ap_exploit(anchors, ApConfig(n_attack=20, r_exploit=1e-12), Rng(7))
        assert np.allclose(out.attacks, anchor, atol=1e-9)

    def test_lambda_one_returns_first_perturbed_anchor(self):
        anchors = AnchorSet(
            anchors=[np.array([0.2, 0.2]), np.array([0.8, 0.8])], probes_spent=0
        )
        stub = StubRng(
            integers=[0, 1],
            randoms=[1.0],
            normals=[[0.1, 0.1], [-0.1, -0.1]],
        )
        cfg = ApConfig(n_attack=1, r_exploit=0.5)
        out = ap_exploit(anchors, cfg, stub)
        # attack = 1.0 * (first anchor + 0.5*noise) exactly
        assert np.allclose(out.attacks[0], [0.2 + 0.05, 0.2 + 0.05])

    def test_attacks_lie_on_segment_for_tiny_radius(self):
        anchors = AnchorSet(
            anchors=[np.array([0.0, 0.0]), np.array([1.0, 1.0])], probes_spent=0
        )
        cfg = ApConfig(n_attack=100, r_exploit=1e-12)
        out = ap_exploit(anchors, cfg, Rng(8))
        # the segment between the anchors is the x == y diagonal
        assert np.allclose(out.attacks[:, 0], out.attacks[:, 1], atol=1e-9)

    def test_consumes_no_oracle_probes(self):
        defender = LinearSVMModel(np.array([1.0, 1.0]), -1.0)
        oracle = local_oracle(defender, budget=100)
        seeds = SeedSet(legitimate=[np.array([0.1, 0.1])])
        cfg = ApConfig(b_explore=100, n_attack=50)
        rng = Rng(9)
        anchors = ap_explore(seeds, oracle, cfg, rng)
        before = oracle.probes_used
        ap_exploit(anchors, cfg, rng)
        assert oracle.probes_used == before == 100

    def test_accept_all_validator_changes_nothing(self):
        anchors = AnchorSet(
            anchors=[np.array([0.2, 0.8]), np.array([0.6, 0.4])], probes_spent=0
        )
        cfg = ApConfig(n_attack=25)
        plain = ap_exploit(anchors, cfg, Rng(10))
        validated = ap_exploit(anchors, cfg, Rng(10), validator=lambda x: LEGITIMATE)
        assert np.array_equal(plain.attacks, validated.attacks)

    def test_reject_all_validator_errors_out(self):
        anchors = AnchorSet(anchors=[np.array([0.5, 0.5])], probes_spent=0)
        cfg = ApConfig(n_attack=5)
        with pytest.raises(RuntimeError, match="rejected too many"):
            ap_exploit(anchors, cfg, Rng(11), validator=lambda x: MALICIOUS,
                       max_candidate_factor=3)

    def test_empty_anchor_set_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            ap_exploit(AnchorSet(anchors=[], probes_spent=0), ApConfig(), Rng(1))


class TestApConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            ApConfig(r_min=0.5, r_max=0.1)
        with pytest.raises(ValueError):
            ApConfig(r_min=0.0)
        with pytest.raises(ValueError):
            ApConfig(r_exploit=0.0)
        with pytest.raises(ValueError):
            ApConfig(b_explore=0)
        with pytest.raises(ValueError):
            ApConfig(n_attack=0)
