"""Anchor points attack, end to end.

Trains a linear defender on synthetic two-blob data, then plays the
attacker: find a legitimate seed by random probing, spend the probe budget
growing oracle-confirmed anchors, and generate attack samples offline by
perturbing and mixing anchors.  The defender's own view of the attacks is
evaluated last, with the experimenter's privileged handle.

Run:  python demos/01_anchor_points_attack.py
"""

import numpy as np

from evasim import (
    ApConfig,
    ModelSpec,
    ap_exploit,
    ap_explore,
    diversity_report,
    effective_attacks,
    find_seed,
    holdout_accuracy,
    local_oracle,
    make_synthetic,
    save_vectors_csv,
    shuffle,
    train,
)
from evasim.rng import Rng

rng = Rng(2024)

# -- the defender's side ------------------------------------------------
data = make_synthetic(
    {"generator": "blobs", "n": 400, "d": 2, "separation": 6.0},
    rng.derive("dataset"),
)
data = shuffle(data, rng.derive("shuffle"))
defender = train(ModelSpec(kind="linear_svm", c=1.0, train_seed=7), data)
print(f"defender: linear SVM, training accuracy "
      f"{holdout_accuracy(defender, data):.3f} on {data.n} samples, d={data.d}")

# -- the attacker's side: only 0/1 answers, budget of 1000 probes --------
cfg = ApConfig(b_explore=1000, n_attack=2000, r_min=0.1, r_max=0.5,
               r_exploit=0.1)
oracle = local_oracle(defender, budget=cfg.b_explore)
attacker_rng = rng.derive("attack")

seeds = find_seed(oracle, attacker_rng)
print(f"seed phase: {seeds.seed_probe_count} random probes to find a "
      f"legitimate sample")

anchors = ap_explore(seeds, oracle, cfg, attacker_rng)
print(f"explore phase: {oracle.probes_used} probes spent, "
      f"{len(anchors) - 1} anchors confirmed "
      f"({(len(anchors) - 1) / cfg.b_explore:.0%} acceptance)")

attacks = ap_exploit(anchors, cfg, attacker_rng)
print(f"exploit phase: {len(attacks)} attack samples generated, "
      f"{oracle.probes_used} probes on the ledger (unchanged: exploitation "
      f"is offline)")

# -- the experimenter's measurement --------------------------------------
ea = effective_attacks(defender, attacks)
report = diversity_report(ea)
print(f"\neffective attack rate: {report.ear:.3f} "
      f"({ea.size} of {len(attacks)} attacks pass as legitimate)")
print(f"diversity: sigma {report.sigma:.3f}, knn-dist {report.knn_dist:.4f}, "
      f"mst-dist {report.mst_dist:.4f}")

save_vectors_csv("ap_attacks.csv", attacks.attacks)
save_vectors_csv("ap_anchors.csv", anchors.as_array())
print("\nwrote ap_attacks.csv and ap_anchors.csv")
