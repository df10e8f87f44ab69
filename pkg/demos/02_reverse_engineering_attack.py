"""Reverse engineering attack, and how it compares to anchor points.

The attacker spends the same 1000-probe budget, but instead of hoarding
accepted samples it probes near the midpoint of legitimate/malicious pairs
(offset orthogonally to the pair difference), keeping both answers.  The
labeled probes train a linear surrogate of the defender, and exploitation
runs entirely against that surrogate - free probes, larger radius, every
candidate validated before it joins the attack set.

Run:  python demos/02_reverse_engineering_attack.py
"""

from evasim import (
    ApConfig,
    ModelSpec,
    ReConfig,
    ap_exploit,
    ap_explore,
    diversity_report,
    effective_attacks,
    find_seed,
    local_oracle,
    make_synthetic,
    re_exploit,
    re_explore,
    save_model,
    shuffle,
    surrogate_report,
    train,
)
from evasim.rng import Rng

rng = Rng(2024)
data = make_synthetic(
    {"generator": "blobs", "n": 400, "d": 8, "separation": 6.0},
    rng.derive("dataset"),
)
data = shuffle(data, rng.derive("shuffle"))
defender = train(ModelSpec(kind="linear_svm", c=1.0, train_seed=7), data)

# -- reverse engineering ---------------------------------------------------
re_cfg = ReConfig(b_explore=1000, n_attack=2000, lambda_max=0.25,
                  r_exploit=0.5, surrogate_c=10.0)
oracle = local_oracle(defender, budget=re_cfg.b_explore)
re_rng = rng.derive("re")
seeds = find_seed(oracle, re_rng, need_malicious=True)
print(f"seed phase: {seeds.seed_probe_count} probes for one legitimate and "
      f"one malicious sample")

explore, surrogate = re_explore(seeds, oracle, re_cfg, re_rng)
print(f"explore phase: {oracle.probes_used} boundary probes -> "
      f"{len(explore.legitimate)} legitimate / {len(explore.malicious)} "
      f"malicious pool samples")
print(f"surrogate accuracy on the defender's own data: "
      f"{surrogate_report(surrogate, data):.3f} (experimenter diagnostic)")

re_attacks = re_exploit(explore, surrogate, re_cfg, re_rng)
print(f"exploit phase: {len(re_attacks)} attacks via the surrogate; "
      f"true-defender probe count still {oracle.probes_used}")
re_report = diversity_report(effective_attacks(defender, re_attacks))

# -- anchor points on the same defender, for comparison --------------------
ap_cfg = ApConfig(b_explore=1000, n_attack=2000, r_exploit=0.1)
oracle = local_oracle(defender, budget=ap_cfg.b_explore)
ap_rng = rng.derive("ap")
anchors = ap_explore(find_seed(oracle, ap_rng), oracle, ap_cfg, ap_rng)
ap_attacks = ap_exploit(anchors, ap_cfg, ap_rng)
ap_report = diversity_report(effective_attacks(defender, ap_attacks))

print("\n              EAR     sigma   knn-dist  mst-dist")
for name, rep in (("anchor pts", ap_report), ("reverse eng", re_report)):
    print(f"{name:>11}  {rep.ear:.3f}   {rep.sigma:.3f}   {rep.knn_dist:.4f}"
          f"    {rep.mst_dist:.4f}")
print("\nreverse engineering trades a little accuracy for clearly higher "
      "diversity\non all three metrics (visible at d=8; in 2-D the spacing "
      "metrics saturate).")

save_model(surrogate, "surrogate.json")
print("wrote surrogate.json")
