"""Blacklisting a first attack wave, then measuring what it stops.

The defender records every sample of an attack campaign and blocks any
future sample within epsilon*sqrt(d) of a recorded one (approximate
matching).  The attacker, unaware, keeps generating from its existing state.
Anchor-point attacks cluster near their anchors and get caught; reverse
engineering attacks spread over the whole surrogate-legitimate region and
mostly slip through - that is what diversity buys.

Uses 16-dimensional data: in low dimension 2000 stored samples blanket the
space and the comparison degenerates (everything is stopped).

Run:  python demos/04_blacklist_countermeasure.py
"""

from evasim import (
    ApConfig,
    ModelSpec,
    ReConfig,
    ap_explore,
    blacklist_experiment,
    find_seed,
    local_oracle,
    make_synthetic,
    re_explore,
    shuffle,
    train,
)
from evasim.rng import Rng

rng = Rng(31)
data = make_synthetic(
    {"generator": "blobs", "n": 400, "d": 16, "separation": 6.0},
    rng.derive("dataset"),
)
data = shuffle(data, rng.derive("shuffle"))
defender = train(ModelSpec(kind="linear_svm", c=1.0, train_seed=3), data)
legit_reference = data.samples[data.labels == 0]

# attacker states, built once and reused for every epsilon
ap_cfg = ApConfig()
oracle = local_oracle(defender, budget=ap_cfg.b_explore)
ap_rng = rng.derive("ap")
anchors = ap_explore(find_seed(oracle, ap_rng), oracle, ap_cfg, ap_rng)

re_cfg = ReConfig()
oracle = local_oracle(defender, budget=re_cfg.b_explore)
re_rng = rng.derive("re")
explore, surrogate = re_explore(
    find_seed(oracle, re_rng, need_malicious=True), oracle, re_cfg, re_rng
)

print("epsilon   stopped(AP)   stopped(RE)   false-positive rate(AP list)")
for eps in (0.05, 0.10, 0.13, 0.16, 0.20):
    ap_out = blacklist_experiment(
        anchors, defender, ap_cfg, eps, rng.derive("bl-ap", int(eps * 100)),
        n_attack_new=2000, legitimate_reference=legit_reference,
    )
    re_out = blacklist_experiment(
        (explore, surrogate), defender, re_cfg, eps,
        rng.derive("bl-re", int(eps * 100)), n_attack_new=2000,
    )
    print(f"  {eps:.2f}      {ap_out.stopped_fraction:>6.1%}        "
          f"{re_out.stopped_fraction:>6.1%}          "
          f"{ap_out.false_positive_fraction:.1%}")

print(
    "\nraising epsilon stops more attacks but starts flagging genuinely"
    "\nlegitimate traffic; the diverse strategy stays near-immune in the"
    "\nuseful range."
)
