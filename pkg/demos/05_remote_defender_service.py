"""Probing a defender over HTTP, exactly like a prediction-API scenario.

Trains a model, saves it to JSON, serves it on loopback, and runs the same
attack through the remote adapter.  The wire protocol returns labels and
nothing else; with a per-key budget the service answers 429 once a client
key is spent.

Run:  python demos/05_remote_defender_service.py
"""

import numpy as np

from evasim import (
    ApConfig,
    BudgetExhaustedError,
    ModelSpec,
    RemoteClient,
    ap_exploit,
    ap_explore,
    diversity_report,
    effective_attacks,
    find_seed,
    load_model,
    local_oracle,
    make_synthetic,
    remote_oracle,
    save_model,
    serve_defender,
    shuffle,
    train,
)
from evasim.rng import Rng

rng = Rng(512)
data = make_synthetic(
    {"generator": "blobs", "n": 400, "d": 2, "separation": 6.0},
    rng.derive("dataset"),
)
data = shuffle(data, rng.derive("shuffle"))
defender = train(ModelSpec(kind="linear_svm", c=1.0, train_seed=11), data)

save_model(defender, "defender.json")
service = serve_defender(load_model("defender.json"))
print(f"defender service answering on {service.url}")
print(f"health check: {RemoteClient(service.url).health()}")

cfg = ApConfig(b_explore=500, n_attack=1000)

# same seeds, one attack through each adapter
results = {}
for label, oracle in (
    ("in-process", local_oracle(defender, budget=cfg.b_explore)),
    ("over HTTP", remote_oracle(service.url, d=data.d, budget=cfg.b_explore)),
):
    attack_rng = rng.derive("attack")  # fresh copy of the same stream
    seeds = find_seed(oracle, attack_rng)
    anchors = ap_explore(seeds, oracle, cfg, attack_rng)
    attacks = ap_exploit(anchors, cfg, attack_rng)
    report = diversity_report(effective_attacks(defender, attacks))
    results[label] = report
    print(f"{label:>11}: EAR {report.ear:.3f} with {oracle.probes_used} probes")

print(f"adapters agree exactly: "
      f"{results['in-process'] == results['over HTTP']}")
service.stop()

# a budgeted service cuts a client off with 429
budgeted = serve_defender(defender, budget_per_key=3)
client = RemoteClient(budgeted.url, api_key="cheapskate")
probe = np.full(2, 0.4)
for i in range(3):
    client.predict(probe)
try:
    client.predict(probe)
except BudgetExhaustedError as err:
    print(f"4th probe for the same key: {err}")
budgeted.stop()
print("wrote defender.json")
