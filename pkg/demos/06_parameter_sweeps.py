"""How the attack knobs move accuracy and diversity.

Two sweeps on a non-linearly-separable (moons) dataset with a linear
defender, averaged over seeded runs:

* widening the anchor-points exploitation radius buys diversity but bleeds
  accuracy (attacks stray from confirmed ground truth);
* giving reverse engineering a bigger probe budget buys accuracy, which
  plateaus once the surrogate stops improving.

Writes plot-ready CSVs.  Run:  python demos/06_parameter_sweeps.py
(takes a minute or two; lower "runs" for a quick look)
"""

from evasim import emit_sweep_csv, parse_config, run_sweep

RUNS = 10

ap_sweep = {
    "dataset": {"synthetic": {"generator": "moons", "n": 400, "noise": 0.15}},
    "defender": {"kind": "linear_svm", "c": 1.0},
    "attack": "ap",
    "runs": RUNS,
    "master_seed": 640,
    "sweep": {"param": "R_Exploit", "values": [0.1, 0.3, 0.5, 0.7, 0.9]},
}
print(f"anchor points, exploitation radius sweep ({RUNS} runs per value)")
print("radius   EAR     knn-dist  mst-dist")
ap_results = run_sweep(parse_config(ap_sweep))
for value, report in ap_results:
    print(f"  {value:.1f}   {report.mean('ear'):.3f}   "
          f"{report.mean('knn_dist'):.4f}    {report.mean('mst_dist'):.4f}")
emit_sweep_csv(ap_results, "sweep_radius.csv")

re_sweep = {
    "dataset": {"synthetic": {"generator": "moons", "n": 400, "noise": 0.15}},
    "defender": {"kind": "linear_svm", "c": 1.0},
    "attack": "re",
    "runs": RUNS,
    "master_seed": 640,
    "sweep": {"param": "B_Explore", "values": [250, 500, 1000, 2000]},
}
print(f"\nreverse engineering, probe budget sweep ({RUNS} runs per value)")
print("budget   EAR     surrogate accuracy")
re_results = run_sweep(parse_config(re_sweep))
for value, report in re_results:
    print(f"  {value:>4.0f}   {report.mean('ear'):.3f}   "
          f"{report.mean('surrogate_accuracy'):.3f}")
emit_sweep_csv(re_results, "sweep_budget.csv")

print("\nwrote sweep_radius.csv and sweep_budget.csv")
