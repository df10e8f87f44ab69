"""Experiment runner: configuration, repeated seeded runs, parameter sweeps,
and report emission.

A run report is fully determined by (config, master_seed): the dataset
stream, each run's shuffle, the defender's training seed, and every attack
draw derive from the master seed, so reports are byte-reproducible.  Reports
carry no timestamps.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .attack_ap import (
    ApConfig,
    SeedSearchError,
    ap_exploit,
    ap_explore,
    find_seed,
)
from .attack_re import ReConfig, re_explore, re_exploit, surrogate_report
from .core import (
    Dataset,
    LEGITIMATE,
    fit_normalizer,
    load_csv,
    normalize_dataset,
    shuffle,
)
from .countermeasure import blacklist_experiment
from .metrics import DEFAULT_K, diversity_report, effective_attacks
from .models import ModelSpec, holdout_accuracy, train
from .oracle import ProbeOracle, local_oracle, remote_oracle
from .rng import Rng
from .service import serve_defender

SWEEP_PARAMS = ("R_Exploit", "B_Explore", "epsilon")


class ConfigError(Exception):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class BlacklistConfig:
    epsilon: float = 0.1
    n_attack_new: int | None = None
    report_false_positives: bool = False

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ConfigError("blacklist epsilon must be positive")
        if self.n_attack_new is not None and self.n_attack_new < 1:
            raise ConfigError("n_attack_new must be >= 1")


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: dict
    defender: ModelSpec
    attack: str = "ap"
    ap: ApConfig = ApConfig()
    re: ReConfig = ReConfig()
    runs: int = 30
    master_seed: int = 0
    workers: int = 1
    metrics_k: int = DEFAULT_K
    report_defender_accuracy: bool = False
    cv_folds: int = 5
    blacklist: BlacklistConfig | None = None
    sweep: dict | None = None
    oracle_mode: str = "local"

    def __post_init__(self):
        if self.attack not in ("ap", "re"):
            raise ConfigError(f"attack must be 'ap' or 're', not {self.attack!r}")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.metrics_k < 1:
            raise ConfigError("metrics k must be >= 1")
        if self.cv_folds < 2:
            raise ConfigError("cv_folds must be >= 2")
        if self.oracle_mode not in ("local", "http"):
            raise ConfigError("oracle mode must be 'local' or 'http'")
        if self.oracle_mode == "http" and self.workers > 1:
            raise ConfigError("http oracle mode requires workers == 1")
        if self.sweep is not None:
            param = self.sweep.get("param")
            values = self.sweep.get("values")
            if param not in SWEEP_PARAMS:
                raise ConfigError(f"sweep param must be one of {SWEEP_PARAMS}")
            if not values:
                raise ConfigError("sweep values must be a non-empty list")
            if param == "epsilon" and self.blacklist is None:
                raise ConfigError("epsilon sweep requires a blacklist section")

    @property
    def attack_config(self):
        return self.ap if self.attack == "ap" else self.re

    def to_dict(self) -> dict:
        defender = {
            "kind": self.defender.kind,
            "c": self.defender.c,
            "k": self.defender.k,
            "gamma": self.defender.gamma,
            "max_depth": self.defender.max_depth,
            "min_leaf": self.defender.min_leaf,
            "n_trees": self.defender.n_trees,
            "feature_fraction": self.defender.feature_fraction,
            "bootstrap": self.defender.bootstrap,
            "epochs": self.defender.epochs,
        }
        doc = {
            "dataset": self.dataset,
            "defender": defender,
            "attack": self.attack,
            "ap": vars(self.ap).copy(),
            "re": vars(self.re).copy(),
            "runs": self.runs,
            "master_seed": self.master_seed,
            "workers": self.workers,
            "metrics_k": self.metrics_k,
            "report_defender_accuracy": self.report_defender_accuracy,
            "cv_folds": self.cv_folds,
            "oracle": {"mode": self.oracle_mode},
        }
        if self.blacklist is not None:
            doc["blacklist"] = {
                "epsilon": self.blacklist.epsilon,
                "n_attack_new": self.blacklist.n_attack_new,
                "report_false_positives": self.blacklist.report_false_positives,
            }
        if self.sweep is not None:
            doc["sweep"] = self.sweep
        return doc


def _build(cls, doc: dict, section: str):
    try:
        return cls(**doc)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"invalid {section} section: {err}") from None


def parse_config(doc: dict) -> ExperimentConfig:
    """Build a validated ExperimentConfig from a plain JSON-style dict."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - {
        "dataset", "defender", "attack", "ap", "re", "runs", "master_seed",
        "workers", "metrics_k", "report_defender_accuracy", "cv_folds",
        "blacklist", "sweep", "oracle",
    }
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    dataset = doc.get("dataset")
    if not isinstance(dataset, dict) or not ({"csv", "synthetic"} & set(dataset)):
        raise ConfigError("dataset section must contain 'csv' or 'synthetic'")
    defender_doc = dict(doc.get("defender") or {})
    if "kind" not in defender_doc:
        raise ConfigError("defender section needs a 'kind'")
    defender = _build(ModelSpec, defender_doc, "defender")
    blacklist_doc = doc.get("blacklist")
    blacklist = (
        _build(BlacklistConfig, dict(blacklist_doc), "blacklist")
        if blacklist_doc is not None
        else None
    )
    oracle_doc = dict(doc.get("oracle") or {})
    oracle_mode = oracle_doc.get("mode", "local")
    try:
        return ExperimentConfig(
            dataset=dataset,
            defender=defender,
            attack=doc.get("attack", "ap"),
            ap=_build(ApConfig, dict(doc.get("ap") or {}), "ap"),
            re=_build(ReConfig, dict(doc.get("re") or {}), "re"),
            runs=doc.get("runs", 30),
            master_seed=doc.get("master_seed", 0),
            workers=doc.get("workers", 1),
            metrics_k=doc.get("metrics_k", DEFAULT_K),
            report_defender_accuracy=doc.get("report_defender_accuracy", False),
            cv_folds=doc.get("cv_folds", 5),
            blacklist=blacklist,
            sweep=doc.get("sweep"),
            oracle_mode=oracle_mode,
        )
    except TypeError as err:
        raise ConfigError(str(err)) from None


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"config file is not valid JSON: {err}") from None
    return parse_config(doc)


# ---------------------------------------------------------------------------
# datasets
# ---------------------------------------------------------------------------


def make_synthetic(spec: dict, rng: Rng) -> Dataset:
    """Labeled synthetic dataset, normalized to [0,1]^d.

    Generators:
      blobs  - two Gaussian blobs (unit sigma) with centers ``separation``
               apart in d dimensions; low blob legitimate, high malicious.
      moons  - two interleaving half-circles in 2-D with Gaussian noise.
    """
    spec = dict(spec)
    generator = spec.pop("generator", None)
    aliases = {"two-gaussian-blobs": "blobs", "two-moons-like": "moons"}
    generator = aliases.get(generator, generator)
    n = int(spec.pop("n", 400))
    if n < 4:
        raise ConfigError("synthetic datasets need n >= 4")
    if generator == "blobs":
        d = int(spec.pop("d", 2))
        separation = float(spec.pop("separation", 6.0))
        if spec:
            raise ConfigError(f"unknown blobs parameters: {sorted(spec)}")
        if d < 1 or separation <= 0:
            raise ConfigError("blobs needs d >= 1 and separation > 0")
        n_legit = n // 2
        noise = rng.normal(n * d).reshape(n, d)
        offset = separation / np.sqrt(d)
        samples = noise.copy()
        samples[n_legit:] += offset
        labels = np.concatenate(
            [np.zeros(n_legit, dtype=np.int64), np.ones(n - n_legit, dtype=np.int64)]
        )
    elif generator == "moons":
        noise_scale = float(spec.pop("noise", 0.15))
        if spec:
            raise ConfigError(f"unknown moons parameters: {sorted(spec)}")
        n_legit = n // 2
        t_out = rng.random(n_legit) * np.pi
        t_in = rng.random(n - n_legit) * np.pi
        outer = np.column_stack([np.cos(t_out), np.sin(t_out)])
        inner = np.column_stack([1.0 - np.cos(t_in), 0.5 - np.sin(t_in)])
        samples = np.vstack([outer, inner])
        samples += noise_scale * rng.normal(samples.size).reshape(samples.shape)
        labels = np.concatenate(
            [np.zeros(n_legit, dtype=np.int64), np.ones(n - n_legit, dtype=np.int64)]
        )
    else:
        raise ConfigError(f"unknown synthetic generator {generator!r}")
    raw = Dataset(samples, labels)
    return normalize_dataset(fit_normalizer(raw), raw)


def load_dataset(cfg: ExperimentConfig) -> Dataset:
    """Materialize the configured dataset, normalized to [0,1]^d.

    Normalization statistics come from the full dataset (shared feature-space
    assumption: attacker and defender see the same advertised ranges).
    """
    if "synthetic" in cfg.dataset:
        return make_synthetic(
            cfg.dataset["synthetic"], Rng(cfg.master_seed).derive("dataset")
        )
    csv_doc = dict(cfg.dataset["csv"])
    try:
        raw = load_csv(
            csv_doc["path"],
            csv_doc["label_column"],
            csv_doc["positive_label"],
            categorical_columns=csv_doc.get("categorical_columns", ()),
        )
    except KeyError as err:
        raise ConfigError(f"csv dataset section missing {err}") from None
    except (FileNotFoundError, ValueError) as err:
        raise ConfigError(str(err)) from None
    return normalize_dataset(fit_normalizer(raw), raw)


def cross_validated_accuracy(
    spec: ModelSpec, data: Dataset, folds: int = 5, rng: Rng | None = None
) -> float:
    """Stratified f-fold cross-validation accuracy of a model spec."""
    if rng is None:
        rng = Rng(spec.train_seed).derive("cv")
    assignment = np.empty(data.n, dtype=np.int64)
    for cls in (0, 1):
        idx = np.flatnonzero(data.labels == cls)
        idx = idx[rng.permutation(idx.size)]
        assignment[idx] = np.arange(idx.size) % folds
    accuracies = []
    for f in range(folds):
        held = assignment == f
        train_data = Dataset(
            data.samples[~held], data.labels[~held], data.feature_names
        )
        test_data = Dataset(
            data.samples[held], data.labels[held], data.feature_names
        )
        model = train(replace(spec, train_seed=rng.u64()), train_data)
        accuracies.append(holdout_accuracy(model, test_data))
    return float(np.mean(accuracies))


# ---------------------------------------------------------------------------
# runs
# ---------------------------------------------------------------------------


def run_single(
    dataset: Dataset,
    cfg: ExperimentConfig,
    run_index: int,
    oracle_factory=None,
) -> dict:
    """One seeded attack run; returns the per-run report row."""
    rng = Rng(cfg.master_seed).derive("run", run_index)
    data = shuffle(dataset, rng)
    defender_spec = replace(cfg.defender, train_seed=rng.u64())
    defender = train(defender_spec, data)
    attack_cfg = cfg.attack_config
    if oracle_factory is None:
        oracle: ProbeOracle = local_oracle(defender, budget=attack_cfg.b_explore)
    else:
        oracle = oracle_factory(defender, run_index, attack_cfg.b_explore)
    try:
        seeds = find_seed(
            oracle,
            rng,
            need_malicious=(cfg.attack == "re"),
            max_seed_probes=cfg.ap.max_seed_probes,
        )
    except SeedSearchError as err:
        raise SeedSearchError(f"run {run_index}: {err}") from None

    surrogate_accuracy = None
    if cfg.attack == "ap":
        anchors = ap_explore(seeds, oracle, cfg.ap, rng)
        attacks = ap_exploit(anchors, cfg.ap, rng)
        attacker_state = anchors
        explored_size = len(anchors)
    else:
        explore, surrogate = re_explore(seeds, oracle, cfg.re, rng)
        attacks = re_exploit(explore, surrogate, cfg.re, rng)
        attacker_state = (explore, surrogate)
        explored_size = explore.size
        surrogate_accuracy = surrogate_report(surrogate, dataset)

    ea = effective_attacks(defender, attacks)
    report = diversity_report(ea, k=cfg.metrics_k)
    row = {
        "run_index": run_index,
        "ear": report.ear,
        "sigma": report.sigma,
        "knn_dist": report.knn_dist,
        "mst_dist": report.mst_dist,
        "k_used": report.k_used,
        "effective_count": ea.size,
        "seed_probes": oracle.seed_probes_used,
        "explored_size": explored_size,
    }
    if surrogate_accuracy is not None:
        row["surrogate_accuracy"] = surrogate_accuracy
    if cfg.report_defender_accuracy:
        row["defender_cv_accuracy"] = cross_validated_accuracy(
            defender_spec, data, folds=cfg.cv_folds, rng=rng.derive("cv")
        )
    if cfg.blacklist is not None:
        reference = None
        if cfg.blacklist.report_false_positives:
            reference = dataset.samples[dataset.labels == LEGITIMATE]
        outcome = blacklist_experiment(
            attacker_state,
            defender,
            attack_cfg,
            cfg.blacklist.epsilon,
            rng,
            n_attack_new=cfg.blacklist.n_attack_new,
            first_wave=attacks,
            legitimate_reference=reference,
        )
        row["bl_stopped_fraction"] = outcome.stopped_fraction
        row["bl_second_wave_ea_count"] = outcome.second_wave_ea_count
        row["bl_stopped_count"] = outcome.stopped_count
        if outcome.false_positive_fraction is not None:
            row["bl_false_positive_fraction"] = outcome.false_positive_fraction
    # recorded last: any stray exploitation probe against the true oracle
    # would show up here as explore_probes != b_explore
    row["explore_probes"] = oracle.probes_used
    return row


@dataclass(frozen=True)
class RunReport:
    """Per-run rows plus mean/std aggregates, JSON/CSV serializable."""

    config: dict
    runs: list
    aggregate: dict

    def to_json(self) -> str:
        return json.dumps(
            {"config": self.config, "runs": self.runs, "aggregate": self.aggregate},
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        doc = json.loads(text)
        return cls(config=doc["config"], runs=doc["runs"],
                   aggregate=doc["aggregate"])

    def mean(self, key: str) -> float:
        return self.aggregate[key]["mean"]

    def std(self, key: str) -> float:
        return self.aggregate[key]["std"]

    def column_order(self) -> list[str]:
        order: list[str] = []
        for row in self.runs:
            for key in row:
                if key not in order:
                    order.append(key)
        return order


def aggregate_rows(rows: list[dict]) -> dict:
    """Mean and sample standard deviation of every numeric per-run field."""
    aggregate: dict[str, dict[str, float]] = {}
    keys: list[str] = []
    for row in rows:
        for key in row:
            if key != "run_index" and key not in keys:
                keys.append(key)
    for key in keys:
        values = [row[key] for row in rows if key in row]
        arr = np.asarray(values, dtype=np.float64)
        std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
        aggregate[key] = {"mean": float(arr.mean()), "std": std}
    return aggregate


def _run_task(payload) -> dict:
    dataset, cfg, run_index = payload
    return run_single(dataset, cfg, run_index)


class _LoopbackFactory:
    """Serves each run's defender over loopback HTTP and probes it remotely."""

    def __init__(self):
        self.service = None

    def __call__(self, model, run_index, budget):
        if self.service is None:
            self.service = serve_defender(model)
        else:
            self.service.set_model(model)
        return remote_oracle(self.service.url, model.d, budget=budget)

    def close(self):
        if self.service is not None:
            self.service.stop()
            self.service = None


def run_experiment(
    cfg: ExperimentConfig,
    dataset: Dataset | None = None,
    oracle_factory=None,
) -> RunReport:
    """Execute cfg.runs seeded attack runs and aggregate the results.

    ``oracle_factory(model, run_index, budget)`` overrides how the trained
    defender is wrapped for probing; the default is an in-process oracle, and
    oracle mode "http" routes probes through a loopback defender service.
    """
    if dataset is None:
        dataset = load_dataset(cfg)
    loopback = None
    if oracle_factory is None and cfg.oracle_mode == "http":
        loopback = _LoopbackFactory()
        oracle_factory = loopback
    try:
        if cfg.workers > 1 and oracle_factory is None:
            tasks = [(dataset, cfg, r) for r in range(cfg.runs)]
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                rows = list(pool.map(_run_task, tasks))
        else:
            rows = [
                run_single(dataset, cfg, r, oracle_factory=oracle_factory)
                for r in range(cfg.runs)
            ]
    finally:
        if loopback is not None:
            loopback.close()
    rows.sort(key=lambda row: row["run_index"])
    return RunReport(
        config=cfg.to_dict(), runs=rows, aggregate=aggregate_rows(rows)
    )


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


def apply_sweep_value(cfg: ExperimentConfig, param: str, value) -> ExperimentConfig:
    if param == "R_Exploit":
        if cfg.attack == "ap":
            return replace(cfg, ap=replace(cfg.ap, r_exploit=float(value)), sweep=None)
        return replace(cfg, re=replace(cfg.re, r_exploit=float(value)), sweep=None)
    if param == "B_Explore":
        if cfg.attack == "ap":
            return replace(cfg, ap=replace(cfg.ap, b_explore=int(value)), sweep=None)
        return replace(cfg, re=replace(cfg.re, b_explore=int(value)), sweep=None)
    if param == "epsilon":
        if cfg.blacklist is None:
            raise ConfigError("epsilon sweep requires a blacklist section")
        return replace(
            cfg, blacklist=replace(cfg.blacklist, epsilon=float(value)), sweep=None
        )
    raise ConfigError(f"sweep param must be one of {SWEEP_PARAMS}")


def run_sweep(
    cfg: ExperimentConfig, dataset: Dataset | None = None
) -> list[tuple[float, RunReport]]:
    """One full experiment per sweep value over a shared dataset and seeds."""
    if cfg.sweep is None:
        raise ConfigError("config has no sweep section")
    param = cfg.sweep["param"]
    values = cfg.sweep["values"]
    if dataset is None:
        dataset = load_dataset(cfg)
    results = []
    for value in values:
        value_cfg = apply_sweep_value(cfg, param, value)
        results.append((float(value), run_experiment(value_cfg, dataset=dataset)))
    return results


SWEEP_CSV_FIELDS = ("ear", "sigma", "knn_dist", "mst_dist")


def emit_sweep_csv(results: list[tuple[float, RunReport]], path: str | Path) -> None:
    """Plot-ready table: one row per sweep value with metric means and stds."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["value"]
        for field_name in SWEEP_CSV_FIELDS:
            header += [f"{field_name}_mean", f"{field_name}_std"]
        writer.writerow(header)
        for value, report in results:
            row = [repr(float(value))]
            for field_name in SWEEP_CSV_FIELDS:
                row += [
                    repr(report.mean(field_name)),
                    repr(report.std(field_name)),
                ]
            writer.writerow(row)


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------


def emit_report(report: RunReport, format: str, path: str | Path) -> None:
    """Write a report as JSON (round-trippable) or CSV (rows + mean/std)."""
    path = Path(path)
    if format == "json":
        path.write_text(report.to_json())
        return
    if format != "csv":
        raise ValueError(f"unknown report format {format!r}")
    columns = report.column_order()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in report.runs:
            writer.writerow([_cell(row.get(col)) for col in columns])
        for stat in ("mean", "std"):
            writer.writerow(
                [
                    stat if col == "run_index"
                    else _cell(report.aggregate.get(col, {}).get(stat))
                    for col in columns
                ]
            )


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)
