"""evasim: probing-based evasion attack simulation on binary classifiers.

The toolkit models an attacker who can only query a deployed classifier for
0/1 labels under a probe budget, and who turns those answers into evasive
test-time samples.  It bundles the attacker side (seed search, exploration,
exploitation, surrogate training), the defender side (a classifier zoo and a
prediction service), attack quality metrics, a blacklist countermeasure
simulation, and a deterministic experiment harness.
"""

from .attack_ap import (
    AnchorSet,
    ApConfig,
    AttackSet,
    SeedSearchError,
    SeedSet,
    ap_exploit,
    ap_explore,
    dynamic_radius,
    find_seed,
    perturb,
)
from .attack_re import (
    ExploreSet,
    ReConfig,
    orthonormal_probe,
    re_exploit,
    re_explore,
    surrogate_report,
)
from .core import (
    LEGITIMATE,
    MALICIOUS,
    ClassLabel,
    Dataset,
    NormalizationMap,
    apply_normalizer,
    fit_normalizer,
    load_csv,
    load_vectors_csv,
    normalize_dataset,
    save_dataset_csv,
    save_vectors_csv,
    shuffle,
)
from .countermeasure import (
    Blacklist,
    BlacklistOutcome,
    blacklist_experiment,
    build_blacklist,
    is_blocked,
    load_blacklist_csv,
    save_blacklist_csv,
)
from .harness import (
    ConfigError,
    ExperimentConfig,
    RunReport,
    cross_validated_accuracy,
    emit_report,
    emit_sweep_csv,
    load_config,
    load_dataset,
    make_synthetic,
    parse_config,
    run_experiment,
    run_single,
    run_sweep,
)
from .metrics import (
    DiversityReport,
    EffectiveAttackSet,
    deviation,
    diversity_report,
    ear,
    effective_attacks,
    knn_dist,
    mst_dist,
)
from .models import (
    Model,
    ModelSpec,
    holdout_accuracy,
    load_model,
    model_from_dict,
    predict_label,
    save_model,
    train,
)
from .oracle import (
    BudgetExhaustedError,
    ProbeLedger,
    ProbeOracle,
    RemoteClient,
    TransportError,
    local_oracle,
    remote_oracle,
    remote_predict,
)
from .rng import Rng
from .service import DefenderService, serve_defender

__version__ = "0.1.0"

__all__ = [
    "AnchorSet", "ApConfig", "AttackSet", "Blacklist", "BlacklistOutcome",
    "BudgetExhaustedError", "ClassLabel", "ConfigError", "Dataset",
    "DefenderService", "DiversityReport", "EffectiveAttackSet",
    "ExperimentConfig", "ExploreSet", "LEGITIMATE", "MALICIOUS", "Model",
    "ModelSpec", "NormalizationMap", "ProbeLedger", "ProbeOracle", "ReConfig",
    "RemoteClient", "Rng", "RunReport", "SeedSearchError", "SeedSet",
    "TransportError", "ap_exploit", "ap_explore", "apply_normalizer",
    "blacklist_experiment", "build_blacklist", "cross_validated_accuracy",
    "deviation", "diversity_report", "dynamic_radius", "ear",
    "effective_attacks", "emit_report", "emit_sweep_csv", "find_seed",
    "fit_normalizer", "holdout_accuracy", "is_blocked", "knn_dist",
    "load_blacklist_csv", "load_config", "load_csv", "load_dataset",
    "load_model", "load_vectors_csv", "local_oracle", "make_synthetic",
    "model_from_dict", "mst_dist", "normalize_dataset", "orthonormal_probe",
    "parse_config", "perturb", "predict_label", "re_exploit", "re_explore",
    "remote_oracle", "remote_predict", "run_experiment", "run_single",
    "run_sweep", "save_blacklist_csv", "save_dataset_csv", "save_model",
    "save_vectors_csv", "serve_defender", "shuffle", "surrogate_report",
    "train",
]
