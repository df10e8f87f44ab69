"""Reverse engineering attack: boundary-seeking exploration, a linear
surrogate of the defender, and surrogate-validated exploitation.

Exploration probes near the midpoint of a random legitimate/malicious pair,
offset along a random direction orthogonal to the pair difference
(Gram-Schmidt step).  Labeled probes accumulate into two pools that train a
linear surrogate.  Exploitation then runs the anchor-points procedure against
the surrogate - free probes - so not a single exploitation query reaches the
true defender.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .attack_ap import AnchorSet, ApConfig, AttackSet, SeedSet, ap_explore, ap_exploit
from .core import LEGITIMATE, Dataset
from .models import LinearSVMModel, ModelSpec, holdout_accuracy, train
from .oracle import ProbeOracle
from .rng import Rng

_MAX_PAIR_RETRIES = 100
_MAX_DIRECTION_RETRIES = 100


@dataclass(frozen=True)
class ReConfig:
    """Reverse-engineering attack parameters (defaults are the standard protocol).

    ``b_surrogate`` is the free probe count against the surrogate during
    exploitation; ``r_min``/``r_max`` drive that surrogate-side exploration.
    """

    b_explore: int = 1000
    n_attack: int = 2000
    lambda_max: float = 0.25
    r_exploit: float = 0.5
    surrogate_c: float = 10.0
    b_surrogate: int = 5000
    r_min: float = 0.1
    r_max: float = 0.5

    def __post_init__(self):
        if self.lambda_max <= 0:
            raise ValueError("lambda_max must be positive")
        if self.r_exploit <= 0 or not 0 < self.r_min <= self.r_max:
            raise ValueError("invalid exploitation/exploration radii")
        if self.surrogate_c <= 0:
            raise ValueError("surrogate_c must be positive")
        if self.b_explore < 0:
            raise ValueError("b_explore must be >= 0")
        if self.n_attack < 1 or self.b_surrogate < 1:
            raise ValueError("n_attack and b_surrogate must be >= 1")


@dataclass
class ExploreSet:
    """Disjoint pools of oracle-labeled probes, one per class."""

    legitimate: list = field(default_factory=list)
    malicious: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.legitimate) + len(self.malicious)

    def as_dataset(self) -> Dataset:
        samples = np.asarray(self.legitimate + self.malicious, dtype=np.float64)
        labels = np.concatenate(
            [
                np.zeros(len(self.legitimate), dtype=np.int64),
                np.ones(len(self.malicious), dtype=np.int64),
            ]
        )
        return Dataset(samples, labels)


def orthonormal_probe(
    x_l: np.ndarray, x_m: np.ndarray, lambda_max: float, rng: Rng
) -> np.ndarray:
    """Point near the pair midpoint, offset orthogonally to (x_l - x_m).

    Draw an isotropic Gaussian direction, remove its component along the pair
    difference, rescale it to a random magnitude in [0, lambda_max], and add
    the midpoint.  Directions that project to (near) zero are redrawn.
    """
    x_l = np.asarray(x_l, dtype=np.float64)
    x_m = np.asarray(x_m, dtype=np.float64)
    x0 = x_l - x_m
    denom = float(x0 @ x0)
    if denom == 0.0:
        raise ValueError("x_l and x_m must differ")
    for _ in range(_MAX_DIRECTION_RETRIES):
        x_r = rng.normal(x0.shape[0])
        x_r = x_r - ((x_r @ x0) / denom) * x0
        norm = float(np.sqrt(x_r @ x_r))
        if norm > 1e-12:
            magnitude = rng.uniform(0.0, lambda_max)
            return (magnitude / norm) * x_r + 0.5 * (x_l + x_m)
    raise RuntimeError(
        "no non-degenerate orthogonal direction found "
        f"in {_MAX_DIRECTION_RETRIES} draws (is d == 1?)"
    )


def _pick_pair(explore: ExploreSet, rng: Rng) -> tuple[np.ndarray, np.ndarray]:
    for _ in range(_MAX_PAIR_RETRIES):
        x_l = explore.legitimate[rng.integers(len(explore.legitimate))]
        x_m = explore.malicious[rng.integers(len(explore.malicious))]
        if not np.array_equal(x_l, x_m):
            return x_l, x_m
    raise RuntimeError(
        f"could not draw a distinct legitimate/malicious pair "
        f"in {_MAX_PAIR_RETRIES} attempts"
    )


def re_explore(
    seed: SeedSet, oracle: ProbeOracle, cfg: ReConfig, rng: Rng
) -> tuple[ExploreSet, LinearSVMModel]:
    """Spend cfg.b_explore probes along the decision boundary, then fit the
    surrogate.

    Probes are clipped to [0,1] before querying so every submitted sample is
    a valid input.  The surrogate is a linear SVM trained on both pools.
    """
    if not seed.legitimate or not seed.malicious:
        raise ValueError("need one legitimate and one malicious seed sample")
    explore = ExploreSet(
        legitimate=[np.asarray(s, dtype=np.float64) for s in seed.legitimate],
        malicious=[np.asarray(s, dtype=np.float64) for s in seed.malicious],
    )
    for _ in range(cfg.b_explore):
        x_l, x_m = _pick_pair(explore, rng)
        candidate = np.clip(
            orthonormal_probe(x_l, x_m, cfg.lambda_max, rng), 0.0, 1.0
        )
        if oracle.predict(candidate, phase="explore") == LEGITIMATE:
            explore.legitimate.append(candidate)
        else:
            explore.malicious.append(candidate)
    surrogate_spec = ModelSpec(
        kind="linear_svm", c=cfg.surrogate_c, train_seed=rng.u64()
    )
    surrogate = train(surrogate_spec, explore.as_dataset())
    return explore, surrogate


def re_exploit(
    explore: ExploreSet, surrogate: LinearSVMModel, cfg: ReConfig, rng: Rng
) -> AttackSet:
    """Generate attacks against the surrogate; zero probes to the true defender.

    The legitimate pool seeds an anchor-points exploration of the surrogate
    (cfg.b_surrogate free probes) and the resulting anchors are exploited at
    cfg.r_exploit, with every candidate validated against the surrogate
    before it enters the attack set.  The free validation is what makes the
    larger exploitation radius safe.
    """
    if not explore.legitimate:
        raise ValueError("legitimate pool is empty")
    surrogate_oracle = ProbeOracle(
        surrogate.predict, surrogate.d, budget=cfg.b_surrogate
    )
    ap_cfg = ApConfig(
        b_explore=cfg.b_surrogate,
        n_attack=cfg.n_attack,
        r_min=cfg.r_min,
        r_max=cfg.r_max,
        r_exploit=cfg.r_exploit,
    )
    seeds = SeedSet(legitimate=list(explore.legitimate))
    anchors: AnchorSet = ap_explore(seeds, surrogate_oracle, ap_cfg, rng)
    return ap_exploit(anchors, ap_cfg, rng, validator=surrogate.predict)


def surrogate_report(surrogate: LinearSVMModel, reference: Dataset) -> float:
    """Surrogate accuracy on a reference dataset (experimenter diagnostic).

    The adversary never holds this data; the number gauges how much of the
    defender's view of the original space the surrogate recovered.
    """
    return holdout_accuracy(surrogate, reference)
