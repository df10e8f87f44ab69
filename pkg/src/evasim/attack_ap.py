"""Anchor points attack: seed search, radius-adaptive exploration, and
perturb-and-mix exploitation.

Exploration spends the whole probing budget growing a set of oracle-confirmed
legitimate samples (anchors) by perturbing already-confirmed ones.  The
search radius adapts to the acceptance rate so far: many hits widen it toward
``r_max``, misses shrink it toward ``r_min``.  Exploitation then produces
attack samples offline - perturb two random anchors and take a random convex
combination - at zero probing cost.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import LEGITIMATE, MALICIOUS
from .oracle import ProbeOracle
from .rng import Rng


class SeedSearchError(Exception):
    """Random seed search hit its probe cap before finding a required class."""


@dataclass(frozen=True)
class ApConfig:
    """Anchor-points attack parameters (defaults are the standard protocol)."""

    b_explore: int = 1000
    n_attack: int = 2000
    r_min: float = 0.1
    r_max: float = 0.5
    r_exploit: float = 0.1
    max_seed_probes: int = 10000

    def __post_init__(self):
        if not 0 < self.r_min <= self.r_max:
            raise ValueError("need 0 < r_min <= r_max")
        if self.r_exploit <= 0:
            raise ValueError("r_exploit must be positive")
        if self.b_explore < 1 or self.n_attack < 1:
            raise ValueError("b_explore and n_attack must be >= 1")
        if self.max_seed_probes < 1:
            raise ValueError("max_seed_probes must be >= 1")


@dataclass
class SeedSet:
    """Oracle-labeled starting samples; labels are guaranteed at insertion."""

    legitimate: list = field(default_factory=list)
    malicious: list = field(default_factory=list)
    seed_probe_count: int = 0


@dataclass
class AnchorSet:
    """Samples confirmed legitimate during exploration (seeds included)."""

    anchors: list
    probes_spent: int

    def __len__(self) -> int:
        return len(self.anchors)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.anchors, dtype=np.float64)


@dataclass
class AttackSet:
    """Generated attack samples, one per row."""

    attacks: np.ndarray

    def __len__(self) -> int:
        return self.attacks.shape[0]


def find_seed(
    oracle: ProbeOracle,
    rng: Rng,
    need_malicious: bool = False,
    max_seed_probes: int = 10000,
) -> SeedSet:
    """Probe uniform random points until each required class is seen once.

    Seed probes are accounted in the oracle's seed counter and do not touch
    the explore budget.
    """
    seeds = SeedSet()
    for _ in range(max_seed_probes):
        x = rng.uniform(0.0, 1.0, oracle.d)
        label = oracle.predict(x, phase="seed")
        seeds.seed_probe_count += 1
        if label == LEGITIMATE and not seeds.legitimate:
            seeds.legitimate.append(x)
        elif label == MALICIOUS and need_malicious and not seeds.malicious:
            seeds.malicious.append(x)
        if seeds.legitimate and (seeds.malicious or not need_malicious):
            return seeds
    missing = []
    if not seeds.legitimate:
        missing.append("legitimate")
    if need_malicious and not seeds.malicious:
        missing.append("malicious")
    raise SeedSearchError(
        f"no {' or '.join(missing)} sample found in {max_seed_probes} random probes"
    )


def perturb(x: np.ndarray, radius: float, rng: Rng) -> np.ndarray:
    """Add zero-mean Gaussian noise with std=radius per component, clip to [0,1]."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    return np.clip(x + radius * rng.normal(x.shape[0]), 0.0, 1.0)


def dynamic_radius(i: int, count_legitimate: int, r_min: float, r_max: float) -> float:
    """Acceptance-adaptive search radius: (r_max-r_min)*(hits/i) + r_min."""
    if i < 1:
        raise ValueError("probe index starts at 1")
    return (r_max - r_min) * (count_legitimate / i) + r_min


def ap_explore(seed: SeedSet, oracle: ProbeOracle, cfg: ApConfig, rng: Rng) -> AnchorSet:
    """Spend exactly cfg.b_explore probes growing the anchor set.

    Each iteration perturbs a uniformly random current anchor at the dynamic
    radius and keeps the probe only if the oracle says legitimate.  The seed
    samples count as anchors but not toward the acceptance count.
    """
    if not seed.legitimate:
        raise ValueError("need at least one legitimate seed sample")
    anchors = [np.asarray(s, dtype=np.float64) for s in seed.legitimate]
    count_legitimate = 0
    for i in range(1, cfg.b_explore + 1):
        base = anchors[rng.integers(len(anchors))]
        radius = dynamic_radius(i, count_legitimate, cfg.r_min, cfg.r_max)
        candidate = perturb(base, radius, rng)
        if oracle.predict(candidate, phase="explore") == LEGITIMATE:
            anchors.append(candidate)
            count_legitimate += 1
    return AnchorSet(anchors=anchors, probes_spent=cfg.b_explore)


def ap_exploit(
    anchors: AnchorSet,
    cfg: ApConfig,
    rng: Rng,
    validator=None,
    max_candidate_factor: int = 100,
) -> AttackSet:
    """Generate cfg.n_attack samples from the anchors; zero oracle probes.

    Each sample is a random convex combination of two independently chosen
    (possibly identical) anchors perturbed at the exploitation radius.  When
    a ``validator`` label function is given (an attacker-owned model, so
    queries are free), candidates it labels malicious are discarded and
    redrawn; this is what lets a larger exploitation radius keep its
    accuracy.
    """
    pool = anchors.as_array()
    if pool.shape[0] == 0:
        raise ValueError("anchor set is empty")
    attacks = np.empty((cfg.n_attack, pool.shape[1]), dtype=np.float64)
    budget = cfg.n_attack * max_candidate_factor
    produced = 0
    for _ in range(budget):
        a = pool[rng.integers(pool.shape[0])]
        b = pool[rng.integers(pool.shape[0])]
        a_hat = perturb(a, cfg.r_exploit, rng)
        b_hat = perturb(b, cfg.r_exploit, rng)
        lam = rng.random()
        candidate = lam * a_hat + (1.0 - lam) * b_hat
        if validator is not None and validator(candidate) != LEGITIMATE:
            continue
        attacks[produced] = candidate
        produced += 1
        if produced == cfg.n_attack:
            return AttackSet(attacks=attacks)
    raise RuntimeError(
        f"validator rejected too many candidates "
        f"({budget} drawn, {produced} accepted)"
    )
