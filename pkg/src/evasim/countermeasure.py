"""Blacklist countermeasure simulation with epsilon-ball approximate matching.

A first attack wave is stored verbatim in a blacklist; a second wave from the
same attacker state is then checked against it.  A sample is blocked when it
lies within ``epsilon * sqrt(d)`` Euclidean distance of any stored entry
(the sqrt(d) factor balances the approximation across dimensionalities).
The reported stopped fraction counts blocked samples among the second wave's
*effective* attacks only.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

from .attack_ap import AnchorSet, ApConfig, AttackSet, ap_exploit
from .attack_re import ExploreSet, ReConfig, re_exploit
from .core import LEGITIMATE
from .metrics import effective_attacks
from .models import LinearSVMModel
from .rng import Rng


@dataclass(frozen=True)
class Blacklist:
    """Immutable list of previously seen attacks plus the matching radius."""

    entries: np.ndarray  # (m, d)
    epsilon: float
    effective_radius: float

    def __len__(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class BlacklistOutcome:
    stopped_fraction: float
    second_wave_ea_count: int
    stopped_count: int
    false_positive_fraction: float | None = None

    def to_dict(self) -> dict:
        out = {
            "stopped_fraction": self.stopped_fraction,
            "second_wave_ea_count": self.second_wave_ea_count,
            "stopped_count": self.stopped_count,
        }
        if self.false_positive_fraction is not None:
            out["false_positive_fraction"] = self.false_positive_fraction
        return out


def build_blacklist(first_wave: AttackSet | np.ndarray, epsilon: float,
                    d: int) -> Blacklist:
    """Store every first-wave sample; matching radius is epsilon * sqrt(d)."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    entries = np.atleast_2d(
        np.asarray(getattr(first_wave, "attacks", first_wave), dtype=np.float64)
    )
    if entries.size == 0:
        entries = entries.reshape(0, d)
    return Blacklist(
        entries=entries,
        epsilon=float(epsilon),
        effective_radius=float(epsilon * np.sqrt(d)),
    )


def is_blocked(blacklist: Blacklist, x: np.ndarray) -> bool:
    """True iff x lies within the effective radius of any entry (inclusive)."""
    x = np.asarray(x, dtype=np.float64)
    if len(blacklist) == 0:
        return False
    if x.shape != (blacklist.entries.shape[1],):
        raise ValueError(
            f"dimension mismatch: expected {blacklist.entries.shape[1]} features"
        )
    dist = np.sqrt(((blacklist.entries - x) ** 2).sum(axis=1))
    return bool(dist.min() <= blacklist.effective_radius)


def blocked_mask(blacklist: Blacklist, X: np.ndarray) -> np.ndarray:
    """Vectorized is_blocked over the rows of X."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if len(blacklist) == 0:
        return np.zeros(X.shape[0], dtype=bool)
    dist = cdist(X, blacklist.entries)
    return dist.min(axis=1) <= blacklist.effective_radius


def _generate_wave(attacker_state, cfg, rng: Rng, n_attack: int) -> AttackSet:
    if isinstance(attacker_state, AnchorSet):
        if not isinstance(cfg, ApConfig):
            raise ValueError("anchor state requires an ApConfig")
        wave_cfg = ApConfig(
            b_explore=cfg.b_explore, n_attack=n_attack, r_min=cfg.r_min,
            r_max=cfg.r_max, r_exploit=cfg.r_exploit,
            max_seed_probes=cfg.max_seed_probes,
        )
        return ap_exploit(attacker_state, wave_cfg, rng)
    if (
        isinstance(attacker_state, tuple)
        and len(attacker_state) == 2
        and isinstance(attacker_state[0], ExploreSet)
        and isinstance(attacker_state[1], LinearSVMModel)
    ):
        if not isinstance(cfg, ReConfig):
            raise ValueError("explore/surrogate state requires a ReConfig")
        explore, surrogate = attacker_state
        wave_cfg = ReConfig(
            b_explore=cfg.b_explore, n_attack=n_attack,
            lambda_max=cfg.lambda_max, r_exploit=cfg.r_exploit,
            surrogate_c=cfg.surrogate_c, b_surrogate=cfg.b_surrogate,
            r_min=cfg.r_min, r_max=cfg.r_max,
        )
        return re_exploit(explore, surrogate, wave_cfg, rng)
    raise ValueError(
        "attacker_state must be an AnchorSet or an (ExploreSet, surrogate) pair"
    )


def blacklist_experiment(
    attacker_state,
    defender_truth,
    cfg,
    epsilon: float,
    rng: Rng,
    n_attack_new: int | None = None,
    first_wave: AttackSet | None = None,
    legitimate_reference: np.ndarray | None = None,
) -> BlacklistOutcome:
    """Blacklist wave 1, then measure how much of wave 2 it stops.

    The attacker state (anchors, or explore set plus surrogate) is reused
    unchanged for both waves - no new probes to the true defender.  Wave 1
    may be supplied (the campaign already submitted) or generated here; wave
    2 is always freshly generated.  When ``legitimate_reference`` rows are
    given, the fraction of those genuinely legitimate samples the blacklist
    would block is reported as the false-positive fraction.
    """
    d = defender_truth.d
    if first_wave is None:
        first_wave = _generate_wave(attacker_state, cfg, rng, cfg.n_attack)
    blacklist = build_blacklist(first_wave, epsilon, d)
    wave2 = _generate_wave(
        attacker_state, cfg, rng, n_attack_new or cfg.n_attack
    )
    ea2 = effective_attacks(defender_truth, wave2)
    if ea2.size == 0:
        stopped = 0
        fraction = 0.0
    else:
        stopped = int(blocked_mask(blacklist, ea2.members).sum())
        fraction = stopped / ea2.size
    fp = None
    if legitimate_reference is not None and len(legitimate_reference) > 0:
        fp = float(blocked_mask(blacklist, legitimate_reference).mean())
    return BlacklistOutcome(
        stopped_fraction=fraction,
        second_wave_ea_count=ea2.size,
        stopped_count=stopped,
        false_positive_fraction=fp,
    )


def save_blacklist_csv(blacklist: Blacklist, path: str | Path) -> None:
    """Entries one per row; epsilon is carried in a leading comment row."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["#epsilon", repr(blacklist.epsilon)])
        for row in blacklist.entries:
            writer.writerow([repr(float(v)) for v in row])


def load_blacklist_csv(path: str | Path, d: int | None = None) -> Blacklist:
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows or rows[0][0] != "#epsilon":
        raise ValueError(f"{path}: not a blacklist export")
    epsilon = float(rows[0][1])
    entries = np.asarray(
        [[float(c) for c in row] for row in rows[1:]], dtype=np.float64
    )
    if entries.size == 0:
        if d is None:
            raise ValueError("empty blacklist needs an explicit dimensionality")
        entries = entries.reshape(0, d)
    return build_blacklist(entries, epsilon, entries.shape[1])
