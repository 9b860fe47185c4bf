"""Synthetic rollout groups with planted key tokens.

Real training rollouts are expensive to obtain, so recovery benchmarks run on
generated groups instead: filler tokens drawn uniformly from a small
vocabulary, plus planted tokens inserted into every rollout of a designated
side. A planted-positive token appears in every correct rollout and no
incorrect one (and mirrored for planted-negative), so the pipeline must give
it a confidently signed delta; a neutral plant appears everywhere and must
get a delta of exactly zero.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, fields

import numpy as np

from .advantage import compute_advantages
from .core import KtaeConfig, KtaeError, Rollout, RolloutGroup, validate_group


class SpecError(KtaeError):
    """Benchmark specification violates its invariants."""


@dataclass(frozen=True)
class SynthSpec:
    """Generator parameters; the defaults define the standard benchmark."""

    seed: int = 0
    num_groups: int = 200
    group_size: int = 16
    correct_fraction: float = 0.75
    base_vocab: int = 300
    rollout_len_range: tuple[int, int] = (24, 48)
    planted_positive: tuple[int, ...] = (9001,)
    planted_negative: tuple[int, ...] = (9002,)
    planted_neutral: tuple[int, ...] = (9003,)

    def __post_init__(self) -> None:
        object.__setattr__(self, "rollout_len_range", tuple(self.rollout_len_range))
        for name in ("planted_positive", "planted_negative", "planted_neutral"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.num_groups < 1:
            raise SpecError(f"num_groups must be >= 1, got {self.num_groups}")
        if self.group_size < 2:
            raise SpecError(f"group_size must be >= 2, got {self.group_size}")
        if not 0.0 < self.correct_fraction < 1.0:
            raise SpecError(f"correct_fraction must be in (0, 1), got {self.correct_fraction}")
        if not 0 < self.num_correct < self.group_size:
            raise SpecError(
                f"correct_fraction {self.correct_fraction} rounds to {self.num_correct} correct "
                f"rollouts of {self.group_size}; groups must mix both outcomes"
            )
        if self.base_vocab < 1:
            raise SpecError(f"base_vocab must be >= 1, got {self.base_vocab}")
        lo, hi = self.rollout_len_range
        if not 1 <= lo <= hi:
            raise SpecError(f"rollout_len_range must satisfy 1 <= lo <= hi, got {self.rollout_len_range}")
        plants = self.planted_positive + self.planted_negative + self.planted_neutral
        if len(set(plants)) != len(plants):
            raise SpecError("planted token sets must be pairwise disjoint")
        bad = [t for t in plants if t < self.base_vocab]
        if bad:
            raise SpecError(f"planted tokens {bad} collide with the filler vocabulary [0, {self.base_vocab})")

    @property
    def num_correct(self) -> int:
        return int(round(self.correct_fraction * self.group_size))

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, mapping: dict) -> "SynthSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(mapping) - known
        if unknown:
            raise SpecError(f"unknown benchmark spec field(s): {', '.join(sorted(unknown))}")
        return cls(**mapping)


def generate(spec: SynthSpec) -> list[RolloutGroup]:
    """Deterministically generate reward-labeled groups from ``spec``.

    Rewards are binary: 1.0 for the first num_correct rollouts of each group,
    0.0 for the rest. Each planted token is inserted exactly once, at a
    uniformly random position, into every rollout of its side.
    """
    rng = np.random.default_rng(spec.seed)
    lo, hi = spec.rollout_len_range
    groups = []
    for g in range(spec.num_groups):
        rollouts = []
        for i in range(spec.group_size):
            is_correct = i < spec.num_correct
            length = int(rng.integers(lo, hi + 1))
            tokens = rng.integers(0, spec.base_vocab, size=length).tolist()
            plants = (spec.planted_positive if is_correct else spec.planted_negative) + spec.planted_neutral
            for plant in plants:
                tokens.insert(int(rng.integers(0, len(tokens) + 1)), plant)
            rollouts.append(
                Rollout(
                    tokens=tuple(tokens),
                    reward=1.0 if is_correct else 0.0,
                    texts=tuple(f"t{t}" for t in tokens),
                )
            )
        groups.append(validate_group(RolloutGroup(group_id=f"synth-{g:04d}", rollouts=tuple(rollouts))))
    return groups


def recovery_report(groups: list[RolloutGroup], spec: SynthSpec, config: KtaeConfig | None = None) -> dict:
    """Run the pipeline over generated groups and score plant recovery.

    Reports sign accuracy of the positive/negative plants (measured on the
    actual emitted deltas), the magnitude of neutral-plant deltas, |key-token-
    value| separation between plants and filler tokens, per-group rank of each
    plant, and wall-clock cost.
    """
    config = config if config is not None else KtaeConfig()
    pos_correct = pos_total = neg_correct = neg_total = 0
    neutral_abs_deltas: list[float] = []
    plant_abs_ktv: list[float] = []
    plant_abs_delta: list[float] = []
    filler_abs_ktv: list[float] = []
    filler_abs_delta: list[float] = []
    plant_ranks: list[int] = []

    plant_set = set(spec.planted_positive) | set(spec.planted_negative) | set(spec.planted_neutral)
    started = time.perf_counter()
    matrices = [compute_advantages(group, config) for group in groups]
    elapsed = time.perf_counter() - started

    for group, matrix in zip(groups, matrices):
        deltas = {tok: _first_delta(group, matrix, tok) for tok in matrix.token_stats}
        abs_ktv = {tok: abs(s.key_token_value) for tok, s in matrix.token_stats.items()}
        for tok in spec.planted_positive:
            pos_total += 1
            pos_correct += deltas[tok] > 0
        for tok in spec.planted_negative:
            neg_total += 1
            neg_correct += deltas[tok] < 0
        for tok in spec.planted_neutral:
            neutral_abs_deltas.append(abs(deltas[tok]))
        for tok in spec.planted_positive + spec.planted_negative:
            plant_abs_ktv.append(abs_ktv[tok])
            plant_abs_delta.append(abs(deltas[tok]))
            plant_ranks.append(1 + sum(v > abs_ktv[tok] for v in abs_ktv.values()))
        for tok, value in abs_ktv.items():
            if tok not in plant_set:
                filler_abs_ktv.append(value)
                filler_abs_delta.append(abs(deltas[tok]))

    filler_ktv = np.asarray(filler_abs_ktv, dtype=np.float64)
    return {
        "num_groups": len(groups),
        "spec": spec.to_dict(),
        "config": config.to_dict(),
        "sign_accuracy_positive": pos_correct / pos_total if pos_total else 1.0,
        "sign_accuracy_negative": neg_correct / neg_total if neg_total else 1.0,
        "sign_accuracy": (pos_correct + neg_correct) / (pos_total + neg_total)
        if pos_total + neg_total
        else 1.0,
        "neutral_max_abs_delta": max(neutral_abs_deltas) if neutral_abs_deltas else 0.0,
        "neutral_mean_abs_delta": float(np.mean(neutral_abs_deltas)) if neutral_abs_deltas else 0.0,
        "plant_mean_abs_ktv": float(np.mean(plant_abs_ktv)) if plant_abs_ktv else 0.0,
        "plant_mean_abs_delta": float(np.mean(plant_abs_delta)) if plant_abs_delta else 0.0,
        "filler_mean_abs_delta": float(np.mean(filler_abs_delta)) if filler_abs_delta else 0.0,
        "filler_abs_ktv_p95": float(np.percentile(filler_ktv, 95)) if filler_ktv.size else 0.0,
        "plant_rank_mean": float(np.mean(plant_ranks)) if plant_ranks else 0.0,
        "plant_rank_worst": max(plant_ranks) if plant_ranks else 0,
        "seconds_total": elapsed,
        "seconds_per_group": elapsed / len(groups) if groups else 0.0,
    }


def _first_delta(group: RolloutGroup, matrix, token: int) -> float:
    """Delta of ``token`` read off the emitted matrix at its first position."""
    for i, rollout in enumerate(group.rollouts):
        try:
            pos = rollout.tokens.index(token)
        except ValueError:
            continue
        return float(matrix.token_advantages[i][pos] - matrix.rollout_advantages[i])
    raise KeyError(f"token {token} does not occur in group {group.group_id!r}")
