"""Domain types, configuration, and validation shared by the whole pipeline.

A rollout group bundles the G reward-labeled token sequences sampled for one
prompt. Correctness is derived from each reward by a strict threshold
(reward > threshold means correct), which reduces to the usual binary case
for {0, 1} rewards. All types are immutable after validation and safe to
share across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from functools import cached_property
from typing import Literal, NamedTuple

import numpy as np

FisherMode = Literal["point", "two_sided"]
DegeneratePolicy = Literal["zeros", "error"]


class KtaeError(Exception):
    """Base class for every error raised by this package."""


class EmptyGroup(KtaeError):
    """Group has fewer than two rollouts."""


class EmptyRollout(KtaeError):
    """A rollout carries no tokens."""


class LengthMismatch(KtaeError):
    """Display texts do not align one-to-one with tokens."""


class InvalidReward(KtaeError):
    """Reward (or threshold) is not a finite number."""


class InvalidToken(KtaeError):
    """Token identifiers must be non-negative integers."""


class TooFewRollouts(KtaeError):
    """Group-normalized advantages need at least two rewards."""


class DegenerateGroup(KtaeError):
    """Every rollout shares one correctness label and the policy forbids it."""


class DomainError(KtaeError):
    """Argument lies outside the mathematical domain of an operation."""


class ConfigError(KtaeError):
    """Configuration value violates its constraints."""


@dataclass(frozen=True)
class Rollout:
    """One sampled response: token ids, optional display texts, scalar reward.

    ``tokens`` holds response tokens only; prompt tokens never enter any
    statistic. ``texts`` exists purely for rendering and must align
    one-to-one with ``tokens`` when present.
    """

    tokens: tuple[int, ...]
    reward: float
    texts: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if self.texts is not None:
            object.__setattr__(self, "texts", tuple(self.texts))


@dataclass(frozen=True)
class RolloutGroup:
    """The unit of computation: all rollouts sampled for one prompt."""

    group_id: str
    rollouts: tuple[Rollout, ...]
    correctness_threshold: float = 0.5

    def __post_init__(self) -> None:
        object.__setattr__(self, "rollouts", tuple(self.rollouts))

    @property
    def size(self) -> int:
        return len(self.rollouts)

    @cached_property
    def correct_mask(self) -> tuple[bool, ...]:
        """Per-rollout correctness: reward strictly above the threshold."""
        thr = self.correctness_threshold
        return tuple(r.reward > thr for r in self.rollouts)

    @property
    def num_correct(self) -> int:
        return sum(self.correct_mask)

    @property
    def num_incorrect(self) -> int:
        return self.size - self.num_correct


class ContingencyTable(NamedTuple):
    """2x2 occurrence-vs-correctness counts for one token type.

    a: correct rollouts containing the token    b: incorrect, containing
    c: correct rollouts omitting the token      d: incorrect, omitting
    """

    a: int
    b: int
    c: int
    d: int

    @property
    def n(self) -> int:
        return self.a + self.b + self.c + self.d

    @property
    def n_true(self) -> int:
        return self.a + self.c

    @property
    def n_false(self) -> int:
        return self.b + self.d

    def swapped(self) -> "ContingencyTable":
        """The same table with the correct/incorrect columns exchanged."""
        return ContingencyTable(self.b, self.a, self.d, self.c)

    def check(self) -> "ContingencyTable":
        if min(self) < 0:
            raise DomainError(f"contingency counts must be non-negative, got {self}")
        return self


@dataclass(frozen=True)
class KtaeConfig:
    """Weights and numeric guards for the token-level advantage computation.

    h1/h2 weight the Fisher score and information gain inside the association
    strength, h3 weights the term-frequency ratio inside the direction score.
    k1 and b are the saturation and length-normalization parameters of the
    standardized term frequency. tf_floor keeps the direction score finite
    when a token is absent from one side; std_epsilon guards zero reward
    variance.
    """

    h1: float = 1.0
    h2: float = 2.0
    h3: float = 1.0
    k1: float = 2.0
    b: float = 0.5
    std_epsilon: float = 1e-8
    tf_floor: float = 1e-6
    fisher_mode: FisherMode = "point"
    degenerate_policy: DegeneratePolicy = "zeros"

    def __post_init__(self) -> None:
        for name in ("h1", "h2", "h3", "k1", "b", "std_epsilon", "tf_floor"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
                raise ConfigError(f"{name} must be a finite number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.h1 < 0 or self.h2 < 0:
            raise ConfigError(f"h1 and h2 must be non-negative, got h1={self.h1}, h2={self.h2}")
        if self.k1 <= 0:
            raise ConfigError(f"k1 must be positive, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ConfigError(f"b must lie in [0, 1], got {self.b}")
        if self.std_epsilon <= 0:
            raise ConfigError(f"std_epsilon must be positive, got {self.std_epsilon}")
        if self.tf_floor <= 0:
            raise ConfigError(f"tf_floor must be positive, got {self.tf_floor}")
        if self.fisher_mode not in ("point", "two_sided"):
            raise ConfigError(f"fisher_mode must be 'point' or 'two_sided', got {self.fisher_mode!r}")
        if self.degenerate_policy not in ("zeros", "error"):
            raise ConfigError(f"degenerate_policy must be 'zeros' or 'error', got {self.degenerate_policy!r}")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, mapping: dict) -> "KtaeConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(mapping) - known
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(sorted(unknown))}")
        return cls(**mapping)


class TokenStats(NamedTuple):
    """Per-token-type intermediates from table to key-token-value."""

    token: int
    table: ContingencyTable
    fisher_p: float
    fisher_score: float
    info_gain: float
    tf_true: float
    tf_false: float
    tf_score_true: float
    tf_score_false: float
    direction: float
    key_token_value: float


@dataclass(frozen=True)
class AdvantageMatrix:
    """Final output: rollout-level baselines plus per-position refinements.

    token_advantages[i] aligns with rollouts[i].tokens; every position of a
    given token id inside the group carries the same (token - rollout)
    advantage delta, and that delta always lies strictly inside (-0.5, 0.5).
    """

    rollout_advantages: np.ndarray
    token_advantages: tuple[np.ndarray, ...]
    token_stats: dict[int, TokenStats]

    def delta(self, rollout_index: int) -> np.ndarray:
        """Per-position refinement for one rollout."""
        return self.token_advantages[rollout_index] - self.rollout_advantages[rollout_index]


def validate_group(group: RolloutGroup) -> RolloutGroup:
    """Check all group invariants and warm the correctness partition.

    Returns the same (immutable) group on success so call sites can chain.
    """
    if group.size < 2:
        raise EmptyGroup(f"group {group.group_id!r} has {group.size} rollout(s); need at least 2")
    if not isinstance(group.correctness_threshold, (int, float)) or not math.isfinite(group.correctness_threshold):
        raise InvalidReward(f"group {group.group_id!r}: correctness_threshold must be finite")
    for i, rollout in enumerate(group.rollouts):
        if len(rollout.tokens) == 0:
            raise EmptyRollout(f"group {group.group_id!r}: rollout {i} has no tokens")
        if rollout.texts is not None and len(rollout.texts) != len(rollout.tokens):
            raise LengthMismatch(
                f"group {group.group_id!r}: rollout {i} has {len(rollout.texts)} texts "
                f"for {len(rollout.tokens)} tokens"
            )
        if not isinstance(rollout.reward, (int, float)) or isinstance(rollout.reward, bool) \
                or not math.isfinite(rollout.reward):
            raise InvalidReward(f"group {group.group_id!r}: rollout {i} reward {rollout.reward!r} is not finite")
        if min(rollout.tokens) < 0:
            raise InvalidToken(f"group {group.group_id!r}: rollout {i} contains a negative token id")
    group.correct_mask  # populate the cached partition
    return group
