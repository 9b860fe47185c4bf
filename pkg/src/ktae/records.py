"""Line-delimited wire formats and flat config files.

One JSON object per line, so arbitrarily large rollout dumps stream with
bounded memory. Group records are the input side; advantage records mirror
the input shape exactly and optionally carry per-token diagnostics. Unknown
fields in records are ignored; unknown fields in config files are errors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .core import ConfigError, KtaeConfig, KtaeError, Rollout, RolloutGroup
from .synth import SpecError, SynthSpec

TOKEN_STAT_KEYS = ("a", "b", "c", "d", "p", "F", "IG", "TF_T", "TF_F", "D", "ktv")


class RecordError(KtaeError):
    """Malformed wire record."""


@dataclass
class AdvantageRecord:
    """Wire-level result for one group; shape mirrors the input group."""

    group_id: str
    rollout_advantages: list[float]
    token_advantages: list[list[float]]
    token_stats: dict[int, dict] | None = None


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise RecordError(message)


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _parse_json_line(line: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise RecordError(f"invalid JSON: {exc}") from None
    _require(isinstance(obj, dict), "record must be a JSON object")
    return obj


def parse_group_record(line: str) -> RolloutGroup:
    """Parse one group line into a RolloutGroup (not yet validated)."""
    obj = _parse_json_line(line)
    group_id = obj.get("group_id")
    _require(isinstance(group_id, str), "group_id must be a string")
    threshold = obj.get("correctness_threshold", 0.5)
    _require(_is_number(threshold), "correctness_threshold must be a number")
    raw_rollouts = obj.get("rollouts")
    _require(isinstance(raw_rollouts, list), "rollouts must be an array")
    rollouts = []
    for i, raw in enumerate(raw_rollouts):
        _require(isinstance(raw, dict), f"rollouts[{i}] must be an object")
        tokens = raw.get("tokens")
        _require(
            isinstance(tokens, list) and all(isinstance(t, int) and not isinstance(t, bool) for t in tokens),
            f"rollouts[{i}].tokens must be an array of integers",
        )
        reward = raw.get("reward")
        _require(_is_number(reward), f"rollouts[{i}].reward must be a number")
        texts = raw.get("texts")
        if texts is not None:
            _require(
                isinstance(texts, list) and all(isinstance(t, str) for t in texts),
                f"rollouts[{i}].texts must be an array of strings",
            )
            texts = tuple(texts)
        rollouts.append(Rollout(tokens=tuple(tokens), reward=float(reward), texts=texts))
    return RolloutGroup(group_id=group_id, rollouts=tuple(rollouts), correctness_threshold=float(threshold))


def group_record_line(group: RolloutGroup) -> str:
    """Serialize a group back to its wire line."""
    rollouts = []
    for r in group.rollouts:
        entry: dict = {"tokens": list(r.tokens), "reward": r.reward}
        if r.texts is not None:
            entry["texts"] = list(r.texts)
        rollouts.append(entry)
    obj = {
        "group_id": group.group_id,
        "correctness_threshold": group.correctness_threshold,
        "rollouts": rollouts,
    }
    return json.dumps(obj, separators=(",", ":"))


def advantage_record_line(group_id: str, matrix, include_stats: bool = False) -> str:
    """Serialize an AdvantageMatrix for one group to its wire line."""
    obj: dict = {
        "group_id": group_id,
        "rollout_advantages": matrix.rollout_advantages.tolist(),
        "token_advantages": [row.tolist() for row in matrix.token_advantages],
    }
    if include_stats:
        obj["token_stats"] = {
            str(tok): dict(zip(TOKEN_STAT_KEYS, (*s.table, s.fisher_p, s.fisher_score, s.info_gain,
                                                 s.tf_score_true, s.tf_score_false, s.direction,
                                                 s.key_token_value)))
            for tok, s in matrix.token_stats.items()
        }
    return json.dumps(obj, separators=(",", ":"))


def parse_advantage_record(line: str) -> AdvantageRecord:
    obj = _parse_json_line(line)
    group_id = obj.get("group_id")
    _require(isinstance(group_id, str), "group_id must be a string")
    rollout_adv = obj.get("rollout_advantages")
    _require(
        isinstance(rollout_adv, list) and all(_is_number(v) for v in rollout_adv),
        "rollout_advantages must be an array of numbers",
    )
    token_adv = obj.get("token_advantages")
    _require(isinstance(token_adv, list), "token_advantages must be an array of arrays")
    for i, row in enumerate(token_adv):
        _require(
            isinstance(row, list) and all(_is_number(v) for v in row),
            f"token_advantages[{i}] must be an array of numbers",
        )
    _require(len(token_adv) == len(rollout_adv), "token_advantages must have one row per rollout")
    stats = obj.get("token_stats")
    parsed_stats = None
    if stats is not None:
        _require(isinstance(stats, dict), "token_stats must be an object keyed by token id")
        parsed_stats = {}
        for key, entry in stats.items():
            try:
                tok = int(key)
            except ValueError:
                raise RecordError(f"token_stats key {key!r} is not an integer token id") from None
            _require(isinstance(entry, dict), f"token_stats[{key}] must be an object")
            parsed_stats[tok] = entry
    return AdvantageRecord(
        group_id=group_id,
        rollout_advantages=[float(v) for v in rollout_adv],
        token_advantages=[[float(v) for v in row] for row in token_adv],
        token_stats=parsed_stats,
    )


def load_config(path: str | Path) -> KtaeConfig:
    """Read a flat JSON config file; missing fields keep their defaults."""
    return config_from_mapping(_load_flat_mapping(path, "config"))


def load_synth_spec(path: str | Path) -> SynthSpec:
    """Read a flat JSON benchmark spec; missing fields keep their defaults."""
    mapping = _load_flat_mapping(path, "benchmark spec")
    try:
        return SynthSpec.from_dict(mapping)
    except TypeError as exc:
        raise SpecError(f"bad benchmark spec: {exc}") from None


def config_from_mapping(mapping: dict) -> KtaeConfig:
    try:
        return KtaeConfig.from_dict(mapping)
    except TypeError as exc:
        raise ConfigError(f"bad config: {exc}") from None


def _load_flat_mapping(path: str | Path, what: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {what} file {path}: {exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} file {path} is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ConfigError(f"{what} file {path} must hold a JSON object")
    return {str(k): _coerce_json_value(v) for k, v in obj.items()}


def _coerce_json_value(value):
    if isinstance(value, list):
        return tuple(_coerce_json_value(v) for v in value)
    return value
