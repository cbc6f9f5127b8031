"""Preference-pair selection over scored candidate pools.

Each pool is partitioned by sentiment consistency into a chosen set and a
rejected set. When both are non-empty, the chosen text is the consistent
candidate with the lowest relevance and the rejected text is the
inconsistent candidate with the highest relevance, which keeps the pair
hard to distinguish. When the chosen set is empty, the pair falls back to
the lowest-relevance (chosen) and highest-relevance (rejected) members of
the whole pool; when the rejected set is empty the assignment is exactly
opposite. Ties always break toward the lowest pool index.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence, Union

from .errors import DataError
from .reward import ScoredRecord

BRANCH_NORMAL = "normal"
BRANCH_CHOSEN_EMPTY = "chosen_empty"
BRANCH_REJECTED_EMPTY = "rejected_empty"

#: Reward ablation modes. ``reward1_only`` ignores relevance (selection
#: falls back to pool order: lowest index where the lowest relevance would
#: be taken, highest index where the highest would be). ``reward2_only``
#: ignores consistency, treating every candidate as consistent.
MODES = ("full", "reward1_only", "reward2_only")


@dataclass(frozen=True)
class PreferencePair:
    source_id: str
    prompt: str
    chosen: str
    rejected: str
    branch: str


@dataclass(frozen=True)
class Skip:
    source_id: str
    reason: str


def _argmin(members: Sequence[ScoredRecord], key: Callable[[ScoredRecord], float]) -> ScoredRecord:
    return min(members, key=lambda m: (key(m), m.pool_index))


def _argmax(members: Sequence[ScoredRecord], key: Callable[[ScoredRecord], float]) -> ScoredRecord:
    return min(members, key=lambda m: (-key(m), m.pool_index))


def build_pair(
    pool: Sequence[ScoredRecord], prompt: str, mode: str = "full"
) -> Union[PreferencePair, Skip]:
    """Select (chosen, rejected) from one pool, or Skip when impossible."""
    if mode not in MODES:
        raise ValueError(f"invalid mode {mode!r}")
    if not pool:
        raise DataError("cannot build a pair from an empty pool")
    source_id = pool[0].source_id
    if any(m.source_id != source_id for m in pool):
        raise DataError(f"pool for {source_id!r} mixes source_ids")
    if len(pool) < 2:
        return Skip(source_id=source_id, reason="pool has fewer than 2 members")

    key: Callable[[ScoredRecord], float]
    if mode == "reward1_only":
        key = lambda m: float(m.pool_index)
    else:
        key = lambda m: m.relevance

    if mode == "reward2_only":
        chosen_set = list(pool)
        rejected_set: list[ScoredRecord] = []
    else:
        chosen_set = [m for m in pool if m.consistent]
        rejected_set = [m for m in pool if not m.consistent]

    if chosen_set and rejected_set:
        branch = BRANCH_NORMAL
        chosen = _argmin(chosen_set, key)
        rejected = _argmax(rejected_set, key)
    elif not chosen_set:
        branch = BRANCH_CHOSEN_EMPTY
        chosen = _argmin(pool, key)
        rejected = _argmax(pool, key)
    else:
        branch = BRANCH_REJECTED_EMPTY
        chosen = _argmax(pool, key)
        rejected = _argmin(pool, key)

    if chosen.pool_index == rejected.pool_index:
        # Every key tied: take the next pool index as the rejected member.
        others = sorted(
            (m for m in pool if m.pool_index != chosen.pool_index),
            key=lambda m: m.pool_index,
        )
        if not others:
            return Skip(source_id=source_id, reason="pool has fewer than 2 distinct members")
        rejected = others[0]

    return PreferencePair(
        source_id=source_id,
        prompt=prompt,
        chosen=chosen.text,
        rejected=rejected.text,
        branch=branch,
    )


def build_preference_dataset(
    pools: Iterable[Sequence[ScoredRecord]],
    prompts: Mapping[str, str],
    mode: str = "full",
) -> tuple[list[PreferencePair], list[Skip]]:
    """One pair per pool (input order), plus the skip report."""
    pairs: list[PreferencePair] = []
    skips: list[Skip] = []
    for pool in pools:
        if not pool:
            continue
        source_id = pool[0].source_id
        if source_id not in prompts:
            raise DataError(f"no prompt available for source_id {source_id!r}")
        result = build_pair(pool, prompts[source_id], mode)
        if isinstance(result, Skip):
            skips.append(result)
        else:
            pairs.append(result)
    return pairs, skips
