"""Label balancing by oversampling, and merging of original + augmented data.

The "standard" construction pairs every original instance with one augmented
instance. The "balanced" construction first duplicates instances of minority
labels (uniformly, with replacement, seeded) until every label matches the
largest class size, then augments every instance of that balanced set.
"""
from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass

from .corpus import POLARITY_ORDER, Dataset, Instance, Polarity
from .errors import DataError

SETTINGS = ("standard", "balanced")


@dataclass(frozen=True)
class BalancePlan:
    """How to bring every label up to the largest class size.

    ``duplications`` holds (index into the source dataset, copy count) pairs,
    grouped by label in canonical order and sorted by index within a label.
    """

    target_per_label: int
    duplications: tuple[tuple[int, int], ...]


def make_balance_plan(d: Dataset, rng_seed: int) -> BalancePlan:
    counts = d.label_counts()
    if len(d) == 0:
        raise DataError("cannot balance an empty dataset")
    for p in POLARITY_ORDER:
        if counts[p] == 0:
            raise DataError(f"cannot balance: label {p.value} has no instances")
    target = max(counts.values())
    by_label: dict[Polarity, list[int]] = {p: [] for p in POLARITY_ORDER}
    for idx, inst in enumerate(d.instances):
        by_label[inst.label].append(idx)
    rng = random.Random(rng_seed)
    duplications: list[tuple[int, int]] = []
    for p in POLARITY_ORDER:
        deficit = target - counts[p]
        if deficit == 0:
            continue
        drawn = Counter(rng.choices(by_label[p], k=deficit))
        duplications.extend(sorted(drawn.items()))
    return BalancePlan(target_per_label=target, duplications=tuple(duplications))


def apply_balance_plan(d: Dataset, plan: BalancePlan) -> Dataset:
    extra: list[Instance] = []
    for idx, copies in plan.duplications:
        src = d.instances[idx]
        dup = Instance(
            sentence=src.sentence,
            aspect=src.aspect,
            label=src.label,
            source_id=src.source_id,
            origin="duplicate",
        )
        extra.extend([dup] * copies)
    return Dataset(split=d.split, name=d.name, instances=d.instances + tuple(extra))


def balance(d: Dataset, rng_seed: int) -> Dataset:
    """Oversample minority labels to the largest class size.

    Originals keep their order and come first; duplicates follow, grouped by
    label. Deterministic for a fixed seed.
    """
    return apply_balance_plan(d, make_balance_plan(d, rng_seed))


def merge_augmented(base: Dataset, augmented: Dataset, setting: str = "standard") -> Dataset:
    """Append the augmented instances to their base dataset.

    ``augmented`` must contain exactly one instance per base instance (same
    multiset of source_ids, origin ``augmented``); the merged dataset doubles
    every label count.
    """
    if setting not in SETTINGS:
        raise DataError(f"invalid setting {setting!r}")
    base_ids = Counter(i.source_id for i in base.instances)
    aug_ids = Counter(i.source_id for i in augmented.instances)
    if base_ids != aug_ids:
        missing = sorted((base_ids - aug_ids).elements())
        extra = sorted((aug_ids - base_ids).elements())
        raise DataError(
            "source_id mismatch between base and augmented data: "
            f"missing from augmented {missing!r}, unexpected in augmented {extra!r}"
        )
    bad_origin = [i.source_id for i in augmented.instances if i.origin != "augmented"]
    if bad_origin:
        raise DataError(f"augmented dataset contains non-augmented instances: {bad_origin!r}")
    return Dataset(
        split=base.split,
        name=base.name,
        instances=base.instances + augmented.instances,
    )
