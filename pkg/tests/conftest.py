"""Shared fixtures: synthetic datasets and a scripted end-to-end mock run."""
from __future__ import annotations

import json
from pathlib import Path

import pytest

from absaug.augmenter import build_prompt, strip_boilerplate
from absaug.corpus import Dataset, Instance, Polarity
from absaug.llm_gateway import absa_prompt

LABEL_WORDS = {p: p.value for p in Polarity}

#: deterministic wrong label for scripting inconsistent predictions
WRONG = {
    Polarity.POSITIVE: Polarity.NEGATIVE,
    Polarity.NEUTRAL: Polarity.POSITIVE,
    Polarity.NEGATIVE: Polarity.NEUTRAL,
}


def make_instance(
    i: int,
    label: Polarity,
    origin: str = "original",
    aspect: str | None = None,
    sentence: str | None = None,
) -> Instance:
    aspect = aspect or f"thing{i}"
    sentence = sentence or f"sample sentence {i} about the {aspect} being discussed"
    return Instance(
        sentence=sentence,
        aspect=aspect,
        label=label,
        source_id=f"id{i}",
        origin=origin,
    )


def make_dataset(counts: dict[Polarity, int], name: str = "synthetic") -> Dataset:
    """One instance per count, unique aspect terms, stable order."""
    instances = []
    i = 0
    for label, count in counts.items():
        for _ in range(count):
            instances.append(make_instance(i, label))
            i += 1
    return Dataset(split="train", name=name, instances=tuple(instances))


# --- end-to-end fixture -----------------------------------------------------
#
# 12 training instances (6 positive / 2 neutral / 4 negative) plus a mock
# script that answers every generation and prediction prompt the pipeline
# can issue. Candidate plans per instance index:
#   i % 4 == 0 -> mixed pool (consistent + inconsistent + invalid)
#   i % 4 == 1 -> all consistent          (rejected set empty)
#   i % 4 == 2 -> all inconsistent        (chosen set empty)
#   i % 4 == 3 -> mixed pool again
# Candidate 2 of mixed pools omits the aspect term, so pools keep exactly
# n members while exercising the invalid path.

FIXTURE_LABELS = (
    [Polarity.POSITIVE] * 6 + [Polarity.NEUTRAL] * 2 + [Polarity.NEGATIVE] * 4
)


def fixture_instances() -> list[Instance]:
    instances = []
    for i, label in enumerate(FIXTURE_LABELS):
        aspect = f"widget{i}"
        sentence = (
            f"review number {i} says the {aspect} works with mixed results "
            f"alpha{i} beta{i % 3} gamma{i % 5}"
        )
        instances.append(
            Instance(
                sentence=sentence,
                aspect=aspect,
                label=label,
                source_id=f"fx{i}",
                origin="original",
            )
        )
    return instances


def _candidate_texts(inst: Instance, i: int, n: int) -> list[str]:
    base = f"the {inst.aspect} performs notably well in trial alpha{i}"
    texts = []
    for j in range(n):
        if i % 4 in (0, 3) and j == 2:
            texts.append(f"this trial {j} lacks the component entirely delta{i}")
        elif j == 1:
            texts.append(
                f"Here is the enhanced sentence: the {inst.aspect} shows outcome "
                f"number {j} in round beta{i}"
            )
        else:
            texts.append(f"{base} variant {j} epsilon{j}")
    return texts


def _predicted_label(inst: Instance, i: int, j: int) -> Polarity:
    if i % 4 == 1:
        return inst.label
    if i % 4 == 2:
        return WRONG[inst.label]
    return inst.label if j == 0 else WRONG[inst.label]


def build_mock_script(instances: list[Instance], n: int) -> list[dict]:
    entries: list[dict] = []
    for i, inst in enumerate(instances):
        texts = _candidate_texts(inst, i, n)
        entries.append({"prompt": build_prompt(inst), "completions": texts})
        for j, text in enumerate(texts):
            cleaned = strip_boilerplate(text.strip())
            if inst.aspect.lower() not in cleaned.lower():
                continue  # invalid candidate: the scorer never asks about it
            label = _predicted_label(inst, i, j)
            entries.append(
                {"prompt": absa_prompt(cleaned, inst.aspect), "completions": [label.value]}
            )
    return entries


@pytest.fixture
def pipeline_fixture(tmp_path: Path) -> dict:
    """Writes train.jsonl, mock_script.jsonl and a config file; returns paths."""
    instances = fixture_instances()
    train = tmp_path / "train.jsonl"
    train.write_bytes(
        b"".join(
            (
                json.dumps(
                    {
                        "sentence": inst.sentence,
                        "aspect": inst.aspect,
                        "label": inst.label.value,
                        "origin": inst.origin,
                        "source_id": inst.source_id,
                    }
                )
                + "\n"
            ).encode("utf-8")
            for inst in instances
        )
    )
    n = 3
    script = tmp_path / "mock_script.jsonl"
    script.write_text(
        "\n".join(json.dumps(e) for e in build_mock_script(instances, n)) + "\n",
        encoding="utf-8",
    )
    config = tmp_path / "config.json"
    config.write_text(
        json.dumps(
            {
                "backend": "mock",
                "mock_script": str(script),
                "n_candidates": n,
                "seed": 13,
                "lda_iterations": 60,
                "lda_fold_in_iterations": 20,
                "retry_backoff_s": 0.0,
            }
        ),
        encoding="utf-8",
    )
    return {
        "train": train,
        "script": script,
        "config": config,
        "instances": instances,
        "n": n,
        "tmp_path": tmp_path,
    }
