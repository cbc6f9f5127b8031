"""Export of downstream training artifacts.

Three files leave the pipeline: the DPO preference JSONL (prompt / chosen /
rejected records), the SFT JSONL for the sentiment model, and a run
manifest capturing every knob the run actually used. All files are UTF-8
with LF line endings.
"""
from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import Dataset
from .errors import DataError
from .llm_gateway import absa_prompt
from .preference_builder import BRANCH_CHOSEN_EMPTY, BRANCH_NORMAL, BRANCH_REJECTED_EMPTY, PreferencePair

#: Keys of one DPO record, in file order. prompt/chosen/rejected follow the
#: de-facto DPO-trainer dataset convention.
DPO_KEYS = ("prompt", "chosen", "rejected", "source_id", "branch")

_BRANCHES = (BRANCH_NORMAL, BRANCH_CHOSEN_EMPTY, BRANCH_REJECTED_EMPTY)


def write_preference_jsonl(pairs: Sequence[PreferencePair]) -> bytes:
    lines = []
    for pair in pairs:
        lines.append(
            json.dumps(
                {
                    "prompt": pair.prompt,
                    "chosen": pair.chosen,
                    "rejected": pair.rejected,
                    "source_id": pair.source_id,
                    "branch": pair.branch,
                },
                ensure_ascii=False,
            )
        )
    return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")


def save_preference_jsonl(pairs: Sequence[PreferencePair], path: str | Path) -> None:
    Path(path).write_bytes(write_preference_jsonl(pairs))


def validate_preference_jsonl(data: bytes | str) -> list[dict]:
    """Check a DPO export against its schema; returns the parsed records."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    records = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        obj = json.loads(line)
        if not isinstance(obj, dict):
            raise DataError(f"DPO line {line_no}: not a JSON object")
        if set(obj) != set(DPO_KEYS):
            raise DataError(
                f"DPO line {line_no}: keys {sorted(obj)} do not match schema {sorted(DPO_KEYS)}"
            )
        for key in DPO_KEYS:
            if not isinstance(obj[key], str):
                raise DataError(f"DPO line {line_no}: {key} must be a string")
        if not obj["prompt"]:
            raise DataError(f"DPO line {line_no}: empty prompt")
        if obj["branch"] not in _BRANCHES:
            raise DataError(f"DPO line {line_no}: unknown branch {obj['branch']!r}")
        records.append(obj)
    return records


def export_sft(d: Dataset) -> list[dict]:
    """One SFT record per instance: prediction prompt plus the label word.

    Completions are the bare lowercase label words, matching what the
    sentiment predictor parses, so training and prediction share a format.
    """
    return [
        {
            "prompt": absa_prompt(inst.sentence, inst.aspect),
            "completion": inst.label.value,
            "origin": inst.origin,
        }
        for inst in d.instances
    ]


def write_sft_jsonl(d: Dataset) -> bytes:
    lines = [json.dumps(rec, ensure_ascii=False) for rec in export_sft(d)]
    return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")


def save_sft_jsonl(d: Dataset, path: str | Path) -> None:
    Path(path).write_bytes(write_sft_jsonl(d))


def export_manifest(
    config: Mapping,
    seeds: Mapping,
    model_ids: Mapping,
    dataset_hashes: Mapping,
) -> dict:
    """Assemble the run manifest: every default actually used, plus hashes."""
    manifest: dict = {"created_at": datetime.now(timezone.utc).isoformat()}
    manifest.update(config)
    manifest["seeds"] = dict(seeds)
    manifest["model_ids"] = dict(model_ids)
    manifest["dataset_hashes"] = dict(dataset_hashes)
    return manifest


def write_manifest(manifest: Mapping) -> bytes:
    return (json.dumps(manifest, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def save_manifest(manifest: Mapping, path: str | Path) -> None:
    Path(path).write_bytes(write_manifest(manifest))
