"""Loading and validation of the exported training files.

The cross-component contract is the file schemas, never in-process objects:
preference records need prompt/chosen/rejected with chosen != rejected, SFT
records need prompt/completion. Validation happens before any training
step, and the loaders never mutate the input files.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class SchemaError(ValueError):
    """Input file violates the export contract."""


@dataclass(frozen=True)
class PreferenceRecord:
    prompt: str
    chosen: str
    rejected: str


@dataclass(frozen=True)
class SftRecord:
    prompt: str
    completion: str


def _rows(path: str | Path):
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"line {line_no}: invalid JSON ({exc.msg})") from exc
        if not isinstance(obj, dict):
            raise SchemaError(f"line {line_no}: expected a JSON object")
        yield line_no, obj


def _require_text(obj: dict, key: str, line_no: int) -> str:
    if key not in obj:
        raise SchemaError(f"line {line_no}: missing key {key!r}")
    value = obj[key]
    if not isinstance(value, str) or not value.strip():
        raise SchemaError(f"line {line_no}: {key} must be a non-empty string")
    return value


def load_preference_dataset(path: str | Path) -> list[PreferenceRecord]:
    records = []
    for line_no, obj in _rows(path):
        prompt = _require_text(obj, "prompt", line_no)
        chosen = _require_text(obj, "chosen", line_no)
        rejected = _require_text(obj, "rejected", line_no)
        if chosen.strip() == rejected.strip():
            raise SchemaError(f"line {line_no}: chosen and rejected are identical")
        records.append(PreferenceRecord(prompt=prompt, chosen=chosen, rejected=rejected))
    if not records:
        raise SchemaError(f"{path}: no preference records")
    return records


def load_sft_dataset(path: str | Path) -> list[SftRecord]:
    records = []
    for line_no, obj in _rows(path):
        records.append(
            SftRecord(
                prompt=_require_text(obj, "prompt", line_no),
                completion=_require_text(obj, "completion", line_no),
            )
        )
    if not records:
        raise SchemaError(f"{path}: no SFT records")
    return records
