"""ABSA dataset loading, validation, serialization and label statistics.

Two on-disk forms are supported: the SemEval aspect-term XML format
(read-only) and a canonical JSONL form (read/write) with keys
``sentence``, ``aspect``, ``label`` and optional ``origin``, ``source_id``.
"""
from __future__ import annotations

import hashlib
import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Iterator

from .errors import DataError, ParseError


class Polarity(str, Enum):
    POSITIVE = "positive"
    NEUTRAL = "neutral"
    NEGATIVE = "negative"


#: Canonical label order used by reports and CLI output.
POLARITY_ORDER = (Polarity.POSITIVE, Polarity.NEUTRAL, Polarity.NEGATIVE)

ORIGINS = ("original", "duplicate", "augmented")

_JSONL_KEYS = ("sentence", "aspect", "label")


def parse_polarity(value: str) -> Polarity:
    """Map a label string to a Polarity, raising DataError for anything else."""
    try:
        return Polarity(value)
    except ValueError:
        raise DataError(f"invalid label {value!r}") from None


@dataclass(frozen=True)
class Instance:
    """One labeled ABSA example: a sentence, an aspect term inside it, a polarity.

    ``origin`` tracks provenance through the pipeline: ``original`` (from the
    source corpus), ``duplicate`` (oversampled copy) or ``augmented``
    (model-generated text). Duplicates keep the ``source_id`` of the instance
    they were copied from; augmented instances keep the source_id of the
    instance they were generated for.
    """

    sentence: str
    aspect: str
    label: Polarity
    source_id: str
    origin: str = "original"

    def __post_init__(self) -> None:
        if not self.sentence.strip():
            raise DataError("instance sentence is empty")
        if not self.aspect.strip():
            raise DataError("instance aspect is empty")
        if self.origin not in ORIGINS:
            raise DataError(f"invalid origin {self.origin!r}")
        # Aspect containment for augmented text is the augmenter's contract,
        # not a structural invariant of the record.
        if self.origin in ("original", "duplicate") and self.aspect.lower() not in self.sentence.lower():
            raise DataError(
                f"aspect {self.aspect!r} does not occur in sentence {self.sentence!r}"
            )


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of instances; iteration order equals file order."""

    split: str
    name: str
    instances: tuple[Instance, ...]

    def __post_init__(self) -> None:
        if self.split not in ("train", "test"):
            raise DataError(f"invalid split {self.split!r}")

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self) -> Iterator[Instance]:
        return iter(self.instances)

    def label_counts(self) -> dict[Polarity, int]:
        counts = {p: 0 for p in POLARITY_ORDER}
        for inst in self.instances:
            counts[inst.label] += 1
        return counts


@dataclass
class SkipReport:
    """Audit trail of records dropped during parsing."""

    conflict_aspects: int = 0
    details: list[str] = field(default_factory=list)


def label_counts(d: Dataset) -> dict[Polarity, int]:
    """Exact per-label instance counts; always contains all three labels."""
    return d.label_counts()


def _as_bytes(data: bytes | str | IO[bytes]) -> bytes:
    if isinstance(data, bytes):
        return data
    if isinstance(data, str):
        return data.encode("utf-8")
    return data.read()


def parse_semeval_xml(
    data: bytes | str | IO[bytes], *, split: str = "train", name: str = ""
) -> tuple[Dataset, SkipReport]:
    """Parse the SemEval aspect-term XML format.

    Produces one Instance per (sentence, aspectTerm) pair in document order.
    Aspects labeled ``conflict`` are dropped and counted in the returned
    SkipReport; any other unknown polarity raises DataError. Character
    offsets are discarded: nothing downstream consumes spans.
    """
    raw = _as_bytes(data)
    try:
        root = ET.fromstring(raw)
    except ET.ParseError as exc:
        line, col = exc.position
        raise ParseError(f"malformed XML at line {line}, column {col}: {exc.msg}") from exc

    report = SkipReport()
    instances: list[Instance] = []
    for sent_idx, sent in enumerate(root.iter("sentence")):
        sent_id = sent.get("id") or f"s{sent_idx}"
        text_el = sent.find("text")
        terms = sent.findall("./aspectTerms/aspectTerm")
        if text_el is None or text_el.text is None or not text_el.text.strip():
            if terms:
                raise DataError(f"sentence {sent_id!r} has aspect terms but no text")
            continue
        sentence = text_el.text
        for term_idx, term_el in enumerate(terms):
            term = term_el.get("term")
            polarity = term_el.get("polarity")
            if term is None or polarity is None:
                raise DataError(
                    f"aspectTerm in sentence {sent_id!r} lacks a term or polarity attribute"
                )
            if polarity == "conflict":
                report.conflict_aspects += 1
                report.details.append(f"{sent_id}:{term_idx} conflict aspect {term!r}")
                continue
            label = parse_polarity(polarity)
            instances.append(
                Instance(
                    sentence=sentence,
                    aspect=term,
                    label=label,
                    source_id=f"{sent_id}:{term_idx}",
                    origin="original",
                )
            )
    dataset = Dataset(split=split, name=name, instances=tuple(instances))
    return dataset, report


def parse_jsonl(
    data: bytes | str | IO[bytes], *, split: str = "train", name: str = ""
) -> Dataset:
    """Parse canonical JSONL: one object per line, keys sentence/aspect/label.

    ``origin`` defaults to ``original`` and ``source_id`` to the 1-based line
    number when absent. Unknown keys are ignored.
    """
    text = _as_bytes(data).decode("utf-8")
    instances: list[Instance] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON at line {line_no}: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise ParseError(f"expected a JSON object at line {line_no}")
        for key in _JSONL_KEYS:
            if key not in obj:
                raise DataError(f"missing key {key!r} at line {line_no}")
        label_raw = obj["label"]
        try:
            label = Polarity(label_raw)
        except ValueError:
            raise DataError(f"invalid label {label_raw!r} at line {line_no}") from None
        try:
            instances.append(
                Instance(
                    sentence=obj["sentence"],
                    aspect=obj["aspect"],
                    label=label,
                    source_id=str(obj.get("source_id") or line_no),
                    origin=obj.get("origin", "original"),
                )
            )
        except DataError as exc:
            raise DataError(f"line {line_no}: {exc}") from None
    return Dataset(split=split, name=name, instances=tuple(instances))


def write_jsonl(d: Dataset) -> bytes:
    """Serialize to canonical JSONL (UTF-8, LF, stable key order)."""
    lines = []
    for inst in d.instances:
        lines.append(
            json.dumps(
                {
                    "sentence": inst.sentence,
                    "aspect": inst.aspect,
                    "label": inst.label.value,
                    "origin": inst.origin,
                    "source_id": inst.source_id,
                },
                ensure_ascii=False,
            )
        )
    return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")


def save_jsonl(d: Dataset, path: str | Path) -> None:
    Path(path).write_bytes(write_jsonl(d))


def load_dataset(path: str | Path, *, split: str = "train") -> tuple[Dataset, SkipReport]:
    """Load a dataset from .xml (SemEval) or .jsonl, named after the file stem."""
    path = Path(path)
    raw = path.read_bytes()
    if path.suffix.lower() == ".xml":
        return parse_semeval_xml(raw, split=split, name=path.stem)
    return parse_jsonl(raw, split=split, name=path.stem), SkipReport()


def dataset_sha256(d: Dataset) -> str:
    """Content hash of the canonical serialization, for run manifests."""
    return hashlib.sha256(write_jsonl(d)).hexdigest()


def format_stats(d: Dataset) -> str:
    """Per-label counts, one 'label<TAB>count' line each, then a total line."""
    counts = d.label_counts()
    lines = [f"{p.value}\t{counts[p]}" for p in POLARITY_ORDER]
    lines.append(f"total\t{len(d)}")
    return "\n".join(lines)
