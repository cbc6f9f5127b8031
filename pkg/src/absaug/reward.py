"""Reward scoring for candidate pools.

Reward 1 is sentiment consistency: a reward model predicts the polarity of
the candidate text and the prediction is compared with the gold label.
Reward 2 is topic relevance: cosine similarity between the topic vectors of
the candidate and its source sentence.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .augmenter import AugmentedCandidate
from .corpus import Polarity
from .errors import DataError, GatewayError
from .llm_gateway import UNPARSEABLE, LlmGateway, Prediction
from .topic_model import DEFAULT_FOLD_IN_ITERATIONS, LdaModel, infer, relevance


@dataclass(frozen=True)
class ScoredRecord:
    """One row of the scored-candidates JSONL, the preference builder's input."""

    source_id: str
    pool_index: int
    text: str
    predicted: str
    consistent: bool
    relevance: float


@dataclass(frozen=True)
class ScoredCandidate:
    candidate: AugmentedCandidate
    predicted: Prediction
    consistent: bool
    relevance: float
    pool_index: int

    def record(self) -> ScoredRecord:
        predicted = (
            self.predicted.value if isinstance(self.predicted, Polarity) else str(self.predicted)
        )
        return ScoredRecord(
            source_id=self.candidate.source.source_id,
            pool_index=self.pool_index,
            text=self.candidate.text,
            predicted=predicted,
            consistent=self.consistent,
            relevance=self.relevance,
        )


def score_pool(
    candidates: Sequence[AugmentedCandidate],
    lda: LdaModel,
    gateway: LlmGateway,
    *,
    fold_in_iterations: int = DEFAULT_FOLD_IN_ITERATIONS,
    source_vector: np.ndarray | None = None,
) -> list[ScoredCandidate]:
    """Score one pool of candidates sharing a single source instance.

    Invalid candidates are marked UNPARSEABLE without a prediction call.
    The source topic vector is inferred once per pool; callers scoring many
    pools of the same source may pass it in precomputed.
    """
    if not candidates:
        return []
    source = candidates[0].source
    for cand in candidates[1:]:
        if cand.source != source:
            raise DataError("candidates in a pool must share one source instance")
    if source_vector is None:
        source_vector = infer(lda, source.sentence, fold_in_iterations)

    def predict(item: tuple[int, AugmentedCandidate]) -> Prediction:
        idx, cand = item
        try:
            return gateway.predict_sentiment(cand.text, source.aspect)
        except GatewayError as exc:
            raise GatewayError(f"prediction failed at pool_index {idx}: {exc}") from exc

    valid_items = [(i, c) for i, c in enumerate(candidates) if c.valid]
    valid_predictions = gateway.map_ordered(predict, valid_items)
    predictions: dict[int, Prediction] = {
        i: pred for (i, _), pred in zip(valid_items, valid_predictions)
    }

    scored = []
    for i, cand in enumerate(candidates):
        predicted = predictions.get(i, UNPARSEABLE)
        cand_vector = infer(lda, cand.text, fold_in_iterations)
        scored.append(
            ScoredCandidate(
                candidate=cand,
                predicted=predicted,
                consistent=predicted == source.label,
                relevance=relevance(cand_vector, source_vector),
                pool_index=i,
            )
        )
    return scored


def score_pools(
    pools: Sequence[Sequence[AugmentedCandidate]],
    lda: LdaModel,
    gateway: LlmGateway,
    *,
    fold_in_iterations: int = DEFAULT_FOLD_IN_ITERATIONS,
) -> list[list[ScoredCandidate]]:
    """Score many pools, inferring one source vector per distinct sentence."""
    cache: dict[str, np.ndarray] = {}
    scored: list[list[ScoredCandidate]] = []
    for pool in pools:
        if not pool:
            scored.append([])
            continue
        sentence = pool[0].source.sentence
        if sentence not in cache:
            cache[sentence] = infer(lda, sentence, fold_in_iterations)
        scored.append(
            score_pool(
                pool,
                lda,
                gateway,
                fold_in_iterations=fold_in_iterations,
                source_vector=cache[sentence],
            )
        )
    return scored


def write_scored_jsonl(pools: Sequence[Sequence[ScoredCandidate]]) -> bytes:
    lines = []
    for pool in pools:
        for sc in pool:
            rec = sc.record()
            lines.append(
                json.dumps(
                    {
                        "source_id": rec.source_id,
                        "pool_index": rec.pool_index,
                        "text": rec.text,
                        "predicted": rec.predicted,
                        "consistent": rec.consistent,
                        "relevance": rec.relevance,
                    },
                    ensure_ascii=False,
                )
            )
    return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")


def save_scored_jsonl(pools: Sequence[Sequence[ScoredCandidate]], path: str | Path) -> None:
    Path(path).write_bytes(write_scored_jsonl(pools))


def read_scored_pools(data: bytes | str) -> list[list[ScoredRecord]]:
    """Group scored rows back into pools.

    A new pool starts whenever pool_index resets to 0; within a pool the
    indices must increase by one and the source_id must not change.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    pools: list[list[ScoredRecord]] = []
    current: list[ScoredRecord] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        obj = json.loads(line)
        rec = ScoredRecord(
            source_id=obj["source_id"],
            pool_index=int(obj["pool_index"]),
            text=obj["text"],
            predicted=obj["predicted"],
            consistent=bool(obj["consistent"]),
            relevance=float(obj["relevance"]),
        )
        if rec.pool_index == 0:
            if current:
                pools.append(current)
            current = [rec]
        else:
            if not current or rec.pool_index != current[-1].pool_index + 1:
                raise DataError(f"scored file line {line_no}: pool_index out of sequence")
            if rec.source_id != current[0].source_id:
                raise DataError(f"scored file line {line_no}: source_id changes mid-pool")
            current.append(rec)
    if current:
        pools.append(current)
    return pools
