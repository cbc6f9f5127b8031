"""Candidate generation: fill the enhancement prompt, sample N completions,
validate each into an AugmentedCandidate.

Invalid candidates are returned flagged, never dropped: the preference
builder needs pools of exactly N members.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import Dataset, Instance
from .errors import DataError
from .llm_gateway import GenRequest, LlmGateway, escape_field

logger = logging.getLogger(__name__)

AUGMENT_PROMPT_TEMPLATE = """\
You are a text enhancer designed to optimize text specifically for aspect-based sentiment analysis (ABSA) models by enriching, clarifying, and standardizing content. Your goal is to enhance the given sentence by improving grammar, resolving ambiguities, and inferring missing information, thereby boosting the ABSA model's performance. Given an original sentence, a specific aspect term within that sentence, and the sentiment associated with that aspect term (Positive, Negative, or Neutral), generate a new sentence that:
1. Clearly includes the provided aspect term.
2. Retains the original sentiment toward the aspect term.
3. Is close in length to the original sentence.
4. Contains only the enhanced sentence without any additional explanation or irrelevant content.
5. Don't annotate (like Here is the enhanced sentence:), do not explain, just output enhanced text.
The given sentence, aspect-term, and sentiment are the following:
Sentence: "{sentence}"
Aspect: "{aspect}"
Sentiment: "{sentiment}"\
"""

#: Case-insensitive prefixes stripped once from completions; models emit
#: these despite rule 5 of the prompt.
BOILERPLATE_PREFIXES = (
    "here is the enhanced sentence:",
    "enhanced sentence:",
    "enhanced text:",
)

REJECTION_REASONS = ("missing_aspect", "empty", "boilerplate")


@dataclass(frozen=True)
class AugmentedCandidate:
    """A generated sentence tied to the instance it was generated for."""

    source: Instance
    text: str
    valid: bool
    rejection_reason: str | None = None


def build_prompt(instance: Instance) -> str:
    """Fill the enhancement template for one instance.

    The sentiment is rendered capitalized, matching the parenthetical in the
    template; double quotes inside fields are backslash-escaped because the
    template wraps fields in double quotes.
    """
    return AUGMENT_PROMPT_TEMPLATE.format(
        sentence=escape_field(instance.sentence),
        aspect=escape_field(instance.aspect),
        sentiment=instance.label.value.capitalize(),
    )


def strip_boilerplate(text: str) -> str:
    """Remove one leading boilerplate prefix, if present."""
    lowered = text.lower()
    for prefix in BOILERPLATE_PREFIXES:
        if lowered.startswith(prefix):
            return text[len(prefix):].strip()
    return text


def validate_candidate(source: Instance, completion: str) -> AugmentedCandidate:
    """Turn one raw completion into a flagged candidate.

    Empty completions are rejected outright; completions that are nothing
    but boilerplate are rejected as such; the rest must contain the aspect
    term case-insensitively.
    """
    raw = completion.strip()
    if not raw:
        return AugmentedCandidate(source=source, text="", valid=False, rejection_reason="empty")
    text = strip_boilerplate(raw)
    if not text:
        return AugmentedCandidate(
            source=source, text="", valid=False, rejection_reason="boilerplate"
        )
    if source.aspect.lower() not in text.lower():
        return AugmentedCandidate(
            source=source, text=text, valid=False, rejection_reason="missing_aspect"
        )
    if abs(len(text) - len(source.sentence)) > 2 * len(source.sentence):
        logger.warning(
            "candidate for %s is far from the source length (%d vs %d chars)",
            source.source_id, len(text), len(source.sentence),
        )
    return AugmentedCandidate(source=source, text=text, valid=True)


def augment(
    instance: Instance,
    n: int,
    gateway: LlmGateway,
    *,
    temperature: float = 1.0,
    top_k: int | None = 50,
    max_tokens: int = 128,
    seed: int | None = None,
) -> list[AugmentedCandidate]:
    """Generate and validate exactly ``n`` candidates for one instance."""
    if n < 1:
        raise ValueError("n must be >= 1")
    req = GenRequest(
        prompt=build_prompt(instance),
        n_samples=n,
        temperature=temperature,
        top_k=top_k,
        max_tokens=max_tokens,
        seed=seed,
    )
    resp = gateway.generate(req)
    return [validate_candidate(instance, completion) for completion in resp.completions]


def augment_dataset(
    dataset: Dataset,
    n: int,
    gateway: LlmGateway,
    *,
    temperature: float = 1.0,
    top_k: int | None = 50,
    max_tokens: int = 128,
    seed: int | None = None,
) -> list[list[AugmentedCandidate]]:
    """One candidate pool per instance, in dataset order."""
    return gateway.map_ordered(
        lambda inst: augment(
            inst, n, gateway,
            temperature=temperature, top_k=top_k, max_tokens=max_tokens, seed=seed,
        ),
        dataset.instances,
    )


def write_candidates_jsonl(pools: Sequence[Sequence[AugmentedCandidate]]) -> bytes:
    lines = []
    for pool in pools:
        for cand in pool:
            lines.append(
                json.dumps(
                    {
                        "source_id": cand.source.source_id,
                        "text": cand.text,
                        "valid": cand.valid,
                        "rejection_reason": cand.rejection_reason,
                    },
                    ensure_ascii=False,
                )
            )
    return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")


def save_candidates_jsonl(pools: Sequence[Sequence[AugmentedCandidate]], path: str | Path) -> None:
    Path(path).write_bytes(write_candidates_jsonl(pools))


def read_candidate_pools(
    data: bytes | str, dataset: Dataset, n: int
) -> list[list[AugmentedCandidate]]:
    """Rebuild candidate pools from JSONL, joined positionally to ``dataset``.

    The file must hold exactly n rows per instance, in dataset order; the
    positional join is verified against the stored source_ids (duplicated
    instances legitimately share one source_id, so ids alone cannot join).
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    rows = [json.loads(line) for line in text.splitlines() if line.strip()]
    expected = len(dataset) * n
    if len(rows) != expected:
        raise DataError(
            f"candidate file has {len(rows)} rows, expected {expected} "
            f"({len(dataset)} instances x {n})"
        )
    pools: list[list[AugmentedCandidate]] = []
    for i, inst in enumerate(dataset.instances):
        pool = []
        for j in range(n):
            row = rows[i * n + j]
            if row["source_id"] != inst.source_id:
                raise DataError(
                    f"candidate row {i * n + j} has source_id {row['source_id']!r}, "
                    f"expected {inst.source_id!r}"
                )
            reason = row.get("rejection_reason")
            if reason is not None and reason not in REJECTION_REASONS:
                raise DataError(f"invalid rejection_reason {reason!r} in candidate row {i * n + j}")
            pool.append(
                AugmentedCandidate(
                    source=inst,
                    text=row["text"],
                    valid=bool(row["valid"]),
                    rejection_reason=reason,
                )
            )
        pools.append(pool)
    return pools
