"""Accuracy and macro-F1 scoring of polarity predictions against gold data.

The confusion matrix has one row per gold label and a fourth predicted
column for unparseable model output, which counts as incorrect for every
gold label and never contributes to a real label's precision denominator.
Per-label F1 uses the 0-when-undefined convention; macro-F1 is the
unweighted mean over the three labels.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .corpus import POLARITY_ORDER, Dataset, Polarity
from .errors import DataError, GatewayError
from .llm_gateway import UNPARSEABLE, LlmGateway, Prediction

#: Predicted-column order of the confusion matrix.
PRED_COLUMNS = tuple(p.value for p in POLARITY_ORDER) + (UNPARSEABLE,)


@dataclass
class EvalReport:
    confusion: dict[str, dict[str, int]]
    accuracy: float
    macro_f1: float
    per_label_f1: dict[str, float]
    total: int

    def to_json_dict(self) -> dict:
        return {
            "total": self.total,
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "per_label_f1": dict(self.per_label_f1),
            "confusion": {g: dict(row) for g, row in self.confusion.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    def to_text_table(self) -> str:
        width = max(12, *(len(c) + 2 for c in PRED_COLUMNS))
        header = "gold \\ pred".ljust(width) + "".join(c.rjust(width) for c in PRED_COLUMNS)
        lines = [header]
        for gold in POLARITY_ORDER:
            row = self.confusion[gold.value]
            lines.append(
                gold.value.ljust(width)
                + "".join(str(row[c]).rjust(width) for c in PRED_COLUMNS)
            )
        lines.append("")
        lines.append(f"accuracy  {self.accuracy:.4f}")
        lines.append(f"macro_f1  {self.macro_f1:.4f}")
        for label in POLARITY_ORDER:
            lines.append(f"f1[{label.value}]  {self.per_label_f1[label.value]:.4f}")
        return "\n".join(lines)


def _prediction_column(pred: Prediction) -> str:
    if isinstance(pred, Polarity):
        return pred.value
    if pred == UNPARSEABLE:
        return UNPARSEABLE
    raise DataError(f"invalid prediction value {pred!r}")


def evaluate(gold: Dataset, predictions: Sequence[tuple[str, Prediction]]) -> EvalReport:
    """Score predictions that cover exactly the gold instance ids."""
    gold_by_id: dict[str, Polarity] = {}
    for inst in gold.instances:
        if inst.source_id in gold_by_id:
            raise DataError(f"duplicate source_id {inst.source_id!r} in gold data")
        gold_by_id[inst.source_id] = inst.label

    pred_by_id: dict[str, Prediction] = {}
    for source_id, pred in predictions:
        if source_id in pred_by_id:
            raise DataError(f"duplicate source_id {source_id!r} in predictions")
        pred_by_id[source_id] = pred

    missing = sorted(set(gold_by_id) - set(pred_by_id))
    extra = sorted(set(pred_by_id) - set(gold_by_id))
    if missing or extra:
        raise DataError(
            f"predictions do not cover the gold ids: missing {missing!r}, extra {extra!r}"
        )

    confusion = {g.value: {c: 0 for c in PRED_COLUMNS} for g in POLARITY_ORDER}
    for source_id, gold_label in gold_by_id.items():
        confusion[gold_label.value][_prediction_column(pred_by_id[source_id])] += 1

    total = len(gold_by_id)
    correct = sum(confusion[p.value][p.value] for p in POLARITY_ORDER)
    accuracy = correct / total if total else 0.0

    per_label_f1: dict[str, float] = {}
    for label in POLARITY_ORDER:
        name = label.value
        tp = confusion[name][name]
        row_total = sum(confusion[name].values())
        col_total = sum(confusion[g.value][name] for g in POLARITY_ORDER)
        precision = tp / col_total if col_total else 0.0
        recall = tp / row_total if row_total else 0.0
        per_label_f1[name] = (
            2 * precision * recall / (precision + recall) if precision + recall else 0.0
        )
    macro_f1 = sum(per_label_f1.values()) / len(per_label_f1)

    return EvalReport(
        confusion=confusion,
        accuracy=accuracy,
        macro_f1=macro_f1,
        per_label_f1=per_label_f1,
        total=total,
    )


def predict_split(
    test: Dataset, gateway: LlmGateway
) -> tuple[list[tuple[str, Prediction]], list[tuple[str, str]]]:
    """Predict every test instance, in order.

    Gateway failures do not stop the run; they come back as a per-id
    failure report alongside the successful predictions.
    """

    def run(inst) -> tuple[str, Prediction | None, str | None]:
        try:
            return inst.source_id, gateway.predict_sentiment(inst.sentence, inst.aspect), None
        except GatewayError as exc:
            return inst.source_id, None, str(exc)

    predictions: list[tuple[str, Prediction]] = []
    failures: list[tuple[str, str]] = []
    for source_id, pred, err in gateway.map_ordered(run, test.instances):
        if err is None:
            predictions.append((source_id, pred))
        else:
            failures.append((source_id, err))
    return predictions, failures
