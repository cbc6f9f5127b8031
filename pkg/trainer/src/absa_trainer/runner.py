"""Shared training-loop plumbing: seeded batch cycling and the loss log."""
from __future__ import annotations

import json
import random
from pathlib import Path
from typing import Iterator, Sequence, TypeVar

T = TypeVar("T")

LOSS_LOG_FILE = "loss_log.jsonl"


def iter_batches(records: Sequence[T], batch_size: int, steps: int, seed: int) -> Iterator[list[T]]:
    """Yield ``steps`` batches, reshuffling deterministically every epoch."""
    rng = random.Random(seed)
    order = list(records)
    pos = 0
    for _ in range(steps):
        batch: list[T] = []
        while len(batch) < batch_size:
            if pos == 0:
                rng.shuffle(order)
            batch.append(order[pos])
            pos = (pos + 1) % len(order)
        yield batch


class LossLog:
    """JSON-lines loss log: a header object, then one {step, loss} per step."""

    def __init__(self, out_dir: str | Path, header: dict) -> None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        self.path = out_dir / LOSS_LOG_FILE
        self._lines = [json.dumps({"event": "start", **header})]
        self._flush()

    def record(self, step: int, loss: float) -> None:
        self._lines.append(json.dumps({"step": step, "loss": loss}))
        self._flush()

    def _flush(self) -> None:
        self.path.write_text("\n".join(self._lines) + "\n", encoding="utf-8")


def read_loss_log(out_dir: str | Path) -> tuple[dict, list[dict]]:
    lines = (Path(out_dir) / LOSS_LOG_FILE).read_text(encoding="utf-8").splitlines()
    header = json.loads(lines[0])
    return header, [json.loads(line) for line in lines[1:]]
