"""Supervised fine-tuning on exported prompt/completion records:
per-byte cross-entropy of the completion given its prompt.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

import torch

from .data import load_sft_dataset
from .models import load_base_model, save_checkpoint
from .runner import LossLog, iter_batches


@dataclass(frozen=True)
class SftHyperparams:
    learning_rate: float = 1e-5
    batch_size: int = 4
    steps: int = 50
    seed: int = 0


def sft_train(
    sft_path: str | Path,
    base_model_id: str,
    hyperparams: SftHyperparams = SftHyperparams(),
    out_dir: str | Path = "checkpoints/sft",
) -> Path:
    records = load_sft_dataset(sft_path)
    hp = hyperparams
    torch.manual_seed(hp.seed)
    model = load_base_model(base_model_id)
    optimizer = torch.optim.Adam(model.parameters(), lr=hp.learning_rate)

    log = LossLog(
        out_dir,
        {"objective": "sft", "base_model": base_model_id, "records": len(records), **asdict(hp)},
    )
    for step, batch in enumerate(iter_batches(records, hp.batch_size, hp.steps, hp.seed)):
        losses = []
        for rec in batch:
            n_bytes = max(len(rec.completion.encode("utf-8")), 1)
            losses.append(-model.completion_logprob(rec.prompt, rec.completion) / n_bytes)
        loss = torch.stack(losses).mean()
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        log.record(step, float(loss.detach()))

    return save_checkpoint(
        model, out_dir, {"objective": "sft", "base_model": base_model_id, **asdict(hp)}
    )
