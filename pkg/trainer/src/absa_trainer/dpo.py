"""Direct preference optimization over exported preference pairs.

Standard DPO: the policy starts as a copy of the reference model and is
pushed to widen the log-probability margin between chosen and rejected
completions, scaled by beta, through -log(sigmoid(margin)). At step zero
the policy equals the reference, so the loss starts at log(2) and falls as
the margin opens.
"""
from __future__ import annotations

import copy
from dataclasses import asdict, dataclass
from pathlib import Path

import torch
import torch.nn.functional as F

from .data import load_preference_dataset
from .models import load_base_model, save_checkpoint
from .runner import LossLog, iter_batches


@dataclass(frozen=True)
class DpoHyperparams:
    beta: float = 0.1
    learning_rate: float = 1e-3
    batch_size: int = 4
    steps: int = 50
    seed: int = 0


def dpo_train(
    pref_path: str | Path,
    base_model_id: str,
    hyperparams: DpoHyperparams = DpoHyperparams(),
    out_dir: str | Path = "checkpoints/dpo",
) -> Path:
    records = load_preference_dataset(pref_path)
    hp = hyperparams
    torch.manual_seed(hp.seed)
    policy = load_base_model(base_model_id)
    reference = copy.deepcopy(policy)
    reference.requires_grad_(False)
    reference.eval()
    optimizer = torch.optim.Adam(policy.parameters(), lr=hp.learning_rate)

    log = LossLog(
        out_dir,
        {"objective": "dpo", "base_model": base_model_id, "records": len(records), **asdict(hp)},
    )
    for step, batch in enumerate(iter_batches(records, hp.batch_size, hp.steps, hp.seed)):
        losses = []
        for rec in batch:
            policy_chosen = policy.completion_logprob(rec.prompt, rec.chosen)
            policy_rejected = policy.completion_logprob(rec.prompt, rec.rejected)
            with torch.no_grad():
                ref_chosen = reference.completion_logprob(rec.prompt, rec.chosen)
                ref_rejected = reference.completion_logprob(rec.prompt, rec.rejected)
            margin = hp.beta * (
                (policy_chosen - ref_chosen) - (policy_rejected - ref_rejected)
            )
            losses.append(-F.logsigmoid(margin))
        loss = torch.stack(losses).mean()
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        log.record(step, float(loss.detach()))

    return save_checkpoint(
        policy, out_dir, {"objective": "dpo", "base_model": base_model_id, **asdict(hp)}
    )
