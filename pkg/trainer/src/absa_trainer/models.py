"""Tiny byte-level language models and checkpoint handling.

These are deliberately small stand-ins for the billion-parameter models the
full setup fine-tunes: they expose exactly what the training objectives
need (log-probability of a completion given its prompt) while staying
trainable on a laptop CPU in seconds.
"""
from __future__ import annotations

import json
from pathlib import Path

import torch
from torch import nn

CONFIG_FILE = "config.json"
WEIGHTS_FILE = "weights.pt"


class TinyBigramLM(nn.Module):
    """Byte bigram model: a learned 256x256 table of transition logits.

    Zero-initialized, so an untrained policy matches its reference copy
    exactly and the first DPO loss is log(2).
    """

    model_type = "tiny-bigram-lm"

    def __init__(self) -> None:
        super().__init__()
        self.logits = nn.Parameter(torch.zeros(256, 256))

    def completion_logprob(self, prompt: str, completion: str) -> torch.Tensor:
        """Sum of log p(byte | previous byte) over the completion bytes."""
        prompt_bytes = prompt.encode("utf-8") or b"\x00"
        completion_bytes = completion.encode("utf-8")
        if not completion_bytes:
            return self.logits.sum() * 0.0
        sequence = torch.tensor(
            list(prompt_bytes[-1:] + completion_bytes), dtype=torch.long
        )
        prev, nxt = sequence[:-1], sequence[1:]
        log_probs = torch.log_softmax(self.logits[prev], dim=-1)
        return log_probs.gather(1, nxt.unsqueeze(1)).sum()


MODEL_REGISTRY = {TinyBigramLM.model_type: TinyBigramLM}


def load_base_model(base_model_id: str) -> nn.Module:
    """A fresh registry model, or the weights of a previous checkpoint."""
    if base_model_id in MODEL_REGISTRY:
        return MODEL_REGISTRY[base_model_id]()
    path = Path(base_model_id)
    config_path = path / CONFIG_FILE
    if not config_path.exists():
        raise ValueError(
            f"unknown base model {base_model_id!r}: not in "
            f"{sorted(MODEL_REGISTRY)} and not a checkpoint directory"
        )
    config = json.loads(config_path.read_text(encoding="utf-8"))
    model_type = config.get("model_type")
    if model_type not in MODEL_REGISTRY:
        raise ValueError(f"checkpoint has unknown model_type {model_type!r}")
    model = MODEL_REGISTRY[model_type]()
    model.load_state_dict(torch.load(path / WEIGHTS_FILE, weights_only=True))
    return model


def save_checkpoint(model: nn.Module, out_dir: str | Path, train_config: dict) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = {"model_type": model.model_type, "train": train_config}
    (out_dir / CONFIG_FILE).write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    torch.save(model.state_dict(), out_dir / WEIGHTS_FILE)
    return out_dir
