"""Fine-tuning consumers for the absaug export formats.

Reads only the exported JSONL files; schema validation happens before any
training step. Models live in a small registry of desk-scale stand-ins.
"""

from .data import PreferenceRecord, SchemaError, SftRecord, load_preference_dataset, load_sft_dataset
from .dpo import DpoHyperparams, dpo_train
from .models import MODEL_REGISTRY, TinyBigramLM, load_base_model
from .runner import read_loss_log
from .sft import SftHyperparams, sft_train

__version__ = "0.1.0"

__all__ = [
    "DpoHyperparams",
    "MODEL_REGISTRY",
    "PreferenceRecord",
    "SchemaError",
    "SftHyperparams",
    "SftRecord",
    "TinyBigramLM",
    "dpo_train",
    "load_base_model",
    "load_preference_dataset",
    "load_sft_dataset",
    "read_loss_log",
    "sft_train",
]
