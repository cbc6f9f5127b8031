"""Run configuration: defaults, JSON config files, CLI-flag overrides.

Precedence is flags > file > defaults. The config file is a flat JSON
object whose keys match the PipelineConfig field names.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping

from .balancer import SETTINGS
from .errors import DataError
from .llm_gateway import LlmGateway, MockBackend, OpenAIBackend
from .preference_builder import MODES
from .topic_model import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    DEFAULT_FOLD_IN_ITERATIONS,
    DEFAULT_ITERATIONS,
    DEFAULT_K,
)

BACKEND_KINDS = ("openai", "mock")


@dataclass
class PipelineConfig:
    # dataset construction
    setting: str = "standard"
    n_candidates: int = 5
    seed: int = 0
    # topic model
    lda_k: int = DEFAULT_K
    lda_alpha: float = DEFAULT_ALPHA
    lda_beta: float = DEFAULT_BETA
    lda_iterations: int = DEFAULT_ITERATIONS
    lda_fold_in_iterations: int = DEFAULT_FOLD_IN_ITERATIONS
    # generation sampling
    temperature: float = 1.0
    top_k: int = 50
    max_tokens: int = 128
    predict_max_tokens: int = 16
    # gateway behavior
    retries: int = 3
    retry_backoff_s: float = 0.5
    concurrency: int = 4
    # backend selection
    backend: str = "openai"
    base_url: str = "http://localhost:8000/v1"
    model: str = ""
    reward_model: str = ""
    api_key_env: str = "OPENAI_API_KEY"
    timeout_s: float = 60.0
    mock_script: str = ""
    # reward ablation
    reward_mode: str = "full"

    def validate(self) -> "PipelineConfig":
        if self.setting not in SETTINGS:
            raise DataError(f"invalid setting {self.setting!r}")
        if self.reward_mode not in MODES:
            raise DataError(f"invalid reward_mode {self.reward_mode!r}")
        if self.backend not in BACKEND_KINDS:
            raise DataError(f"invalid backend {self.backend!r}")
        if self.n_candidates < 1:
            raise DataError("n_candidates must be >= 1")
        if self.backend == "mock" and not self.mock_script:
            raise DataError("mock backend requires mock_script")
        return self


_FIELD_NAMES = {f.name for f in fields(PipelineConfig)}


def load_config_file(path: str | Path) -> dict:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(obj, dict):
        raise DataError("config file must hold a JSON object")
    unknown = sorted(set(obj) - _FIELD_NAMES)
    if unknown:
        raise DataError(f"unknown config keys: {unknown!r}")
    return obj


def make_config(
    file_values: Mapping | None = None, overrides: Mapping | None = None
) -> PipelineConfig:
    """Merge defaults, config-file values and overrides (None skipped)."""
    merged: dict = {}
    for source in (file_values or {}), (overrides or {}):
        for key, value in source.items():
            if key not in _FIELD_NAMES:
                raise DataError(f"unknown config key {key!r}")
            if value is not None:
                merged[key] = value
    return PipelineConfig(**merged).validate()


def build_gateways(cfg: PipelineConfig) -> tuple[LlmGateway, LlmGateway]:
    """(augmentation gateway, reward gateway) per the configured backend.

    The mock backend is shared between the two so one script file drives a
    whole pipeline run.
    """
    if cfg.backend == "mock":
        backend = MockBackend.from_jsonl(cfg.mock_script)
        reward_backend = backend
    else:
        if not cfg.model:
            raise DataError("openai backend requires a model name")
        backend = OpenAIBackend(
            cfg.base_url, cfg.model, api_key_env=cfg.api_key_env, timeout_s=cfg.timeout_s
        )
        reward_backend = OpenAIBackend(
            cfg.base_url,
            cfg.reward_model or cfg.model,
            api_key_env=cfg.api_key_env,
            timeout_s=cfg.timeout_s,
        )
    common = dict(
        retries=cfg.retries,
        retry_backoff_s=cfg.retry_backoff_s,
        concurrency=cfg.concurrency,
        predict_max_tokens=cfg.predict_max_tokens,
    )
    return LlmGateway(backend, **common), LlmGateway(reward_backend, **common)


def manifest_view(cfg: PipelineConfig) -> dict:
    """Flat manifest section echoing every knob a run actually used."""
    if cfg.backend == "mock":
        backend_desc: dict = {"kind": "mock", "script": Path(cfg.mock_script).name}
    else:
        backend_desc = {
            "kind": "openai",
            "base_url": cfg.base_url,
            "model": cfg.model,
            "reward_model": cfg.reward_model or cfg.model,
        }
    return {
        "setting": cfg.setting,
        "n_candidates": cfg.n_candidates,
        "lda_K": cfg.lda_k,
        "lda_alpha": cfg.lda_alpha,
        "lda_beta": cfg.lda_beta,
        "lda_iterations": cfg.lda_iterations,
        "lda_fold_in_iterations": cfg.lda_fold_in_iterations,
        "temperature": cfg.temperature,
        "top_k": cfg.top_k,
        "max_tokens": cfg.max_tokens,
        "predict_temperature": 0.0,
        "predict_max_tokens": cfg.predict_max_tokens,
        "reward_mode": cfg.reward_mode,
        "backend": backend_desc,
    }
