"""The composed end-to-end run: load, balance, augment, score, build
preference pairs, export training artifacts and a manifest.

With the mock backend and fixed seeds the whole run is byte-deterministic:
every artifact except the manifest timestamp is identical across runs.
"""
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from pathlib import Path

from .augmenter import AugmentedCandidate, augment_dataset, build_prompt, save_candidates_jsonl
from .balancer import balance, merge_augmented
from .config import PipelineConfig, build_gateways, manifest_view
from .corpus import Dataset, Instance, dataset_sha256, load_dataset, save_jsonl
from .errors import DataError
from .exporter import (
    export_manifest,
    save_manifest,
    save_preference_jsonl,
    save_sft_jsonl,
    write_preference_jsonl,
    write_sft_jsonl,
)
from .preference_builder import build_preference_dataset
from .reward import save_scored_jsonl, score_pools
from .topic_model import fit, save_model

logger = logging.getLogger(__name__)


@dataclass
class PipelineResult:
    out_dir: Path
    paths: dict[str, Path]
    pair_count: int
    skip_count: int


def select_augmentation_text(pool: list[AugmentedCandidate]) -> str:
    """The single augmentation used for the merged training set.

    The first valid candidate wins, keeping the merged data independent of
    the reward machinery; failing that, the first non-empty text.
    """
    for cand in pool:
        if cand.valid:
            return cand.text
    for cand in pool:
        if cand.text.strip():
            return cand.text
    raise DataError(
        f"no usable augmentation for source_id {pool[0].source.source_id!r}: "
        "all candidates are empty"
    )


def run_pipeline(cfg: PipelineConfig, input_path: str | Path, out_dir: str | Path) -> PipelineResult:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {name: out_dir / fname for name, fname in (
        ("base", "base.jsonl"),
        ("candidates", "candidates.jsonl"),
        ("lda_model", "lda_model.json"),
        ("scored", "scored.jsonl"),
        ("dpo", "dpo.jsonl"),
        ("merged", "merged.jsonl"),
        ("sft", "sft.jsonl"),
        ("manifest", "manifest.json"),
    )}

    dataset, skip_report = load_dataset(input_path, split="train")
    if len(dataset) == 0:
        raise DataError(f"input dataset {input_path} is empty")

    base = balance(dataset, cfg.seed) if cfg.setting == "balanced" else dataset
    save_jsonl(base, paths["base"])
    logger.info("base dataset: %d instances (%s setting)", len(base), cfg.setting)

    gateway_aug, gateway_reward = build_gateways(cfg)
    pools = augment_dataset(
        base,
        cfg.n_candidates,
        gateway_aug,
        temperature=cfg.temperature,
        top_k=cfg.top_k,
        max_tokens=cfg.max_tokens,
        seed=cfg.seed,
    )
    save_candidates_jsonl(pools, paths["candidates"])

    # The topic model is fitted on the original training sentences only, so
    # candidate text never leaks into the reference distribution.
    lda = fit(
        [inst.sentence for inst in dataset.instances],
        k=cfg.lda_k,
        alpha=cfg.lda_alpha,
        beta=cfg.lda_beta,
        iterations=cfg.lda_iterations,
        seed=cfg.seed,
    )
    save_model(lda, paths["lda_model"])

    scored_pools = score_pools(
        pools, lda, gateway_reward, fold_in_iterations=cfg.lda_fold_in_iterations
    )
    save_scored_jsonl(scored_pools, paths["scored"])

    prompts = {inst.source_id: build_prompt(inst) for inst in base.instances}
    record_pools = [[sc.record() for sc in pool] for pool in scored_pools]
    pairs, skips = build_preference_dataset(record_pools, prompts, mode=cfg.reward_mode)
    save_preference_jsonl(pairs, paths["dpo"])

    augmented = Dataset(
        split=base.split,
        name=base.name,
        instances=tuple(
            Instance(
                sentence=select_augmentation_text(pool),
                aspect=inst.aspect,
                label=inst.label,
                source_id=inst.source_id,
                origin="augmented",
            )
            for inst, pool in zip(base.instances, pools)
        ),
    )
    merged = merge_augmented(base, augmented, cfg.setting)
    save_jsonl(merged, paths["merged"])
    save_sft_jsonl(merged, paths["sft"])

    manifest = export_manifest(
        config=manifest_view(cfg),
        seeds={
            "master": cfg.seed,
            "balance": cfg.seed,
            "lda": cfg.seed,
            "generation": cfg.seed,
        },
        model_ids={
            "augmentation": gateway_aug.backend.backend_id,
            "reward": gateway_reward.backend.backend_id,
        },
        dataset_hashes={
            "input": dataset_sha256(dataset),
            "base": dataset_sha256(base),
            "merged": dataset_sha256(merged),
            "dpo_jsonl": hashlib.sha256(write_preference_jsonl(pairs)).hexdigest(),
            "sft_jsonl": hashlib.sha256(write_sft_jsonl(merged)).hexdigest(),
        },
    )
    manifest["input_file"] = Path(input_path).name
    manifest["counts"] = {
        "input_instances": len(dataset),
        "base_instances": len(base),
        "merged_instances": len(merged),
        "preference_pairs": len(pairs),
        "preference_skips": len(skips),
        "conflict_aspects_skipped": skip_report.conflict_aspects,
    }
    save_manifest(manifest, paths["manifest"])

    return PipelineResult(
        out_dir=out_dir, paths=paths, pair_count=len(pairs), skip_count=len(skips)
    )
