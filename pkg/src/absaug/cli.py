"""Command-line interface: one subcommand per pipeline stage plus a
composed ``pipeline`` command. Every run is reproducible from a config
file plus seeds; flags override config-file values which override defaults.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .augmenter import augment_dataset, build_prompt, read_candidate_pools, save_candidates_jsonl
from .balancer import SETTINGS, balance, merge_augmented
from .config import BACKEND_KINDS, PipelineConfig, build_gateways, load_config_file, make_config
from .corpus import format_stats, load_dataset, parse_polarity, save_jsonl
from .errors import AbsaugError, DataError
from .evaluator import evaluate, predict_split
from .exporter import save_preference_jsonl, save_sft_jsonl
from .llm_gateway import UNPARSEABLE, Prediction
from .pipeline import run_pipeline
from .preference_builder import build_preference_dataset
from .reward import read_scored_pools, save_scored_jsonl, score_pools
from .topic_model import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    DEFAULT_FOLD_IN_ITERATIONS,
    DEFAULT_ITERATIONS,
    DEFAULT_K,
    fit,
    infer,
    load_model,
    relevance,
    save_model,
)

_CONFIG_KEYS = (
    "backend",
    "mock_script",
    "base_url",
    "model",
    "reward_model",
    "retries",
    "concurrency",
)


def _add_backend_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file (flat keys, see README)")
    p.add_argument("--backend", choices=BACKEND_KINDS, help="LLM backend kind")
    p.add_argument("--mock-script", dest="mock_script", help="JSONL script for the mock backend")
    p.add_argument("--base-url", dest="base_url", help="OpenAI-compatible API base URL")
    p.add_argument("--model", help="augmentation model name")
    p.add_argument("--reward-model", dest="reward_model", help="reward (prediction) model name")
    p.add_argument("--retries", type=int, help="gateway retry budget")
    p.add_argument("--concurrency", type=int, help="max in-flight backend requests")


def _add_reward_mode_args(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group()
    group.add_argument(
        "--reward1-only", action="store_true",
        help="ignore topic relevance when selecting pairs",
    )
    group.add_argument(
        "--reward2-only", action="store_true",
        help="ignore sentiment consistency when selecting pairs",
    )


def _reward_mode(args: argparse.Namespace) -> str | None:
    if getattr(args, "reward1_only", False):
        return "reward1_only"
    if getattr(args, "reward2_only", False):
        return "reward2_only"
    return None


def _config(args: argparse.Namespace, **extra) -> PipelineConfig:
    file_values = load_config_file(args.config) if getattr(args, "config", None) else None
    overrides = {key: getattr(args, key, None) for key in _CONFIG_KEYS}
    overrides.update({k: v for k, v in extra.items() if v is not None})
    return make_config(file_values, overrides)


def cmd_stats(args: argparse.Namespace) -> int:
    dataset, report = load_dataset(args.infile, split=args.split)
    print(format_stats(dataset))
    if report.conflict_aspects:
        print(f"skipped {report.conflict_aspects} conflict-labeled aspects", file=sys.stderr)
    return 0


def cmd_balance(args: argparse.Namespace) -> int:
    dataset, _ = load_dataset(args.infile)
    save_jsonl(balance(dataset, args.seed), args.out)
    return 0


def cmd_merge(args: argparse.Namespace) -> int:
    base, _ = load_dataset(args.base)
    augmented, _ = load_dataset(args.aug)
    save_jsonl(merge_augmented(base, augmented, args.setting), args.out)
    return 0


def cmd_augment(args: argparse.Namespace) -> int:
    cfg = _config(args, n_candidates=args.n, seed=args.seed)
    dataset, _ = load_dataset(args.infile)
    gateway, _ = build_gateways(cfg)
    pools = augment_dataset(
        dataset,
        cfg.n_candidates,
        gateway,
        temperature=cfg.temperature,
        top_k=cfg.top_k,
        max_tokens=cfg.max_tokens,
        seed=cfg.seed,
    )
    save_candidates_jsonl(pools, args.out)
    return 0


def cmd_lda_fit(args: argparse.Namespace) -> int:
    dataset, _ = load_dataset(args.infile)
    model = fit(
        [inst.sentence for inst in dataset.instances],
        k=args.k,
        alpha=args.alpha,
        beta=args.beta,
        iterations=args.iterations,
        seed=args.seed,
    )
    save_model(model, args.out)
    return 0


def cmd_lda_infer(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    vector = infer(model, args.text, args.fold_in_iterations)
    print(json.dumps([float(x) for x in vector]))
    return 0


def cmd_lda_score(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    score = relevance(
        infer(model, args.a, args.fold_in_iterations),
        infer(model, args.b, args.fold_in_iterations),
    )
    print(score)
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    cfg = _config(args)
    dataset, _ = load_dataset(args.infile)
    raw = Path(args.candidates).read_bytes()
    n = args.n
    if n is None:
        rows = sum(1 for line in raw.decode("utf-8").splitlines() if line.strip())
        if len(dataset) == 0 or rows % len(dataset):
            raise DataError(
                f"cannot infer pool size: {rows} candidate rows over {len(dataset)} instances"
            )
        n = rows // len(dataset)
    pools = read_candidate_pools(raw, dataset, n)
    lda = load_model(args.lda_model)
    _, gateway_reward = build_gateways(cfg)
    scored = score_pools(pools, lda, gateway_reward, fold_in_iterations=args.fold_in_iterations)
    save_scored_jsonl(scored, args.out)
    return 0


def cmd_build_prefs(args: argparse.Namespace) -> int:
    scored = read_scored_pools(Path(args.scored).read_bytes())
    base, _ = load_dataset(args.infile)
    prompts = {inst.source_id: build_prompt(inst) for inst in base.instances}
    pairs, skips = build_preference_dataset(scored, prompts, mode=_reward_mode(args) or "full")
    save_preference_jsonl(pairs, args.out)
    if skips:
        print(f"skipped {len(skips)} pools", file=sys.stderr)
    return 0


def cmd_export_sft(args: argparse.Namespace) -> int:
    dataset, _ = load_dataset(args.infile)
    save_sft_jsonl(dataset, args.out)
    return 0


def _read_predictions(path: str | Path) -> list[tuple[str, Prediction]]:
    predictions: list[tuple[str, Prediction]] = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        obj = json.loads(line)
        for key in ("source_id", "predicted"):
            if key not in obj:
                raise DataError(f"missing key {key!r} at line {line_no}")
        value = obj["predicted"]
        pred: Prediction = UNPARSEABLE if value == UNPARSEABLE else parse_polarity(value)
        predictions.append((obj["source_id"], pred))
    return predictions


def cmd_evaluate(args: argparse.Namespace) -> int:
    gold, _ = load_dataset(args.gold, split="test")
    if args.predictions:
        predictions = _read_predictions(args.predictions)
    else:
        cfg = _config(args)
        _, gateway_reward = build_gateways(cfg)
        predictions, failures = predict_split(gold, gateway_reward)
        for source_id, err in failures:
            print(f"prediction failed for {source_id}: {err}", file=sys.stderr)
    report = evaluate(gold, predictions)
    if args.report:
        Path(args.report).write_text(report.to_json() + "\n", encoding="utf-8")
    print(report.to_text_table())
    return 0


def cmd_pipeline(args: argparse.Namespace) -> int:
    cfg = _config(
        args,
        setting=args.setting,
        seed=args.seed,
        n_candidates=args.n,
        lda_k=args.lda_k,
        reward_mode=_reward_mode(args),
    )
    result = run_pipeline(cfg, args.infile, args.out_dir)
    print(
        f"pipeline complete: {result.pair_count} preference pairs "
        f"({result.skip_count} skipped) in {result.out_dir}",
        file=sys.stderr,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="absaug",
        description="Label-balanced LLM data augmentation for aspect-based sentiment analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="print per-label instance counts")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--split", choices=("train", "test"), default="train")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("balance", help="oversample minority labels to the largest class")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("merge", help="merge base and augmented datasets")
    p.add_argument("--base", required=True)
    p.add_argument("--aug", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--setting", choices=SETTINGS, default="standard")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("augment", help="generate candidate augmentations")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, help="candidates per instance")
    p.add_argument("--seed", type=int)
    _add_backend_args(p)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("lda", help="topic model operations")
    lda_sub = p.add_subparsers(dest="lda_command", required=True)

    q = lda_sub.add_parser("fit", help="fit a topic model on dataset sentences")
    q.add_argument("--in", dest="infile", required=True)
    q.add_argument("--out", required=True)
    q.add_argument("--k", type=int, default=DEFAULT_K)
    q.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    q.add_argument("--beta", type=float, default=DEFAULT_BETA)
    q.add_argument("--iterations", type=int, default=DEFAULT_ITERATIONS)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=cmd_lda_fit)

    q = lda_sub.add_parser("infer", help="print the topic vector of a text")
    q.add_argument("--model", required=True)
    q.add_argument("--text", required=True)
    q.add_argument("--fold-in-iterations", dest="fold_in_iterations",
                   type=int, default=DEFAULT_FOLD_IN_ITERATIONS)
    q.set_defaults(func=cmd_lda_infer)

    q = lda_sub.add_parser("score", help="print the relevance of two texts")
    q.add_argument("--model", required=True)
    q.add_argument("--a", required=True)
    q.add_argument("--b", required=True)
    q.add_argument("--fold-in-iterations", dest="fold_in_iterations",
                   type=int, default=DEFAULT_FOLD_IN_ITERATIONS)
    q.set_defaults(func=cmd_lda_score)

    p = sub.add_parser("score", help="compute both rewards for candidate pools")
    p.add_argument("--in", dest="infile", required=True, help="base dataset the candidates came from")
    p.add_argument("--candidates", required=True)
    p.add_argument("--lda-model", dest="lda_model", required=True, help="fitted topic model file")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, help="pool size (inferred when omitted)")
    p.add_argument("--fold-in-iterations", dest="fold_in_iterations",
                   type=int, default=DEFAULT_FOLD_IN_ITERATIONS)
    _add_backend_args(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("build-prefs", help="select preference pairs from scored pools")
    p.add_argument("--scored", required=True)
    p.add_argument("--in", dest="infile", required=True, help="base dataset (rebuilds prompts)")
    p.add_argument("--out", required=True)
    _add_reward_mode_args(p)
    p.set_defaults(func=cmd_build_prefs)

    p = sub.add_parser("export-sft", help="export SFT records for a dataset")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_sft)

    p = sub.add_parser("evaluate", help="score predictions against a gold test set")
    p.add_argument("--gold", required=True)
    p.add_argument("--predictions", help="JSONL of {source_id, predicted}; omit to predict live")
    p.add_argument("--report", help="write the JSON report here")
    _add_backend_args(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("pipeline", help="run every stage end to end")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--setting", choices=SETTINGS)
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int, help="candidates per instance")
    p.add_argument("--lda-k", dest="lda_k", type=int)
    _add_reward_mode_args(p)
    _add_backend_args(p)
    p.set_defaults(func=cmd_pipeline)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except AbsaugError as exc:
        print(f"absaug: error in stage '{args.command}': {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
