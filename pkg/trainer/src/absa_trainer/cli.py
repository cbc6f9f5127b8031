"""CLI for the fine-tuning consumers: `absa-trainer dpo` and `absa-trainer sft`."""
from __future__ import annotations

import argparse
import sys

from .data import SchemaError
from .dpo import DpoHyperparams, dpo_train
from .sft import SftHyperparams, sft_train


def cmd_dpo(args: argparse.Namespace) -> int:
    hp = DpoHyperparams(
        beta=args.beta,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        steps=args.steps,
        seed=args.seed,
    )
    path = dpo_train(args.data, args.base, hp, args.out)
    print(f"checkpoint written to {path}", file=sys.stderr)
    return 0


def cmd_sft(args: argparse.Namespace) -> int:
    hp = SftHyperparams(
        learning_rate=args.lr,
        batch_size=args.batch_size,
        steps=args.steps,
        seed=args.seed,
    )
    path = sft_train(args.data, args.base, hp, args.out)
    print(f"checkpoint written to {path}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="absa-trainer")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dpo", help="preference-optimize a model on exported pairs")
    p.add_argument("--data", required=True, help="preference JSONL (prompt/chosen/rejected)")
    p.add_argument("--base", default="tiny-bigram-lm",
                   help="registry model name or checkpoint directory")
    p.add_argument("--out", default="checkpoints/dpo")
    p.add_argument("--steps", type=int, default=DpoHyperparams.steps)
    p.add_argument("--beta", type=float, default=DpoHyperparams.beta)
    p.add_argument("--lr", type=float, default=DpoHyperparams.learning_rate)
    p.add_argument("--batch-size", dest="batch_size", type=int,
                   default=DpoHyperparams.batch_size)
    p.add_argument("--seed", type=int, default=DpoHyperparams.seed)
    p.set_defaults(func=cmd_dpo)

    p = sub.add_parser("sft", help="supervised fine-tuning on exported records")
    p.add_argument("--data", required=True, help="SFT JSONL (prompt/completion)")
    p.add_argument("--base", default="tiny-bigram-lm")
    p.add_argument("--out", default="checkpoints/sft")
    p.add_argument("--steps", type=int, default=SftHyperparams.steps)
    p.add_argument("--lr", type=float, default=SftHyperparams.learning_rate)
    p.add_argument("--batch-size", dest="batch_size", type=int,
                   default=SftHyperparams.batch_size)
    p.add_argument("--seed", type=int, default=SftHyperparams.seed)
    p.set_defaults(func=cmd_sft)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"absa-trainer: invalid input: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
