"""Command-line entry point: ``dam train | eval | explain | synth``.

Exit codes: 0 success, 1 usage/config/data error, 2 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .checkpoint import Checkpoint, CheckpointError
from .classifier import PolarityDistribution
from .config import ConfigError, known_keys, load_config
from .corpus import CorpusError, build_vocab, load_dataset, save_dataset
from .embeddings import load_pretrained
from .model import encode_all
from .synthetic import dependency_cue_corpus, overfit_corpus
from .trainer import NonFiniteLossError, evaluate, train

log = logging.getLogger("dam")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _write_jsonl(path: Path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _load_examples(path: Path):
    if not Path(path).exists():
        raise UsageError(f"dataset does not exist: {path}")
    examples = load_dataset(path)
    if not examples:
        raise UsageError(f"dataset is empty: {path}")
    return examples


def cmd_train(args) -> int:
    overrides = {k: v for k, v in vars(args).items() if k in known_keys() and v is not None}
    cfg = load_config(args.config, overrides)
    cfg.check_paths()
    train_set = _load_examples(cfg.train_path)
    dev_set = _load_examples(cfg.dev_path) if cfg.dev_path else None
    test_set = _load_examples(cfg.test_path) if cfg.test_path else None

    vocab = build_vocab(train_set, cfg.hp.min_count)
    pretrained = None
    if cfg.pretrained_path:
        pretrained = load_pretrained(cfg.pretrained_path, vocab, cfg.hp.dim_w, cfg.hp.epsilon_init, cfg.hp.seed)

    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    (cfg.output_dir / "config.resolved").write_text(cfg.to_text(), encoding="utf-8")
    result = train(train_set, cfg.hp, cfg.variant, dev=dev_set, vocab=vocab, pretrained=pretrained)
    cfg.checkpoint.parent.mkdir(parents=True, exist_ok=True)
    result.checkpoint.save(cfg.checkpoint)
    _write_jsonl(cfg.output_dir / "train_log.jsonl", result.log)
    if result.log:
        last = result.log[-1]
        print(f"epoch {last['epoch']}  loss {last['loss']:.4f}  train accuracy {last['train_accuracy']:.4f}")
    if test_set:
        m = evaluate(result.checkpoint, test_set)
        _write_jsonl(cfg.output_dir / "test_metrics.jsonl", [m.as_dict()])
        print(f"test accuracy {m.accuracy:.4f}  macro-F1 {m.macro_f1:.4f}")
    print(f"checkpoint written to {cfg.checkpoint}")
    return EXIT_OK


def cmd_eval(args) -> int:
    ckpt = Checkpoint.load(args.checkpoint)
    examples = _load_examples(args.dataset)
    metrics = evaluate(ckpt, examples)
    report = Path(args.report) if args.report else Path(str(args.checkpoint) + ".metrics.jsonl")
    _write_jsonl(report, [metrics.as_dict()])
    print(f"accuracy {metrics.accuracy:.4f}")
    print(f"macro_f1 {metrics.macro_f1:.4f}")
    return EXIT_OK


def cmd_explain(args) -> int:
    ckpt = Checkpoint.load(args.checkpoint)
    examples = _load_examples(args.dataset)
    if not 0 <= args.index < len(examples):
        raise UsageError(f"example index {args.index} out of range for {len(examples)} examples")
    ex = examples[args.index]
    model = ckpt.to_model()
    enc = encode_all(model, [ex])[0]
    probs, trace = model.explain(enc)
    dist = PolarityDistribution(probs)
    record = {
        "index": args.index,
        "variant": ckpt.variant,
        "tokens": list(ex.sentence.tokens),
        "aspect_from": ex.aspect_from,
        "aspect_to": ex.aspect_to,
        "gold": ex.polarity,
        "predicted": dist.polarity,
        "distribution": dist.as_dict(),
        "aspect_attention": trace.aspect.tolist(),
    }
    if trace.dependency is not None:
        record["dependency_attention"] = trace.dependency.tolist()
    out = Path(args.out) if args.out else Path(str(args.checkpoint) + ".explain.jsonl")
    _write_jsonl(out, [record])
    print(f"predicted {dist.polarity} (gold {ex.polarity}); trace written to {out}")
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.kind == "overfit":
        examples = overfit_corpus(args.size or 32)
    else:
        pols = tuple(args.polarities.split(","))
        examples = dependency_cue_corpus(args.size or 600, seed=args.seed, polarities=pols)
    save_dataset(examples, args.out)
    print(f"wrote {len(examples)} examples to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dam", description="Dual-attention aspect-level sentiment classifier")
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-epoch progress")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a model from a config file")
    p.add_argument("config", nargs="?", help="key = value config file")
    for key in known_keys():
        p.add_argument(f"--{key}", dest=key, default=None, metavar="VALUE")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="accuracy and macro-F1 of a checkpoint on a dataset")
    p.add_argument("checkpoint", type=Path)
    p.add_argument("dataset", type=Path)
    p.add_argument("--report", help="metrics report path (default: <checkpoint>.metrics.jsonl)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("explain", help="prediction and attention weights for one example")
    p.add_argument("checkpoint", type=Path)
    p.add_argument("dataset", type=Path)
    p.add_argument("index", type=int)
    p.add_argument("--out", help="trace path (default: <checkpoint>.explain.jsonl)")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("synth", help="write a generated fixture dataset")
    p.add_argument("kind", choices=["overfit", "cue"])
    p.add_argument("out", type=Path)
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--polarities", default="positive,negative", help="cue corpus classes, comma separated")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
        return args.func(args)
    except NonFiniteLossError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ConfigError, CorpusError, CheckpointError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
