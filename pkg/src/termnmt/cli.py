"""``termnmt`` command line: annotate, bpe-learn, bpe-apply, train, translate,
evaluate, synth and ablation.

Every command accepts ``--seed``, ``--config`` (a flat key = value file whose
keys are long flag names) and ``--out-dir``. Flags given on the command line
override config values. Outputs are written atomically.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import Counter
from dataclasses import asdict, fields
from pathlib import Path

from . import __version__
from .config import ConfigError, load_config, parse_schedule

log = logging.getLogger("termnmt")


def _rates(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _names(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _flag(text: str) -> bool:
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


class CommandError(Exception):
    """A user-facing failure: printed without a traceback, exit status 1."""


def _require(path, what: str) -> Path:
    if path is None:
        raise CommandError(f"missing required option --{what}")
    path = Path(path)
    if not path.is_file():
        raise CommandError(f"{what}: no such file: {path}")
    return path


def _out(args, name: str) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out / name


def _write_json(path: Path, data) -> None:
    from .corpus import write_lines
    write_lines(path, [json.dumps(data, indent=2, sort_keys=True)])


def _model_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--layers", type=int, default=3)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--ffn", type=int, default=128)
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--dropout", type=float, default=0.1)


def _train_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha-schedule", type=parse_schedule, default=[(1.0, 1.0)],
                   help="comma-separated fraction:alpha phases, e.g. 0.9:1,0.1:2")
    p.add_argument("--epochs", type=int, default=30, help="maximum epochs")
    p.add_argument("--min-epochs", type=int, default=30)
    p.add_argument("--tokens-per-batch", type=int, default=400)
    p.add_argument("--lr", type=float, default=0.003)
    p.add_argument("--optimizer", choices=("sgd", "adam"), default="adam")
    p.add_argument("--warmup", type=int, default=300, help="linear warmup steps")
    p.add_argument("--lr-decay", choices=("none", "inverse_sqrt", "linear"), default="linear",
                   help="learning-rate decay after warmup (linear reaches 0 at the last epoch)")
    p.add_argument("--patience", type=int, default=5)


# ---- commands ----------------------------------------------------------------

def cmd_annotate(args) -> int:
    from .corpus import load_parallel, write_lines, write_tokenized
    from .terminology import annotate_corpus, format_constraints, load_terminology

    src, tgt = _require(args.src, "src"), _require(args.tgt, "tgt")
    terms = load_terminology(_require(args.terms, "terms"))
    corpus = load_parallel(src, tgt)
    annotated = annotate_corpus(corpus, terms, args.rate, args.mask, args.seed)
    stem = args.prefix
    write_tokenized(_out(args, f"{stem}.src"), (a.augmented_source for a in annotated))
    write_tokenized(_out(args, f"{stem}.tgt"), (a.original.target for a in annotated))
    write_lines(_out(args, f"{stem}.constraints"), (format_constraints(a.constraints()) for a in annotated))
    write_lines(_out(args, f"{stem}.tmask"),
                (" ".join("1" if f else "0" for f in a.target_constraint_mask) for a in annotated))
    n_ann = sum(a.annotated for a in annotated)
    n_con = sum(len(a.matches) for a in annotated)
    print(f"sentences: {len(annotated)}  annotated: {n_ann}  constraints: {n_con}")
    return 0


def cmd_bpe_learn(args) -> int:
    from .corpus import load_tokenized_lines
    from .subword import learn_bpe

    counts: Counter = Counter()
    if not args.input:
        raise CommandError("bpe-learn needs at least one --input file")
    for path in args.input:
        for toks in load_tokenized_lines(_require(path, "input"), allow_tags=True):
            counts.update(toks)
    model = learn_bpe(counts, args.merges)
    model.save(_out(args, "bpe.codes"))
    print(f"learned {len(model.merges)} merges from {sum(counts.values())} tokens")
    return 0


def cmd_bpe_apply(args) -> int:
    from .corpus import load_tokenized_lines, write_tokenized
    from .subword import BpeModel, apply_bpe, join_bpe

    codes = BpeModel.load(_require(args.codes, "codes"))
    path = _require(args.input, "input")
    lines = load_tokenized_lines(path, allow_tags=True)
    if args.join:
        out = [join_bpe(t) for t in lines]
        name = path.name[:-4] if path.name.endswith(".bpe") else path.name + ".joined"
    else:
        out = [apply_bpe(codes, t) for t in lines]
        name = path.name + ".bpe"
    write_tokenized(_out(args, name), out)
    return 0


def _read_mask(path: Path, targets) -> list[list[bool]]:
    from .corpus import read_lines
    rows = [[tok == "1" for tok in line.split()] for line in read_lines(path)]
    if len(rows) != len(targets) or any(len(r) != len(t) for r, t in zip(rows, targets)):
        raise CommandError(f"{path}: constraint mask does not align with the target file")
    return rows


def cmd_train(args) -> int:
    import torch

    from .corpus import load_parallel
    from .experiment import build_vocab, bleu_validator
    from .nmt import ModelConfig, Seq2SeqModel, TrainConfig, encode_pairs, save_checkpoint, train
    from .subword import BpeModel
    from .terminology import AnnotatedPair

    config = TrainConfig(alpha_schedule=args.alpha_schedule, min_epochs=args.min_epochs,
                         max_epochs=args.epochs, tokens_per_batch=args.tokens_per_batch,
                         seed=args.seed, learning_rate=args.lr, optimizer=args.optimizer,
                         patience=args.patience, warmup_steps=args.warmup,
                         lr_decay=args.lr_decay)
    codes = BpeModel.load(_require(args.codes, "codes"))
    corpus = load_parallel(_require(args.src, "src"), _require(args.tgt, "tgt"), allow_tags=True)
    targets = [p.target for p in corpus]
    masks = _read_mask(_require(args.tmask, "tmask"), targets) if args.tmask else \
        [[False] * len(t) for t in targets]
    pairs = [AnnotatedPair(p, (), p.source, tuple(m)) for p, m in zip(corpus, masks)]
    vocab = build_vocab(codes, pairs)
    validate = None
    if args.valid_src or args.valid_tgt:
        valid = load_parallel(_require(args.valid_src, "valid-src"), _require(args.valid_tgt, "valid-tgt"),
                              allow_tags=True)
        validate = bleu_validator([AnnotatedPair(p, (), p.source, ()) for p in valid], codes, vocab)
    torch.manual_seed(args.seed)
    model = Seq2SeqModel(ModelConfig(vocab_size=len(vocab), num_layers=args.layers, model_dim=args.dim,
                                     ffn_dim=args.ffn, num_heads=args.heads, dropout_rate=args.dropout),
                         vocab)
    model, history = train(model, encode_pairs(pairs, codes, vocab), config, validate)
    save_checkpoint(model, _out(args, "model.ckpt"))
    _write_json(_out(args, "train_log.json"), [asdict(h) for h in history])
    last = history[-1]
    print(f"trained {len(history)} epochs; final loss {last.train_loss:.4f}")
    return 0


def cmd_translate(args) -> int:
    import torch

    from .corpus import load_tokenized_lines, write_tokenized
    from .experiment import translate_tokens
    from .nmt import load_checkpoint
    from .subword import BpeModel

    torch.manual_seed(args.seed)
    model = load_checkpoint(_require(args.model, "model"))
    codes = BpeModel.load(_require(args.codes, "codes"))
    path = _require(args.input, "input")
    sources = load_tokenized_lines(path, allow_tags=True)
    hyps = translate_tokens(model, codes, model.vocab, sources, args.beam)
    write_tokenized(_out(args, path.name + ".hyp"), hyps)
    return 0


def cmd_evaluate(args) -> int:
    from .corpus import read_lines, write_lines
    from .evaluation import evaluate
    from .terminology import read_constraints

    # empty hypothesis lines are legitimate output, so no strict loader here
    hyps = [line.split() for line in read_lines(_require(args.hyp, "hyp"))]
    refs = [line.split() for line in read_lines(_require(args.ref, "ref"))]
    cons = read_constraints(_require(args.constraints, "constraints")) if args.constraints else [[] for _ in refs]
    report = evaluate(hyps, refs, cons)
    print(report.to_json())
    print(report.summary())
    if args.out_dir:
        write_lines(_out(args, "report.json"), [report.to_json()])
    return 0


def _synth_spec(args):
    from .synth import SynthSpec
    kw = {f.name: getattr(args, f.name) for f in fields(SynthSpec)
          if getattr(args, f.name, None) is not None and f.name != "seed"}
    return SynthSpec(seed=args.seed, **kw)


def cmd_synth(args) -> int:
    from .corpus import write_tokenized
    from .synth import generate
    from .terminology import save_terminology

    bench = generate(_synth_spec(args))
    for split in ("train", "valid", "test"):
        corpus = getattr(bench, split)
        write_tokenized(_out(args, f"{split}.src"), (p.source for p in corpus))
        write_tokenized(_out(args, f"{split}.tgt"), (p.target for p in corpus))
    save_terminology(_out(args, "train_terms.tsv"), bench.train_terms)
    save_terminology(_out(args, "test_terms.tsv"), bench.test_terms)
    print(f"train {len(bench.train)}  valid {len(bench.valid)}  test {len(bench.test)}  "
          f"train terms {len(bench.train_terms)}  test terms {len(bench.test_terms)}")
    return 0


def cmd_ablation(args) -> int:
    from .corpus import write_lines
    from .experiment import RunSettings, ablation

    settings = RunSettings(
        wce_schedule=args.alpha_schedule, num_merges=args.merges, num_layers=args.layers,
        model_dim=args.dim, ffn_dim=args.ffn, num_heads=args.heads, dropout_rate=args.dropout,
        epochs=args.epochs, min_epochs=args.min_epochs, tokens_per_batch=args.tokens_per_batch,
        learning_rate=args.lr, optimizer=args.optimizer, warmup_steps=args.warmup, lr_decay=args.lr_decay,
        beam_size=args.beam, seed=args.seed)
    seeds = args.seeds if args.seeds else [args.seed]
    cells = ablation(_synth_spec(args), settings, args.rates, seeds, args.systems,
                     log_dir=Path(args.out_dir) / "cells")
    rows = [c.row() for c in cells]
    _write_json(_out(args, "ablation.json"), rows)
    header = "rate\t" + "\t".join(args.systems)
    lines = [header]
    for rate in args.rates:
        vals = [next(c for c in cells if c.rate == rate and c.system == s) for s in args.systems]
        lines.append(f"{rate:g}\t" + "\t".join("error" if c.error else f"{c.term_pct:.2f}" for c in vals))
    write_lines(_out(args, "ablation.tsv"), lines)
    print("\n".join(lines))
    failed = [c for c in cells if c.error]
    for c in failed:
        print(f"cell {c.system}@{c.rate:g} failed: {c.error}", file=sys.stderr)
    return 1 if failed else 0


# ---- parser --------------------------------------------------------------------

COMMANDS = {
    "annotate": cmd_annotate, "bpe-learn": cmd_bpe_learn, "bpe-apply": cmd_bpe_apply,
    "train": cmd_train, "translate": cmd_translate, "evaluate": cmd_evaluate,
    "synth": cmd_synth, "ablation": cmd_ablation,
}


def _synth_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--source-vocab-size", type=int)
    p.add_argument("--target-vocab-size", type=int)
    p.add_argument("--min-len", type=int)
    p.add_argument("--max-len", type=int)
    p.add_argument("--train-size", type=int)
    p.add_argument("--valid-size", type=int)
    p.add_argument("--test-size", type=int)
    p.add_argument("--train-dict-size", type=int)
    p.add_argument("--test-dict-size", type=int)
    p.add_argument("--substitution-rate", type=float)
    p.add_argument("--max-term-len", type=int)
    p.add_argument("--swap-adjacent", type=_flag)
    p.add_argument("--name-rate", type=float, help="share of sentences carrying a copied name")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--config", help="flat key = value file; command-line flags take precedence")
    common.add_argument("--out-dir", default=".")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="termnmt", description="Terminology-constrained NMT toolkit")
    parser.add_argument("--version", action="version", version=f"termnmt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("annotate", parents=[common], help="tag dictionary terms in a parallel corpus")
    p.add_argument("--src")
    p.add_argument("--tgt")
    p.add_argument("--terms")
    p.add_argument("--rate", type=float, default=0.1)
    p.add_argument("--mask", type=_flag, nargs="?", const=True, default=False)
    p.add_argument("--prefix", default="annotated", help="basename of the output files")

    p = sub.add_parser("bpe-learn", parents=[common], help="learn joint BPE merges")
    p.add_argument("--input", action="append", help="tokenized text file (repeatable)")
    p.add_argument("--merges", type=int, default=60)

    p = sub.add_parser("bpe-apply", parents=[common], help="segment (or re-join) a tokenized file")
    p.add_argument("--codes")
    p.add_argument("--input")
    p.add_argument("--join", type=_flag, nargs="?", const=True, default=False)

    p = sub.add_parser("train", parents=[common], help="train a model")
    p.add_argument("--src")
    p.add_argument("--tgt")
    p.add_argument("--tmask", help="per-token constraint flags written by annotate")
    p.add_argument("--codes")
    p.add_argument("--valid-src")
    p.add_argument("--valid-tgt")
    _model_options(p)
    _train_options(p)

    p = sub.add_parser("translate", parents=[common], help="decode a tokenized source file")
    p.add_argument("--model")
    p.add_argument("--codes")
    p.add_argument("--input")
    p.add_argument("--beam", type=int, default=5)

    p = sub.add_parser("evaluate", parents=[common], help="BLEU and Term%% of a hypothesis file")
    p.add_argument("--hyp")
    p.add_argument("--ref")
    p.add_argument("--constraints", help="sidecar written by annotate")
    p.set_defaults(out_dir=None)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic benchmark")
    _synth_options(p)

    p = sub.add_parser("ablation", parents=[common], help="Term%% by annotation rate and system")
    _synth_options(p)
    _model_options(p)
    _train_options(p)
    p.set_defaults(alpha_schedule=[(0.9, 1.0), (0.1, 2.0)])
    p.add_argument("--rates", type=_rates, default=[0.10, 0.05, 0.03, 0.01])
    p.add_argument("--systems", type=_names, default=["tada", "tada_mask"])
    p.add_argument("--seeds", type=_ints, help="comma-separated seeds; the median is reported")
    p.add_argument("--merges", type=int, default=60)
    p.add_argument("--beam", type=int, default=5)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    values = load_config(args.config)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, raw in values.items():
        if key in ("config", "help") or key not in actions:
            raise ConfigError(f"{args.config}: unknown key {key!r} for '{args.command}'")
        action = actions[key]
        convert = action.type or (lambda v: v)
        try:
            if isinstance(action, argparse._AppendAction):
                defaults[key] = [convert(v.strip()) for v in raw.split(",")]
            else:
                defaults[key] = convert(raw)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise ConfigError(f"{args.config}: bad value for {key!r}: {exc}") from None
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    command = "termnmt"
    try:
        args = _apply_config(parser, argv)
        command = f"termnmt {args.command}"
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(asctime)s %(name)s %(message)s")
        return COMMANDS[args.command](args)
    except (CommandError, ConfigError, OSError, ValueError, IndexError, KeyError) as exc:
        print(f"{command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
