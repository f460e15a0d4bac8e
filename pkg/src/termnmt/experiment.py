"""End-to-end runs on a synthetic benchmark: annotate, segment, train, decode, score.

Four systems are compared:

* ``baseline``: no annotation at train or test time
* ``tada``: inline tags, source term kept
* ``tada_mask``: inline tags, source term replaced by MASK tokens
* ``tada_mask_wce``: as ``tada_mask`` plus the two-phase alpha schedule
"""
from __future__ import annotations

import json
import logging
import time
from collections import Counter
from dataclasses import asdict, dataclass, field, replace
from statistics import median
from typing import Sequence

from pathlib import Path

import torch

from .corpus import ParallelCorpus, write_lines
from .evaluation import EvalReport, bleu, evaluate
from .nmt import (ModelConfig, Seq2SeqModel, TrainConfig, Vocabulary, encode_pairs,
                  train, translate_ids)
from .nmt.data import Example
from .subword import BpeModel, apply_bpe, join_bpe, learn_bpe
from .synth import SynthBenchmark, SynthSpec, generate
from .terminology import AnnotatedPair, Terminology, annotate_corpus, passthrough

log = logging.getLogger(__name__)

SYSTEMS = ("baseline", "tada", "tada_mask", "tada_mask_wce")
ABLATION_RATES = (0.10, 0.05, 0.03, 0.01)


@dataclass
class RunSettings:
    """Desk-scale knobs shared by every system of a comparison."""

    rate: float = 0.10
    wce_schedule: list[tuple[float, float]] = field(default_factory=lambda: [(0.9, 1.0), (0.1, 2.0)])
    num_merges: int = 60
    num_layers: int = 3
    model_dim: int = 64
    ffn_dim: int = 128
    num_heads: int = 4
    dropout_rate: float = 0.1
    epochs: int = 30
    min_epochs: int = 30
    tokens_per_batch: int = 400
    learning_rate: float = 0.003
    optimizer: str = "adam"
    warmup_steps: int = 300
    lr_decay: str = "linear"
    beam_size: int = 5
    seed: int = 0


@dataclass
class SystemResult:
    system: str
    rate: float
    seed: int
    report: EvalReport
    seconds: float
    log: list = field(default_factory=list)
    hypotheses: list = field(default_factory=list, repr=False)
    plain_bleu: float | None = None

    def row(self) -> dict:
        return {"system": self.system, "rate": self.rate, "seed": self.seed,
                "term_pct": self.report.term_pct, "bleu": self.report.bleu, "plain_bleu": self.plain_bleu,
                "seconds": round(self.seconds, 1)}


def system_flags(system: str) -> tuple[bool, bool, bool]:
    """(annotate, mask, weighted loss) for a system name."""
    if system not in SYSTEMS:
        raise ValueError(f"unknown system {system!r}; choose from {SYSTEMS}")
    return system != "baseline", "mask" in system, system.endswith("wce")


def learn_joint_bpe(corpus: ParallelCorpus, num_merges: int) -> BpeModel:
    counts = Counter()
    for p in corpus:
        counts.update(p.source)
        counts.update(p.target)
    return learn_bpe(counts, num_merges)


def annotate_test(test: ParallelCorpus, terms: Terminology, annotate: bool, mask: bool) -> list[AnnotatedPair]:
    full = annotate_corpus(test, terms, 1.0, mask)
    return full if annotate else [passthrough(p) for p in test]


def build_vocab(bpe: BpeModel, annotated: Sequence[AnnotatedPair]) -> Vocabulary:
    seqs = []
    for a in annotated:
        seqs.append(apply_bpe(bpe, a.augmented_source))
        seqs.append(apply_bpe(bpe, a.original.target))
    return Vocabulary.build(seqs)


def translate_tokens(model: Seq2SeqModel, bpe: BpeModel, vocab: Vocabulary,
                     sources: Sequence[Sequence[str]], beam_size: int) -> list[list[str]]:
    ids = [vocab.encode(apply_bpe(bpe, s)) for s in sources]
    out = translate_ids(model, ids, beam_size)
    return [join_bpe(_drop_dangling(vocab.decode(h))) for h in out]


def _drop_dangling(units: list[str]) -> list[str]:
    # a truncated hypothesis may end mid-word
    while units and units[-1].endswith("@@"):
        units = units[:-1]
    return units


def bleu_validator(valid: Sequence[AnnotatedPair], bpe: BpeModel, vocab: Vocabulary):
    sources = [a.augmented_source for a in valid]
    refs = [list(a.original.target) for a in valid]

    def score(model: Seq2SeqModel) -> float:
        return bleu(translate_tokens(model, bpe, vocab, sources, 1), refs).bleu

    return score


def run_system(bench: SynthBenchmark, system: str, settings: RunSettings,
               bpe: BpeModel | None = None) -> SystemResult:
    """Train one system on ``bench`` and score it on the held-out test set."""
    start = time.perf_counter()
    annotate, mask, weighted = system_flags(system)
    seed = settings.seed
    bpe = bpe or learn_joint_bpe(bench.train, settings.num_merges)
    rate = settings.rate if annotate else 0.0
    train_ann = annotate_corpus(bench.train, bench.train_terms, rate, mask, seed)
    valid_ann = annotate_corpus(bench.valid, bench.train_terms, 1.0 if annotate else 0.0, mask, seed)
    test_ann = annotate_test(bench.test, bench.test_terms, annotate, mask)

    vocab = build_vocab(bpe, train_ann)
    torch.manual_seed(seed)
    model = Seq2SeqModel(ModelConfig(
        vocab_size=len(vocab), num_layers=settings.num_layers, model_dim=settings.model_dim,
        ffn_dim=settings.ffn_dim, num_heads=settings.num_heads,
        dropout_rate=settings.dropout_rate), vocab)
    config = TrainConfig(
        alpha_schedule=settings.wce_schedule if weighted else [(1.0, 1.0)],
        min_epochs=settings.min_epochs, max_epochs=settings.epochs,
        tokens_per_batch=settings.tokens_per_batch, seed=seed,
        learning_rate=settings.learning_rate, optimizer=settings.optimizer,
        warmup_steps=settings.warmup_steps, lr_decay=settings.lr_decay)
    validate = None
    if settings.min_epochs < settings.epochs:
        validate = bleu_validator(valid_ann, bpe, vocab)
    model, history = train(model, encode_pairs(train_ann, bpe, vocab), config, validate)

    hyps = translate_tokens(model, bpe, vocab, [a.augmented_source for a in test_ann], settings.beam_size)
    refs = [list(p.target) for p in bench.test]
    # the baseline is scored against the same constraints as the tagged systems
    constraints = [a.constraints() for a in annotate_test(bench.test, bench.test_terms, True, False)]
    report = evaluate(hyps, refs, constraints)
    plain = bleu(hyps, [bench.plain_translation(p.source) for p in bench.test]).bleu
    elapsed = time.perf_counter() - start
    log.info("%s rate=%.2f seed=%d: %s plain BLEU %.2f (%.0fs)", system, rate, seed, report.summary(),
             plain, elapsed)
    return SystemResult(system, settings.rate, seed, report, elapsed, [asdict(h) for h in history],
                        hyps, plain)


def compare_systems(spec: SynthSpec, settings: RunSettings, systems: Sequence[str] = SYSTEMS) -> dict[str, SystemResult]:
    bench = generate(spec)
    bpe = learn_joint_bpe(bench.train, settings.num_merges)
    return {s: run_system(bench, s, settings, bpe) for s in systems}


def _save_run_log(directory: Path, res: SystemResult) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    name = f"{res.system}_rate{res.rate:g}_seed{res.seed}.json"
    data = {"row": res.row(), "report": asdict(res.report), "epochs": res.log}
    write_lines(directory / name, [json.dumps(data, indent=2, sort_keys=True)])


@dataclass
class AblationCell:
    system: str
    rate: float
    term_pcts: list[float]
    bleus: list[float]
    error: str | None = None

    @property
    def term_pct(self) -> float:
        return median(self.term_pcts) if self.term_pcts else float("nan")

    @property
    def bleu(self) -> float:
        return median(self.bleus) if self.bleus else float("nan")

    def row(self) -> dict:
        return {"system": self.system, "rate": self.rate, "term_pct": self.term_pct,
                "bleu": self.bleu, "term_pcts": self.term_pcts, "error": self.error}


def ablation(spec: SynthSpec, settings: RunSettings, rates: Sequence[float] = ABLATION_RATES,
             seeds: Sequence[int] = (0,), systems: Sequence[str] = ("tada", "tada_mask"),
             log_dir: Path | None = None) -> list[AblationCell]:
    """Term% per (system, rate), median over ``seeds``; a failing cell keeps its error.

    With ``log_dir`` each finished run also writes its epoch log and report there.
    """
    bench = generate(spec)
    bpe = learn_joint_bpe(bench.train, settings.num_merges)
    cells = []
    for rate in rates:
        for system in systems:
            cell = AblationCell(system, rate, [], [])
            for seed in seeds:
                try:
                    res = run_system(bench, system, replace(settings, rate=rate, seed=seed), bpe)
                except Exception as exc:  # keep completed cells
                    log.exception("ablation cell %s/%s failed", system, rate)
                    cell.error = f"{type(exc).__name__}: {exc}"
                    break
                if log_dir is not None:
                    _save_run_log(Path(log_dir), res)
                cell.term_pcts.append(res.report.term_pct)
                cell.bleus.append(res.report.bleu)
            cells.append(cell)
    return cells
