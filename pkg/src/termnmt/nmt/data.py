"""Turning annotated, BPE-segmented pairs into padded id batches."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import torch
from torch import Tensor

from ..subword import BpeModel, apply_bpe
from ..terminology import AnnotatedPair
from .loss import constraint_weights
from .vocab import BOS_ID, EOS_ID, PAD_ID, Vocabulary


@dataclass(frozen=True)
class Example:
    source: tuple[int, ...]
    target: tuple[int, ...]  # without BOS/EOS
    constraint: tuple[bool, ...]  # one flag per target id


@dataclass
class Batch:
    source: Tensor  # (B, S)
    target_in: Tensor  # (B, T) BOS + target
    target_out: Tensor  # (B, T) target + EOS
    constraint: Tensor  # (B, T) bool
    padding: Tensor  # (B, T) bool

    def weights(self, alpha: float) -> Tensor:
        return constraint_weights(self.constraint, self.padding, alpha)

    @property
    def num_tokens(self) -> int:
        return int((~self.padding).sum())


def segment_with_mask(bpe: BpeModel, tokens: Sequence[str], mask: Sequence[bool]) -> tuple[list[str], list[bool]]:
    """Segment tokens, copying each token's constraint flag onto its units."""
    units, flags = [], []
    for tok, flag in zip(tokens, mask, strict=True):
        pieces = bpe.segment(tok)
        units.extend(pieces)
        flags.extend([flag] * len(pieces))
    return units, flags


def encode_pairs(annotated: Sequence[AnnotatedPair], bpe: BpeModel, vocab: Vocabulary) -> list[Example]:
    out = []
    for a in annotated:
        src = vocab.encode(apply_bpe(bpe, a.augmented_source))
        units, flags = segment_with_mask(bpe, a.original.target, a.target_constraint_mask)
        out.append(Example(tuple(src), tuple(vocab.encode(units)), tuple(flags)))
    return out


def pad(seqs: Sequence[Sequence[int]], value: int = PAD_ID) -> Tensor:
    width = max(len(s) for s in seqs)
    arr = np.full((len(seqs), width), value, dtype=np.int64)
    for i, s in enumerate(seqs):
        arr[i, : len(s)] = s
    return torch.from_numpy(arr)


def collate(examples: Sequence[Example]) -> Batch:
    src = pad([e.source for e in examples])
    tin = pad([(BOS_ID,) + e.target for e in examples])
    tout = pad([e.target + (EOS_ID,) for e in examples])
    cons = pad([tuple(int(f) for f in e.constraint) + (0,) for e in examples], 0).bool()
    return Batch(src, tin, tout, cons, tout == PAD_ID)


def make_batches(examples: Sequence[Example], tokens_per_batch: int) -> list[list[int]]:
    """Group example indices into length-sorted batches of at most ``tokens_per_batch`` padded tokens."""
    order = sorted(range(len(examples)),
                   key=lambda i: (len(examples[i].source), len(examples[i].target), i))
    batches: list[list[int]] = []
    cur: list[int] = []
    width = 0
    for i in order:
        ex = examples[i]
        w = max(width, len(ex.source), len(ex.target) + 1)
        if cur and w * (len(cur) + 1) > tokens_per_batch:
            batches.append(cur)
            cur, w = [], max(len(ex.source), len(ex.target) + 1)
        cur.append(i)
        width = w
    if cur:
        batches.append(cur)
    return batches
