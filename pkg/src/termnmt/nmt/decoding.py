"""Greedy and beam-search decoding.

A hypothesis finishes when it emits EOS, or when it reaches ``max_len``
tokens, in which case EOS is appended without being scored. Finished
hypotheses are ranked by log-probability divided by the number of scored
tokens; ties go to the lexicographically smallest id sequence.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np
import torch

from .data import pad
from .model import Seq2SeqModel
from .vocab import BOS_ID, EOS_ID, PAD_ID

BANNED = (PAD_ID, BOS_ID)


@torch.no_grad()
def beam_search(model: Seq2SeqModel, source_ids: Sequence[int], beam_size: int = 5,
                max_len: int = 100) -> list[int]:
    """Return the best hypothesis ids, always terminated by EOS."""
    return beam_search_batch(model, [source_ids], beam_size, max_len)[0]


def _select(live, logp: np.ndarray, beam_size: int):
    totals = np.array([s for _, s in live])[:, None] + logp
    flat = totals.ravel()
    k = min(beam_size, int(np.isfinite(flat).sum()))
    if k == 0:
        return []
    # everything tied with the k-th best competes, then exact tie-break on ids
    cutoff = np.partition(flat, -k)[-k]
    rows, cols = np.nonzero(totals >= cutoff)
    cands = [(float(totals[r, c]), live[r][0] + (int(c),)) for r, c in zip(rows, cols)]
    return sorted(cands, key=lambda x: (-x[0], x[1]))[:k]


@torch.no_grad()
def beam_search_batch(model: Seq2SeqModel, sources: Sequence[Sequence[int]], beam_size: int = 5,
                      max_len: int = 100) -> list[list[int]]:
    """Independent beam searches for several sentences of equal length, run in lockstep.

    Every step issues one decoder call covering all live hypotheses.
    """
    if beam_size < 1 or max_len < 1:
        raise ValueError("beam_size and max_len must be >= 1")
    if not sources:
        return []
    if len({len(s) for s in sources}) != 1:
        raise ValueError("beam_search_batch expects sources of equal length")
    was_training = model.training
    model.eval()
    src = torch.tensor([list(s) for s in sources], dtype=torch.long)
    model.check_ids(src)
    memory, blocked = model.encode(src)

    n = len(sources)
    live: list[list[tuple[tuple[int, ...], float]]] = [[((), 0.0)] for _ in range(n)]
    finished: list[list[tuple[float, tuple[int, ...]]]] = [[] for _ in range(n)]
    for _ in range(max_len):
        owners = [i for i in range(n) for _ in live[i]]
        if not owners:
            break
        rows = torch.tensor(owners)
        prefixes = torch.tensor([(BOS_ID,) + t for i in range(n) for t, _ in live[i]], dtype=torch.long)
        logits = model.decode(memory[rows], blocked[rows], prefixes)[:, -1]
        logp = torch.log_softmax(logits.double(), dim=-1).numpy().copy()
        logp[:, list(BANNED)] = -np.inf
        offset = 0
        for i in range(n):
            count = len(live[i])
            chosen = _select(live[i], logp[offset:offset + count], beam_size) if count else []
            offset += count
            live[i] = []
            for score, toks in chosen:
                if toks[-1] == EOS_ID:
                    finished[i].append((score / len(toks), toks))
                else:
                    live[i].append((toks, score))
    model.train(was_training)
    results = []
    for i in range(n):
        for toks, score in live[i]:
            finished[i].append((score / len(toks), toks + (EOS_ID,)))
        best = min(finished[i], key=lambda f: (-f[0], f[1]))
        results.append(list(best[1]))
    return results


@torch.no_grad()
def greedy_decode(model: Seq2SeqModel, sources: Sequence[Sequence[int]], max_len: int = 100) -> list[list[int]]:
    """Batched argmax decoding; each output ends with EOS."""
    if not sources:
        return []
    was_training = model.training
    model.eval()
    src = pad(sources)
    model.check_ids(src)
    memory, blocked = model.encode(src)
    n = len(sources)
    out = torch.full((n, 1), BOS_ID, dtype=torch.long)
    done = torch.zeros(n, dtype=torch.bool)
    for _ in range(max_len):
        logits = model.decode(memory, blocked, out)[:, -1].double()
        logits[:, list(BANNED)] = -torch.inf
        nxt = logits.argmax(dim=-1)
        nxt = torch.where(done, torch.full_like(nxt, PAD_ID), nxt)
        out = torch.cat([out, nxt[:, None]], dim=1)
        done |= nxt == EOS_ID
        if bool(done.all()):
            break
    model.train(was_training)
    results = []
    for row in out[:, 1:].tolist():
        ids = []
        for i in row:
            if i in (EOS_ID, PAD_ID):
                break
            ids.append(i)
        results.append(ids + [EOS_ID])
    return results


def default_max_len(source_len: int) -> int:
    return 2 * source_len + 10


def translate_ids(model: Seq2SeqModel, sources: Sequence[Sequence[int]], beam_size: int = 5,
                  max_len: int | None = None, chunk: int = 64) -> list[list[int]]:
    """Decode many sentences; batches group equal-length sources so no padding is needed."""
    groups: dict[int, list[int]] = {}
    for i, s in enumerate(sources):
        groups.setdefault(len(s), []).append(i)
    if beam_size == 1:
        results: list[list[int] | None] = [None] * len(sources)
        for length, idx in sorted(groups.items()):
            hyps = greedy_decode(model, [sources[i] for i in idx], max_len or default_max_len(length))
            for i, hyp in zip(idx, hyps):
                results[i] = hyp
        return results
    results = [None] * len(sources)
    for length, idx in sorted(groups.items()):
        for start in range(0, len(idx), chunk):
            part = idx[start:start + chunk]
            hyps = beam_search_batch(model, [sources[i] for i in part], beam_size,
                                     max_len or default_max_len(length))
            for i, hyp in zip(part, hyps):
                results[i] = hyp
    return results
