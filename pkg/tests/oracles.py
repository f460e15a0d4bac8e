"""Independent brute-force reference implementations used by the tests.

None of these import the code paths they check; the decoding oracle only uses
the model's forward pass, never the search code.
"""
from __future__ import annotations

import itertools
import math

import torch

from termnmt.nmt import BOS_ID, EOS_ID, PAD_ID, forward


def bpe_oracle(word_counts: dict[str, int], num_merges: int) -> list[tuple[str, str]]:
    """Recount every adjacent pair from scratch before each merge."""
    words = {w: list(w) for w in word_counts}
    merges = []
    for _ in range(num_merges):
        counts: dict[tuple[str, str], int] = {}
        for w, syms in words.items():
            for i in range(len(syms) - 1):
                pair = (syms[i], syms[i + 1])
                counts[pair] = counts.get(pair, 0) + word_counts[w]
        if not counts:
            break
        best_freq = max(counts.values())
        if best_freq < 2:
            break
        best = sorted(p for p, c in counts.items() if c == best_freq)[0]
        merges.append(best)
        for w, syms in words.items():
            out, i = [], 0
            while i < len(syms):
                if i + 1 < len(syms) and (syms[i], syms[i + 1]) == best:
                    out.append(syms[i] + syms[i + 1])
                    i += 2
                else:
                    out.append(syms[i])
                    i += 1
            words[w] = out
    return merges


def bleu_oracle(hyps, refs) -> float:
    """Naive corpus BLEU-4: dict counting, explicit loops, epsilon for zero precisions."""
    num = [0, 0, 0, 0]
    den = [0, 0, 0, 0]
    c = r = 0
    for h, ref in zip(hyps, refs):
        c += len(h)
        r += len(ref)
        for n in range(1, 5):
            hc: dict = {}
            rc: dict = {}
            for i in range(len(h) - n + 1):
                g = "\x00".join(h[i:i + n])
                hc[g] = hc.get(g, 0) + 1
            for i in range(len(ref) - n + 1):
                g = "\x00".join(ref[i:i + n])
                rc[g] = rc.get(g, 0) + 1
            for g, k in hc.items():
                num[n - 1] += min(k, rc.get(g, 0))
            den[n - 1] += sum(hc.values())
    logs = 0.0
    for n in range(4):
        p = num[n] / den[n] if den[n] else 1.0
        logs += math.log(p if p > 0 else 1e-9)
    bp = 1.0 if c >= r else (math.exp(1 - r / c) if c else 0.0)
    return 100 * bp * math.exp(logs / 4)


def occurrences(seq, sub) -> list[tuple[int, int]]:
    n = len(sub)
    return [(i, i + n) for i in range(len(seq) - n + 1) if tuple(seq[i:i + n]) == tuple(sub)]


def max_disjoint(spans) -> int:
    """Largest pairwise-disjoint subset, by trying every subset."""
    best = 0
    for k in range(len(spans), 0, -1):
        for combo in itertools.combinations(spans, k):
            ordered = sorted(combo)
            if all(a[1] <= b[0] for a, b in zip(ordered, ordered[1:])):
                return k
    return best


def term_usage_oracle(hyp, constraints) -> int:
    """Max number of constraints satisfiable when identical constraints need disjoint occurrences."""
    total = 0
    for term in set(map(tuple, constraints)):
        wanted = sum(1 for c in constraints if tuple(c) == term)
        total += min(wanted, max_disjoint(occurrences(hyp, term)))
    return total


def sequence_logprob(model, src, seq):
    with torch.no_grad():
        probs = forward(model, src, [BOS_ID] + seq[:-1])
    return sum(math.log(float(probs[t, tok])) for t, tok in enumerate(seq))


def exhaustive_best(model, src, max_len, vocab_size):
    """Score every finished or max_len-truncated sequence with ``forward``."""
    allowed = [i for i in range(vocab_size) if i not in (PAD_ID, BOS_ID, EOS_ID)]
    best = None
    for n in range(0, max_len + 1):
        for body in itertools.product(allowed, repeat=n):
            seqs = []
            if n < max_len:
                seqs.append((list(body) + [EOS_ID], n + 1))
            if n == max_len:
                seqs.append((list(body), n))
            for seq, scored in seqs:
                if not seq:
                    continue
                score = sequence_logprob(model, src, seq) / scored
                key = (-score, tuple(seq))
                if best is None or key < best[0]:
                    best = (key, seq)
    seq = best[1]
    return seq if seq[-1] == EOS_ID else seq + [EOS_ID]
