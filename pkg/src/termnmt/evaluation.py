"""Corpus BLEU-4 and terminology usage rate (Term%)."""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Sequence

MAX_ORDER = 4
SMOOTH_EPSILON = 1e-9


class EvaluationError(ValueError):
    pass


@dataclass
class BleuStats:
    bleu: float
    ngram_precisions: list[float]
    brevity_penalty: float
    hyp_length: int
    ref_length: int
    matches: list[int]
    totals: list[int]
    unsmoothed_bleu: float


def ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(hypotheses: Sequence[Sequence[str]], references: Sequence[Sequence[str]]) -> BleuStats:
    """Corpus-level BLEU-4 with a single reference per sentence.

    A zero n-gram precision is replaced by ``SMOOTH_EPSILON`` so that tiny
    corpora still produce a finite score; ``unsmoothed_bleu`` keeps the raw
    value (0 whenever any precision is zero). An order with no hypothesis
    n-grams at all (every sentence shorter than n) counts as precision 1;
    the brevity penalty still applies.
    """
    if len(hypotheses) != len(references):
        raise EvaluationError(f"{len(hypotheses)} hypotheses vs {len(references)} references")
    if not hypotheses:
        raise EvaluationError("cannot score an empty hypothesis set")
    matches = [0] * MAX_ORDER
    totals = [0] * MAX_ORDER
    hyp_len = ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, MAX_ORDER + 1):
            h = ngram_counts(hyp, n)
            r = ngram_counts(ref, n)
            matches[n - 1] += sum(min(c, r[g]) for g, c in h.items())
            totals[n - 1] += max(len(hyp) - n + 1, 0)

    raw = [m / t if t else 1.0 for m, t in zip(matches, totals)]
    precisions = [p if p > 0 else SMOOTH_EPSILON for p in raw]
    if hyp_len == 0:
        bp = 0.0
    elif hyp_len < ref_len:
        bp = math.exp(1 - ref_len / hyp_len)
    else:
        bp = 1.0
    geo = math.exp(sum(math.log(p) for p in precisions) / MAX_ORDER)
    score = 100.0 * bp * geo
    unsmoothed = score if all(p > 0 for p in raw) else 0.0
    return BleuStats(score, precisions, bp, hyp_len, ref_len, matches, totals, unsmoothed)


def count_generated(hypothesis: Sequence[str], constraints: Sequence[Sequence[str]]) -> int:
    """Count constraints whose target tokens occur contiguously in ``hypothesis``.

    Repeated copies of the same constraint each need their own, disjoint
    occurrence; occurrences are consumed greedily left to right. Distinct
    constraints may share tokens.
    """
    found = 0
    for term, wanted in Counter(tuple(c) for c in constraints).items():
        n = len(term)
        i = available = 0
        while i <= len(hypothesis) - n and available < wanted:
            if tuple(hypothesis[i:i + n]) == term:
                available += 1
                i += n
            else:
                i += 1
        found += available
    return found


def term_usage(hypotheses: Sequence[Sequence[str]],
               expected_constraints: Sequence[Sequence[Sequence[str]]]) -> tuple[int, int, float]:
    """Return ``(generated, total, term_pct)``; term_pct is 0 when there are no constraints."""
    if len(hypotheses) != len(expected_constraints):
        raise EvaluationError(
            f"{len(hypotheses)} hypotheses vs {len(expected_constraints)} constraint lines")
    generated = sum(count_generated(h, c) for h, c in zip(hypotheses, expected_constraints))
    total = sum(len(c) for c in expected_constraints)
    pct = 100.0 * generated / total if total else 0.0
    return generated, total, pct


@dataclass
class EvalReport:
    bleu: float
    term_pct: float
    constraints_generated: int
    constraints_total: int
    ngram_precisions: list[float] = field(default_factory=list)
    brevity_penalty: float = 1.0
    hyp_length: int = 0
    ref_length: int = 0
    unsmoothed_bleu: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        return cls(**json.loads(text))

    def summary(self) -> str:
        return (f"BLEU {self.bleu:.2f}  Term% {self.term_pct:.2f} "
                f"({self.constraints_generated}/{self.constraints_total})")


def evaluate(hypotheses, references, expected_constraints) -> EvalReport:
    stats = bleu(hypotheses, references)
    generated, total, pct = term_usage(hypotheses, expected_constraints)
    return EvalReport(
        bleu=stats.bleu,
        term_pct=pct,
        constraints_generated=generated,
        constraints_total=total,
        ngram_precisions=stats.ngram_precisions,
        brevity_penalty=stats.brevity_penalty,
        hyp_length=stats.hyp_length,
        ref_length=stats.ref_length,
        unsmoothed_bleu=stats.unsmoothed_bleu,
    )
