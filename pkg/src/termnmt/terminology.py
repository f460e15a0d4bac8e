"""Bilingual term dictionaries, constraint matching and tag augmentation.

An annotated source sentence marks every matched term as::

    <S> source term <C> target term </C>

or, with masking, replaces each source-term token by ``MASK``::

    <S> MASK MASK <C> target term </C>
"""
from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .corpus import (
    ParallelCorpus,
    ParallelPair,
    check_reserved,
    read_lines,
    tokenize,
    write_lines,
)

START, CONSTRAINT, END, MASK = "<S>", "<C>", "</C>", "MASK"
TAGS = (START, CONSTRAINT, END)
CONSTRAINT_DELIMITER = "|||"


class TerminologyError(ValueError):
    pass


class AugmentationError(ValueError):
    pass


@dataclass(frozen=True)
class TermEntry:
    source_tokens: tuple[str, ...]
    target_tokens: tuple[str, ...]
    entry_id: int

    def __post_init__(self):
        object.__setattr__(self, "source_tokens", tuple(self.source_tokens))
        object.__setattr__(self, "target_tokens", tuple(self.target_tokens))
        if not self.source_tokens or not self.target_tokens:
            raise TerminologyError(f"entry {self.entry_id}: both sides must be non-empty")

    @property
    def key(self) -> tuple[tuple[str, ...], tuple[str, ...]]:
        return self.source_tokens, self.target_tokens


class Terminology:
    """Term entries indexed by their first source token."""

    def __init__(self, entries: Sequence[TermEntry] = ()):
        self.entries: list[TermEntry] = list(entries)
        self.index: dict[str, list[TermEntry]] = defaultdict(list)
        self._by_id: dict[int, TermEntry] = {}
        for entry in self.entries:
            if entry.entry_id in self._by_id:
                raise TerminologyError(f"duplicate entry_id {entry.entry_id}")
            self._by_id[entry.entry_id] = entry
            self.index[entry.source_tokens[0]].append(entry)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[Sequence[str], Sequence[str]]]) -> "Terminology":
        return cls([TermEntry(s, t, i) for i, (s, t) in enumerate(pairs)])

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, Terminology) and self.entries == other.entries

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, entry_id: int) -> TermEntry:
        return self._by_id[entry_id]

    def lookup(self, token: str) -> list[TermEntry]:
        return self.index.get(token, [])


def load_terminology(path) -> Terminology:
    """Read a ``source term<TAB>target term`` file, one entry per line."""
    entries = []
    for i, line in enumerate(read_lines(path)):
        cols = line.split("\t")
        if len(cols) != 2:
            raise TerminologyError(f"{path}: line {i}: expected 2 tab-separated columns, got {len(cols)}")
        src, tgt = tokenize(cols[0]), tokenize(cols[1])
        if not src or not tgt:
            raise TerminologyError(f"{path}: line {i}: empty column")
        check_reserved(src, path, i)
        check_reserved(tgt, path, i)
        entries.append(TermEntry(src, tgt, i))
    return Terminology(entries)


def save_terminology(path, terms: Terminology) -> None:
    write_lines(path, (" ".join(e.source_tokens) + "\t" + " ".join(e.target_tokens) for e in terms))


def exclude_overlap(train_terms: Terminology, test_terms: Terminology) -> Terminology:
    """Drop every train entry whose (source, target) pair also appears in ``test_terms``."""
    banned = {e.key for e in test_terms}
    return Terminology([e for e in train_terms if e.key not in banned])


@dataclass(frozen=True)
class ConstraintMatch:
    entry_id: int
    source_span: tuple[int, int]
    target_span: tuple[int, int]


def _find(seq: Sequence[str], sub: Sequence[str], start: int = 0):
    n = len(sub)
    for i in range(start, len(seq) - n + 1):
        if tuple(seq[i:i + n]) == tuple(sub):
            yield i


def match_terms(pair: ParallelPair, terms: Terminology) -> list[ConstraintMatch]:
    """Greedy leftmost-longest matching of dictionary entries.

    At each source position the longest matching entry wins (smallest
    entry_id on ties), but only if its target side still has an unconsumed
    occurrence in the target sentence; otherwise the next candidate is tried.
    """
    src, tgt = pair.source, pair.target
    used_target = [False] * len(tgt)
    matches = []
    i = 0
    while i < len(src):
        candidates = [e for e in terms.lookup(src[i])
                      if tuple(src[i:i + len(e.source_tokens)]) == e.source_tokens]
        candidates.sort(key=lambda e: (-len(e.source_tokens), e.entry_id))
        chosen = None
        for entry in candidates:
            n = len(entry.target_tokens)
            for j in _find(tgt, entry.target_tokens):
                if not any(used_target[j:j + n]):
                    chosen = entry, j
                    break
            if chosen:
                break
        if chosen is None:
            i += 1
            continue
        entry, j = chosen
        end = i + len(entry.source_tokens)
        tend = j + len(entry.target_tokens)
        used_target[j:tend] = [True] * (tend - j)
        matches.append(ConstraintMatch(entry.entry_id, (i, end), (j, tend)))
        i = end
    return matches


@dataclass(frozen=True)
class AnnotatedPair:
    original: ParallelPair
    matches: tuple[ConstraintMatch, ...] = ()
    augmented_source: tuple[str, ...] = ()
    target_constraint_mask: tuple[bool, ...] = ()

    @property
    def annotated(self) -> bool:
        return bool(self.matches)

    def constraints(self) -> list[tuple[str, ...]]:
        """Target terms this pair asks for, in source order."""
        tgt = self.original.target
        return [tuple(tgt[a:b]) for a, b in (m.target_span for m in self.matches)]


def passthrough(pair: ParallelPair) -> AnnotatedPair:
    return AnnotatedPair(pair, (), pair.source, (False,) * len(pair.target))


def apply_tada(pair: ParallelPair, matches: Sequence[ConstraintMatch], mask: bool = False) -> AnnotatedPair:
    """Rewrite each matched source span with inline constraint tags."""
    ordered = sorted(matches, key=lambda m: m.source_span)
    for prev, cur in zip(ordered, ordered[1:]):
        if cur.source_span[0] < prev.source_span[1]:
            raise AugmentationError(f"overlapping source spans {prev.source_span} and {cur.source_span}")
    out: list[str] = []
    tmask = [False] * len(pair.target)
    pos = 0
    for m in ordered:
        s, e = m.source_span
        ts, te = m.target_span
        if not (0 <= s < e <= len(pair.source) and 0 <= ts < te <= len(pair.target)):
            raise AugmentationError(f"match {m} out of bounds for pair {pair.id}")
        out.extend(pair.source[pos:s])
        out.append(START)
        out.extend([MASK] * (e - s) if mask else pair.source[s:e])
        out.append(CONSTRAINT)
        out.extend(pair.target[ts:te])
        out.append(END)
        tmask[ts:te] = [True] * (te - ts)
        pos = e
    out.extend(pair.source[pos:])
    return AnnotatedPair(pair, tuple(ordered), tuple(out), tuple(tmask))


def check_tag_grammar(tokens: Sequence[str]) -> int:
    """Validate ``<S> ... <C> ... </C>`` nesting; returns the number of tagged regions."""
    state = 0  # 0 outside, 1 after <S>, 2 after <C>
    regions = 0
    for i, tok in enumerate(tokens):
        expected = {0: START, 1: CONSTRAINT, 2: END}[state]
        if tok in TAGS:
            if tok != expected:
                raise AugmentationError(f"unexpected {tok} at position {i}")
            state = (state + 1) % 3
            regions += tok == END
    if state:
        raise AugmentationError("unterminated tagged region")
    return regions


def deaugment(augmented: Sequence[str], matches: Sequence[ConstraintMatch], terms: Terminology) -> list[str]:
    """Recover the plain source from an augmented one."""
    check_tag_grammar(augmented)
    ordered = sorted(matches, key=lambda m: m.source_span)
    out: list[str] = []
    region: list[str] = []
    k = 0
    state = 0
    for tok in augmented:
        if tok == START:
            state, region = 1, []
        elif tok == CONSTRAINT:
            if region and all(t == MASK for t in region):
                region = list(terms[ordered[k].entry_id].source_tokens)
            out.extend(region)
            k += 1
            state = 2
        elif tok == END:
            state = 0
        elif state == 1:
            region.append(tok)
        elif state == 0:
            out.append(tok)
    return out


def annotate_corpus(corpus: ParallelCorpus, terms: Terminology, rate: float, mask: bool = False,
                    seed: int = 0) -> list[AnnotatedPair]:
    """Augment exactly ``floor(rate * len(corpus))`` matchable pairs.

    The annotated subset is drawn uniformly without replacement from the
    pairs with at least one match (all of them if there are fewer).
    """
    if not 0 <= rate <= 1:
        raise ValueError(f"annotation rate must lie in [0, 1], got {rate}")
    all_matches = [match_terms(p, terms) for p in corpus]
    matchable = [i for i, m in enumerate(all_matches) if m]
    quota = int(Fraction(str(rate)) * len(corpus))
    if quota >= len(matchable):
        chosen = set(matchable)
    else:
        chosen = set(random.Random(seed).sample(matchable, quota))
    return [apply_tada(p, all_matches[i], mask) if i in chosen else passthrough(p)
            for i, p in enumerate(corpus)]


def format_constraints(constraints: Sequence[Sequence[str]]) -> str:
    return f" {CONSTRAINT_DELIMITER} ".join(" ".join(c) for c in constraints)


def parse_constraints(line: str) -> list[tuple[str, ...]]:
    return [tuple(part.split()) for part in line.split(CONSTRAINT_DELIMITER) if part.strip()]


def write_constraints(path, annotated: Sequence[AnnotatedPair]) -> None:
    write_lines(path, (format_constraints(a.constraints()) for a in annotated))


def read_constraints(path) -> list[list[tuple[str, ...]]]:
    return [parse_constraints(line) for line in read_lines(Path(path))]
