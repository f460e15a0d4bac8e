"""Joint byte-pair encoding with ``@@`` continuation markers.

Every non-final unit of a segmented word carries the ``@@`` suffix, so
``join_bpe`` is a plain concatenation. Tag tokens (and any declared
specials) are protected: they are neither counted during learning nor
split when applying the model.
"""
from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from .corpus import TAG_TOKENS, read_lines, write_lines

MARKER = "@@"
HEADER = "#termnmt-bpe"
FORMAT_VERSION = 1

Pair = tuple[str, str]


class BpeError(ValueError):
    pass


def merge_symbols(symbols: Sequence[str], pair: Pair) -> tuple[str, ...]:
    """Replace non-overlapping occurrences of ``pair``, scanning left to right."""
    a, b = pair
    out = []
    i = 0
    n = len(symbols)
    while i < n:
        if i + 1 < n and symbols[i] == a and symbols[i + 1] == b:
            out.append(a + b)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return tuple(out)


def _pairs(symbols: Sequence[str]) -> Counter:
    return Counter(zip(symbols, symbols[1:]))


@dataclass
class BpeModel:
    merges: list[Pair]
    protected: frozenset[str] = field(default_factory=lambda: frozenset(TAG_TOKENS))
    end_marker: str = MARKER

    def __post_init__(self):
        self.merges = [tuple(m) for m in self.merges]
        if len(set(self.merges)) != len(self.merges):
            raise BpeError("duplicate merge rule")
        self.protected = frozenset(self.protected) | frozenset(TAG_TOKENS)
        self.ranks = {m: r for r, m in enumerate(self.merges)}
        self._segment = lru_cache(maxsize=None)(self._segment_uncached)

    def _segment_uncached(self, word: str) -> tuple[str, ...]:
        symbols = tuple(word)
        while len(symbols) > 1:
            best = min(zip(symbols, symbols[1:]), key=lambda p: self.ranks.get(p, len(self.ranks)))
            if best not in self.ranks:
                break
            symbols = merge_symbols(symbols, best)
        return symbols

    def segment(self, token: str) -> list[str]:
        if token in self.protected:
            return [token]
        if token.endswith(self.end_marker):
            raise BpeError(f"token {token!r} ends with the reserved marker {self.end_marker!r}")
        parts = self._segment(token)
        return [p + self.end_marker for p in parts[:-1]] + [parts[-1]]

    def save(self, path) -> None:
        head = f"{HEADER} {FORMAT_VERSION}"
        extra = sorted(self.protected - frozenset(TAG_TOKENS))
        if extra:
            head += "\t" + " ".join(extra)
        write_lines(path, [head] + [f"{a} {b}" for a, b in self.merges])

    @classmethod
    def load(cls, path) -> "BpeModel":
        lines = read_lines(path)
        if not lines or not lines[0].startswith(HEADER + " "):
            raise BpeError(f"{path}: missing {HEADER} header")
        head, _, specials = lines[0].partition("\t")
        version = head.split()[1]
        if version != str(FORMAT_VERSION):
            raise BpeError(f"{path}: unsupported merge-file version {version}")
        merges = []
        for i, line in enumerate(lines[1:], start=1):
            parts = line.split(" ")
            if len(parts) != 2 or not all(parts):
                raise BpeError(f"{path}: line {i}: expected two space-separated symbols")
            merges.append((parts[0], parts[1]))
        return cls(merges, frozenset(specials.split()))


def learn_bpe(corpus_tokens: Iterable[str] | Counter, num_merges: int,
              protected: Iterable[str] = ()) -> BpeModel:
    """Learn merge rules by repeatedly merging the most frequent adjacent pair.

    Ties are broken by the smallest ``(left, right)`` pair. Learning stops
    after ``num_merges`` rounds or once no pair occurs at least twice.
    """
    if num_merges < 1:
        raise BpeError("num_merges must be positive")
    protected = frozenset(protected) | frozenset(TAG_TOKENS)
    counts = corpus_tokens if isinstance(corpus_tokens, Counter) else Counter(corpus_tokens)
    vocab = sorted((w, c) for w, c in counts.items() if w not in protected and c > 0)
    if not vocab:
        raise BpeError("cannot learn BPE from an empty corpus")

    words = [tuple(w) for w, _ in vocab]
    freqs = [c for _, c in vocab]
    stats: Counter = Counter()
    where: dict[Pair, set[int]] = defaultdict(set)
    for i, sym in enumerate(words):
        for p, k in _pairs(sym).items():
            stats[p] += k * freqs[i]
            where[p].add(i)

    merges: list[Pair] = []
    while len(merges) < num_merges and stats:
        best = min(stats.items(), key=lambda kv: (-kv[1], kv[0]))
        pair, freq = best
        if freq < 2:
            break
        merges.append(pair)
        for i in sorted(where.pop(pair, ())):
            old = words[i]
            new = merge_symbols(old, pair)
            for p, k in _pairs(old).items():
                stats[p] -= k * freqs[i]
                if stats[p] <= 0:
                    del stats[p]
                if p != pair:
                    where[p].discard(i)
            for p, k in _pairs(new).items():
                stats[p] += k * freqs[i]
                where[p].add(i)
            words[i] = new
        stats.pop(pair, None)
    return BpeModel(merges, protected)


def apply_bpe(model: BpeModel, tokens: Sequence[str]) -> list[str]:
    units: list[str] = []
    for tok in tokens:
        units.extend(model.segment(tok))
    return units


def join_bpe(units: Sequence[str], marker: str = MARKER) -> list[str]:
    """Undo ``apply_bpe`` by gluing every ``@@``-suffixed unit onto the next."""
    tokens: list[str] = []
    pending = ""
    for unit in units:
        if unit.endswith(marker):
            pending += unit[: -len(marker)]
        else:
            tokens.append(pending + unit)
            pending = ""
    if pending:
        raise BpeError("dangling continuation marker at end of sequence")
    return tokens
