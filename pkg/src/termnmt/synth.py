"""Seeded synthetic parallel data with train/test terminologies.

The "translation" is word-for-word: source word ``w_i`` becomes target word
``v_i``. Training-dictionary phrases are built from source words reserved
for them and are always rendered by their dictionary target. Test-dictionary
phrases use ordinary source words but map them to a *different* ordinary
target word: a conflicting constraint the model never saw annotated.

Sentences may also carry a name of one or two words, each a fresh string of
target syllables that is not a dictionary word. Names are copied unchanged,
much as real corpora copy proper nouns and numbers.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .corpus import ParallelCorpus, ParallelPair
from .terminology import TermEntry, Terminology

SOURCE_SYLLABLES = tuple(c + v for c in "bcdfghjklm" for v in "aei")
TARGET_SYLLABLES = tuple(c + v for c in "npqrstvwxz" for v in "ouy")


class SynthError(ValueError):
    pass


@dataclass
class SynthSpec:
    source_vocab_size: int = 150
    target_vocab_size: int = 150
    min_len: int = 3
    max_len: int = 8
    train_size: int = 5000
    valid_size: int = 200
    test_size: int = 200
    train_dict_size: int = 50
    test_dict_size: int = 10
    substitution_rate: float = 0.3
    max_term_len: int = 2
    swap_adjacent: bool = False
    name_rate: float = 0.5
    seed: int = 0

    def __post_init__(self):
        for name in ("source_vocab_size", "target_vocab_size", "min_len", "max_len",
                     "train_size", "valid_size", "test_size", "max_term_len"):
            if getattr(self, name) <= 0:
                raise SynthError(f"{name} must be positive")
        if self.train_dict_size < 0 or self.test_dict_size < 0:
            raise SynthError("dictionary sizes must be non-negative")
        if self.min_len > self.max_len:
            raise SynthError("min_len exceeds max_len")
        if not 0 <= self.substitution_rate <= 1 or not 0 <= self.name_rate <= 1:
            raise SynthError("substitution_rate and name_rate must lie in [0, 1]")
        if self.target_vocab_size < self.source_vocab_size:
            raise SynthError("target vocabulary must be at least as large as the source vocabulary")


def _words(rng: random.Random, n: int, syllables: tuple[str, ...]) -> list[str]:
    # words of two or three syllables, so subword units are shared across words
    seen: set[str] = set()
    out = []
    while len(out) < n:
        w = "".join(rng.choice(syllables) for _ in range(2))
        if w not in seen:
            seen.add(w)
            out.append(w)
    return out


@dataclass
class SynthBenchmark:
    spec: SynthSpec
    train: ParallelCorpus
    valid: ParallelCorpus
    test: ParallelCorpus
    train_terms: Terminology
    test_terms: Terminology
    lexicon: dict[str, str] = field(repr=False, default_factory=dict)

    def __iter__(self):
        return iter((self.train, self.valid, self.test, self.train_terms, self.test_terms))

    def plain_translation(self, source) -> list[str]:
        """Word-for-word rendering that ignores every dictionary; names are copied."""
        out = [self.lexicon.get(w, w) for w in source]
        return _swap(out) if self.spec.swap_adjacent else out


def _swap(units: list) -> list:
    out = list(units)
    for i in range(0, len(out) - 1, 2):
        out[i], out[i + 1] = out[i + 1], out[i]
    return out


def _flatten(units) -> list[str]:
    return [tok for unit in units for tok in (unit if isinstance(unit, tuple) else (unit,))]


def generate(spec: SynthSpec) -> SynthBenchmark:
    """Build train/valid/test corpora plus disjoint train and test terminologies."""
    n_src = spec.source_vocab_size
    min_fillers = max(n_src // 3, spec.test_dict_size * spec.max_term_len + 10)
    budget = n_src - min_fillers
    if spec.train_dict_size > budget:
        raise SynthError(f"train dictionary of {spec.train_dict_size} entries needs more than "
                         f"{n_src} source words")
    rng = random.Random(spec.seed)
    src_words = _words(rng, n_src, SOURCE_SYLLABLES)
    tgt_words = _words(rng, spec.target_vocab_size, TARGET_SYLLABLES)
    lexicon = dict(zip(src_words, tgt_words))

    # source words reserved for training-term phrases, the rest are fillers
    pool = list(src_words)
    rng.shuffle(pool)
    train_entries = []
    for i in range(spec.train_dict_size):
        spare = budget - (spec.train_dict_size - i - 1)
        k = min(rng.randint(1, spec.max_term_len), spare)
        budget -= k
        train_entries.append([pool.pop() for _ in range(k)])
    fillers = sorted(pool, key=src_words.index)

    targets = list(tgt_words)
    rng.shuffle(targets)
    train_terms = Terminology([
        TermEntry(tuple(p), tuple(targets.pop() for _ in range(rng.randint(1, spec.max_term_len))), i)
        for i, p in enumerate(train_entries)
    ])
    test_entries = []
    test_sources = rng.sample(fillers, spec.test_dict_size * spec.max_term_len)
    for i in range(spec.test_dict_size):
        k = rng.randint(1, spec.max_term_len)
        phrase = tuple(test_sources[i * spec.max_term_len: i * spec.max_term_len + k])
        own = {lexicon[w] for w in phrase}
        choices = [t for t in targets if t not in own]
        tgt = tuple(choices.pop(rng.randrange(len(choices))) for _ in range(rng.randint(1, spec.max_term_len)))
        test_entries.append(TermEntry(phrase, tgt, i))
    test_terms = Terminology(test_entries)
    test_words = {w for e in test_terms for w in e.source_tokens}
    test_fillers = [w for w in fillers if w not in test_words]

    words = set(src_words) | set(tgt_words)

    def name() -> str:
        while True:
            w = "".join(rng.choice(TARGET_SYLLABLES) for _ in range(2))
            if w not in words:
                return w

    def sentence(filler: list[str], entries: list[TermEntry], rate: float, force: bool) -> tuple[list, list]:
        n = rng.randint(spec.min_len, spec.max_len)
        chosen = []
        if entries and (force or rng.random() < rate):
            chosen.append(rng.choice(entries))
            if rng.random() < rate:
                chosen.append(rng.choice(entries))
        src_units: list = [rng.choice(filler) for _ in range(max(n - len(chosen), 1))]
        if rng.random() < spec.name_rate:
            k = rng.randrange(len(src_units))
            src_units[k:k + 1] = [name() for _ in range(rng.randint(1, 2))]
        for e in chosen:
            src_units.insert(rng.randint(0, len(src_units)), e)
        tgt_units = [e.target_tokens if isinstance(e, TermEntry) else lexicon.get(e, e) for e in src_units]
        if spec.swap_adjacent:
            tgt_units = _swap(tgt_units)
        src = _flatten(e.source_tokens if isinstance(e, TermEntry) else e for e in src_units)
        return src, _flatten(tgt_units)

    def corpus(size: int, filler, entries, rate, force) -> ParallelCorpus:
        rows = [sentence(filler, entries, rate, force) for _ in range(size)]
        return ParallelCorpus([ParallelPair(s, t, i) for i, (s, t) in enumerate(rows)], "src", "tgt")

    train = corpus(spec.train_size, fillers, train_terms.entries, spec.substitution_rate, False)
    valid = corpus(spec.valid_size, fillers, train_terms.entries, spec.substitution_rate, False)
    test = corpus(spec.test_size, test_fillers, test_terms.entries, 0.25, True)
    return SynthBenchmark(spec, train, valid, test, train_terms, test_terms, lexicon)
