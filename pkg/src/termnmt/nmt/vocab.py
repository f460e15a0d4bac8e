from __future__ import annotations

from collections import Counter
from typing import Iterable, Sequence

from ..corpus import TAG_TOKENS

PAD, BOS, EOS, UNK = "<pad>", "<s>", "</s>", "<unk>"
RESERVED = (PAD, BOS, EOS, UNK) + TAG_TOKENS
PAD_ID, BOS_ID, EOS_ID, UNK_ID = 0, 1, 2, 3


class VocabularyError(ValueError):
    pass


class Vocabulary:
    """Bijection between subword units and ids; reserved units come first."""

    def __init__(self, units: Sequence[str]):
        units = list(units)
        if tuple(units[:len(RESERVED)]) != RESERVED:
            raise VocabularyError("vocabulary must start with the reserved units")
        if len(set(units)) != len(units):
            raise VocabularyError("duplicate unit in vocabulary")
        self.unit_of = units
        self.id_of = {u: i for i, u in enumerate(units)}

    @classmethod
    def build(cls, sequences: Iterable[Sequence[str]], min_count: int = 1) -> "Vocabulary":
        counts = Counter(u for seq in sequences for u in seq)
        extra = sorted((u for u, c in counts.items() if c >= min_count and u not in RESERVED),
                       key=lambda u: (-counts[u], u))
        return cls(list(RESERVED) + extra)

    def __len__(self) -> int:
        return len(self.unit_of)

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.unit_of == other.unit_of

    def encode(self, units: Sequence[str]) -> list[int]:
        return [self.id_of.get(u, UNK_ID) for u in units]

    def decode(self, ids: Sequence[int], strip_special: bool = True) -> list[str]:
        out = []
        for i in ids:
            if strip_special and i in (PAD_ID, BOS_ID):
                continue
            if strip_special and i == EOS_ID:
                break
            out.append(self.unit_of[i])
        return out
