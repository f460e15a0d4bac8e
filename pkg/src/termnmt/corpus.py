"""Rule-based tokenization and parallel corpus loading.

The tokenizer splits on whitespace and detaches a fixed punctuation set as
standalone tokens. Hyphenated words and words with an internal apostrophe
stay whole. ``detokenize`` glues punctuation back so that
``tokenize(detokenize(t)) == t`` for any ``t`` produced by ``tokenize``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

PUNCTUATION = frozenset('.,;:!?()"«»')
# reserved by the augmentation format; never allowed in raw corpora
TAG_TOKENS = ("<S>", "<C>", "</C>", "MASK")

_CLOSING = frozenset(".,;:!?)»")
_OPENING = frozenset("(«")
_SPLIT_RE = re.compile("([" + re.escape("".join(sorted(PUNCTUATION))) + "])")


class CorpusError(ValueError):
    """Raised for malformed corpus files."""


class LineCountMismatch(CorpusError):
    def __init__(self, source_path, target_path, source_count: int, target_count: int):
        self.source_count = source_count
        self.target_count = target_count
        super().__init__(
            f"line-count mismatch: {source_path} has {source_count} lines, "
            f"{target_path} has {target_count} lines"
        )


class EmptyLineError(CorpusError):
    def __init__(self, path, line_number: int):
        self.path = path
        self.line_number = line_number
        super().__init__(f"{path}: line {line_number} is empty")


class ReservedTokenError(CorpusError):
    pass


def tokenize(raw_line: str) -> list[str]:
    """Split a single line into tokens.

    >>> tokenize("a,b")
    ['a', ',', 'b']
    >>> tokenize("the budgetary deficit.")
    ['the', 'budgetary', 'deficit', '.']
    """
    if "\n" in raw_line:
        raise ValueError("tokenize expects a single line")
    tokens = []
    for chunk in raw_line.split():
        tokens.extend(piece for piece in _SPLIT_RE.split(chunk) if piece)
    return tokens


def detokenize(tokens: Sequence[str]) -> str:
    """Join tokens with spaces, attaching punctuation to its neighbours.

    Straight double quotes alternate between opening and closing.
    """
    out: list[str] = []
    glue_next = False
    quote_open = False
    for tok in tokens:
        if tok == '"':
            attach = quote_open
            quote_open = not quote_open
            opening = quote_open
        else:
            attach = tok in _CLOSING
            opening = tok in _OPENING
        if out and not attach and not glue_next:
            out.append(" ")
        out.append(tok)
        glue_next = opening
    return "".join(out)


@dataclass(frozen=True)
class ParallelPair:
    source: tuple[str, ...]
    target: tuple[str, ...]
    id: int

    def __post_init__(self):
        object.__setattr__(self, "source", tuple(self.source))
        object.__setattr__(self, "target", tuple(self.target))


@dataclass
class ParallelCorpus:
    pairs: list[ParallelPair] = field(default_factory=list)
    source_lang: str = "src"
    target_lang: str = "tgt"

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, i):
        return self.pairs[i]

    @classmethod
    def from_token_lists(cls, sources: Iterable[Sequence[str]], targets: Iterable[Sequence[str]],
                         source_lang: str = "src", target_lang: str = "tgt") -> "ParallelCorpus":
        pairs = [ParallelPair(s, t, i) for i, (s, t) in enumerate(zip(sources, targets, strict=True))]
        return cls(pairs, source_lang, target_lang)


def read_lines(path) -> list[str]:
    """Read a UTF-8 text file into lines; invalid bytes are an error."""
    path = Path(path)
    try:
        text = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorpusError(f"{path}: invalid UTF-8 at byte {exc.start}") from exc
    if not text:
        return []
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    return lines


def check_reserved(tokens: Sequence[str], path, line_number: int) -> None:
    for tok in tokens:
        if tok in TAG_TOKENS:
            raise ReservedTokenError(f"{path}: line {line_number} contains reserved token {tok!r}")


def load_tokenized_lines(path, allow_tags: bool = False) -> list[list[str]]:
    lines = []
    for i, line in enumerate(read_lines(path)):
        tokens = tokenize(line)
        if not tokens:
            raise EmptyLineError(path, i)
        if not allow_tags:
            check_reserved(tokens, path, i)
        lines.append(tokens)
    return lines


def load_parallel(source_path, target_path, source_lang: str = "src", target_lang: str = "tgt",
                  allow_tags: bool = False) -> ParallelCorpus:
    """Load a sentence-aligned corpus; pair ``i`` comes from line ``i`` of each file.

    ``allow_tags`` permits the reserved augmentation tokens, for reading back
    corpora this toolkit has already annotated.
    """
    src_lines = read_lines(source_path)
    tgt_lines = read_lines(target_path)
    if len(src_lines) != len(tgt_lines):
        raise LineCountMismatch(source_path, target_path, len(src_lines), len(tgt_lines))
    pairs = []
    for i, (s, t) in enumerate(zip(src_lines, tgt_lines)):
        src, tgt = tokenize(s), tokenize(t)
        if not src:
            raise EmptyLineError(source_path, i)
        if not tgt:
            raise EmptyLineError(target_path, i)
        if not allow_tags:
            check_reserved(src, source_path, i)
            check_reserved(tgt, target_path, i)
        pairs.append(ParallelPair(src, tgt, i))
    return ParallelCorpus(pairs, source_lang, target_lang)


def write_lines(path, lines: Iterable[str]) -> None:
    """Write lines atomically (temp file + rename)."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            for line in lines:
                fh.write(line)
                fh.write("\n")
        tmp.replace(path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def write_tokenized(path, token_lines: Iterable[Sequence[str]]) -> None:
    write_lines(path, (" ".join(toks) for toks in token_lines))
