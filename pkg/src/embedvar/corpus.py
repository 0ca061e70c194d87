"""Corpus ingestion, deterministic tokenization, seeded shuffling, counts.

A corpus is an ordered sequence of tokenized lines plus a condition label.
All operations here are pure: a Corpus never changes after construction,
and shuffles are driven entirely by an explicit seed.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataError, EncodingError
from .rng import fisher_yates

__all__ = [
    "Corpus",
    "FrequencyTable",
    "load_corpus",
    "tokenize",
    "shuffle",
    "count_frequencies",
    "concatenate",
]


@dataclass(frozen=True)
class Corpus:
    """Ordered tokenized lines with provenance metadata.

    token_count always equals the sum of line lengths; a shuffled corpus
    carries the seed that produced its line order.
    """

    lines: tuple[tuple[str, ...], ...]
    label: str
    token_count: int
    shuffle_seed: int | None = None

    def __post_init__(self):
        total = sum(len(line) for line in self.lines)
        if total != self.token_count:
            raise DataError(
                f"token_count {self.token_count} != sum of line lengths {total}"
            )

    @classmethod
    def from_lines(cls, lines, label: str, shuffle_seed: int | None = None) -> "Corpus":
        frozen = tuple(tuple(line) for line in lines)
        total = sum(len(line) for line in frozen)
        return cls(lines=frozen, label=label, token_count=total, shuffle_seed=shuffle_seed)


@dataclass(frozen=True)
class FrequencyTable:
    """Word counts plus rate per 1,000,000 tokens, for one corpus."""

    entries: dict[str, tuple[int, float]]
    token_count: int

    def count(self, word: str) -> int:
        return self.entries.get(word, (0, 0.0))[0]

    def per_million(self, word: str) -> float:
        return self.entries.get(word, (0, 0.0))[1]

    def write_tsv(self, path) -> None:
        """Export as `word<TAB>count<TAB>per_million`, most frequent first."""
        items = sorted(self.entries.items(), key=lambda kv: (-kv[1][0], kv[0]))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("word\tcount\tper_million\n")
            for word, (count, pm) in items:
                fh.write(f"{word}\t{count}\t{pm:.6f}\n")


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(line: str) -> list[str]:
    """Lowercase, split on Unicode whitespace, strip edge punctuation.

    Punctuation (Unicode category P*) is removed from both ends of each
    token; interior punctuation such as the apostrophe in "don't" stays.
    Tokens that become empty are dropped. Total function, never raises.
    """
    tokens = []
    for raw in line.lower().split():
        start, end = 0, len(raw)
        while start < end and _is_punct(raw[start]):
            start += 1
        while end > start and _is_punct(raw[end - 1]):
            end -= 1
        if end > start:
            tokens.append(raw[start:end])
    return tokens


def load_corpus(path, label: str) -> Corpus:
    """Read a UTF-8 text file, one sentence or document per line.

    Lines are tokenized with tokenize(); lines with no surviving tokens are
    dropped. Disk order is preserved. Invalid UTF-8 raises EncodingError
    with the offending line number; unreadable paths raise OSError.
    """
    path = Path(path)
    lines: list[tuple[str, ...]] = []
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, start=1):
            try:
                text = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise EncodingError(str(path), lineno) from exc
            tokens = tokenize(text)
            if tokens:
                lines.append(tuple(tokens))
    return Corpus.from_lines(lines, label)


def shuffle(corpus: Corpus, seed: int) -> Corpus:
    """Deterministic line-level permutation of a corpus.

    The permutation is produced by SplitMix64-driven Fisher-Yates (see
    embedvar.rng for the exact algorithm identity) and depends only on the
    seed and the number of lines. The multiset of lines is preserved.
    """
    if not corpus.lines:
        raise DataError("cannot shuffle an empty corpus")
    perm = fisher_yates(len(corpus.lines), seed)
    lines = tuple(corpus.lines[i] for i in perm)
    return Corpus(
        lines=lines,
        label=corpus.label,
        token_count=corpus.token_count,
        shuffle_seed=seed,
    )


def count_frequencies(corpus: Corpus) -> FrequencyTable:
    """Exact word counts and occurrences per million tokens.

    Rates are relative to this corpus's own token count; to get rates over
    several conditions, concatenate() them first.
    """
    if corpus.token_count == 0:
        raise DataError("cannot count frequencies of an empty corpus")
    counts: Counter[str] = Counter()
    for line in corpus.lines:
        counts.update(line)
    scale = 1_000_000 / corpus.token_count
    entries = {w: (c, c * scale) for w, c in counts.items()}
    return FrequencyTable(entries=entries, token_count=corpus.token_count)


def concatenate(corpora, label: str) -> Corpus:
    """Join several corpora into one, preserving each corpus's line order."""
    corpora = list(corpora)
    if not corpora:
        raise DataError("nothing to concatenate")
    lines = tuple(line for c in corpora for line in c.lines)
    total = sum(c.token_count for c in corpora)
    return Corpus(lines=lines, label=label, token_count=total)
