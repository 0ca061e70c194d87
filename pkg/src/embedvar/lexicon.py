"""Annotated evaluation lexicon.

Joins word-level annotation resources (concreteness ratings,
age-of-acquisition ratings, part-of-speech labels, semantic-domain
labels) with corpus frequencies into the single lexicon that overlap
measurements and regressions run over.  Annotation files are delimited
text with a header row; the caller names the word and value columns, so
no third-party file layout is hard-coded here.

All annotation words are lowercased before joining, matching corpus
tokenization.  The join is an inner join on the concreteness, POS, and
domain sources; age-of-acquisition is optional per word and frequency
falls back to zero occurrences per million.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass

from .corpus import FrequencyTable
from .errors import DataError, JoinError, ParseError, SchemaError

POS_CATEGORIES = (
    "Adjective",
    "Adverb",
    "Function",
    "Name",
    "Noun",
    "Verb",
    "Other",
)

CONCRETENESS_BINS = ("[1,2)", "[2,3)", "[3,4)", "[4,5]")

# Labels that collapse into the closed-class "Function" category.
_FUNCTION_LABELS = {
    "function",
    "article",
    "conjunction",
    "preposition",
    "pronoun",
    "determiner",
}

_MISSING_VALUES = {"", "na", "nan", "none"}


def concreteness_bin(value: float) -> str:
    """Bin label for a concreteness rating; 5.0 falls in the top bin."""
    if not 1.0 <= value <= 5.0:
        raise DataError(f"concreteness {value} outside [1,5]")
    if value >= 4.0:
        return "[4,5]"
    return CONCRETENESS_BINS[int(value) - 1]


def normalize_pos(label: str) -> str:
    """Map a raw part-of-speech label onto the seven-way inventory.

    Canonical labels pass through case-insensitively, classic
    closed-class tags (article, pronoun, and so on) collapse into
    Function, and anything unrecognized becomes Other.
    """
    folded = label.strip().lower()
    if folded in _FUNCTION_LABELS:
        return "Function"
    for canon in POS_CATEGORIES:
        if folded == canon.lower():
            return canon
    return "Other"


@dataclass(frozen=True)
class LexiconEntry:
    word: str
    concreteness: float
    aoa: float | None
    pos: str
    domain: str
    per_million: float
    concreteness_bin: str

    def __post_init__(self) -> None:
        if not 1.0 <= self.concreteness <= 5.0:
            raise DataError(
                f"word {self.word!r}: concreteness {self.concreteness} outside [1,5]"
            )
        if self.aoa is not None and not self.aoa > 0:
            raise DataError(f"word {self.word!r}: aoa {self.aoa} must be positive")
        if self.per_million < 0:
            raise DataError(f"word {self.word!r}: negative frequency")
        if self.concreteness_bin != concreteness_bin(self.concreteness):
            raise DataError(
                f"word {self.word!r}: bin {self.concreteness_bin} does not "
                f"match concreteness {self.concreteness}"
            )


@dataclass(frozen=True)
class AnnotatedLexicon:
    """Joined lexicon with per-category counts.

    Entries are sorted by word, so lexica built from permuted input
    files compare equal.  The three count maps each partition the
    entries.
    """

    entries: tuple[LexiconEntry, ...]
    counts_by_domain: dict[str, int]
    counts_by_pos: dict[str, int]
    counts_by_bin: dict[str, int]

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(entry.word for entry in self.entries)

    def entry(self, word: str) -> LexiconEntry | None:
        index = getattr(self, "_index", None)
        if index is None:
            index = {e.word: e for e in self.entries}
            object.__setattr__(self, "_index", index)
        return index.get(word)


def _delimiter_for(path, delimiter: str | None) -> str:
    if delimiter is not None:
        return delimiter
    return "," if str(path).lower().endswith(".csv") else "\t"


def _read_annotation(path, word_column, value_column, delimiter):
    """Yield (row_number, word, raw_value) from a delimited file.

    Raises SchemaError when the header lacks a named column and
    ParseError when a data row is too short.
    """
    sep = _delimiter_for(path, delimiter)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter=sep)
        header = next(reader, None)
        if header is None:
            return
        header = [h.strip() for h in header]
        missing = [c for c in (word_column, value_column) if c not in header]
        if missing:
            raise SchemaError(
                f"{path}: header {header} lacks column(s) {', '.join(missing)}"
            )
        w_at = header.index(word_column)
        v_at = header.index(value_column)
        width = max(w_at, v_at)
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) <= width:
                raise ParseError(path, row_no, f"row has only {len(row)} fields")
            yield row_no, row[w_at].strip().lower(), row[v_at].strip()


def load_ratings(
    path, word_column: str, value_column: str, delimiter: str | None = None
) -> tuple[dict[str, float], int]:
    """Load a word -> rating map from a delimited annotation file.

    Returns the map and the number of duplicate words encountered
    (last occurrence wins).  Rows whose value field is empty or a
    conventional missing marker (NA, NaN, none) are skipped; any other
    non-numeric value raises ParseError with its row number.
    """
    ratings: dict[str, float] = {}
    duplicates = 0
    for row_no, word, raw in _read_annotation(path, word_column, value_column, delimiter):
        if raw.lower() in _MISSING_VALUES:
            continue
        try:
            value = float(raw)
        except ValueError:
            raise ParseError(path, row_no, f"non-numeric value {raw!r}") from None
        if word in ratings:
            duplicates += 1
        ratings[word] = value
    return ratings, duplicates


def load_labels(
    path, word_column: str, value_column: str, delimiter: str | None = None
) -> tuple[dict[str, str], int]:
    """Load a word -> categorical label map; same conventions as
    :func:`load_ratings` but values stay strings."""
    labels: dict[str, str] = {}
    duplicates = 0
    for _, word, raw in _read_annotation(path, word_column, value_column, delimiter):
        if raw.lower() in _MISSING_VALUES:
            continue
        if word in labels:
            duplicates += 1
        labels[word] = raw
    return labels, duplicates


def join(
    concreteness: dict[str, float],
    aoa: dict[str, float],
    pos: dict[str, str],
    domains: dict[str, str],
    frequency: FrequencyTable | None = None,
) -> AnnotatedLexicon:
    """Inner-join annotation sources into an AnnotatedLexicon.

    A word enters the lexicon only if the concreteness, POS, and domain
    sources all cover it.  Age-of-acquisition is optional (missing
    entries carry None) and per_million defaults to 0 for words absent
    from ``frequency``.  POS labels are normalized onto the seven-way
    inventory; domains are kept verbatim.

    Raises JoinError when a required source is empty or the
    intersection is, and DataError when a rating is out of range.
    """
    for name, source in (("concreteness", concreteness), ("pos", pos), ("domain", domains)):
        if not source:
            raise JoinError(f"{name} source is empty")
    concreteness = {w.lower(): v for w, v in concreteness.items()}
    aoa = {w.lower(): v for w, v in aoa.items()}
    pos = {w.lower(): v for w, v in pos.items()}
    domains = {w.lower(): v for w, v in domains.items()}
    shared = sorted(set(concreteness) & set(pos) & set(domains))
    if not shared:
        raise JoinError("no word is covered by all of concreteness, pos, and domain")

    entries = []
    for word in shared:
        conc = concreteness[word]
        entries.append(
            LexiconEntry(
                word=word,
                concreteness=conc,
                aoa=aoa.get(word),
                pos=normalize_pos(pos[word]),
                domain=domains[word].strip(),
                per_million=frequency.per_million(word) if frequency else 0.0,
                concreteness_bin=concreteness_bin(conc),
            )
        )
    return AnnotatedLexicon(
        entries=tuple(entries),
        counts_by_domain=dict(Counter(e.domain for e in entries)),
        counts_by_pos=dict(Counter(e.pos for e in entries)),
        counts_by_bin=dict(Counter(e.concreteness_bin for e in entries)),
    )


@dataclass(frozen=True)
class DomainSummary:
    domain: str
    count: int
    mean_concreteness: float
    mean_aoa: float | None


def summarize(lexicon: AnnotatedLexicon) -> list[DomainSummary]:
    """Per-domain count and mean ratings, sorted by domain name.

    Words without an AoA rating are ignored in the AoA mean; a domain
    where every word lacks AoA reports None.
    """
    if not lexicon.entries:
        raise DataError("cannot summarize an empty lexicon")
    by_domain: dict[str, list[LexiconEntry]] = {}
    for entry in lexicon.entries:
        by_domain.setdefault(entry.domain, []).append(entry)
    rows = []
    for domain in sorted(by_domain):
        members = by_domain[domain]
        conc = sum(e.concreteness for e in members) / len(members)
        rated = [e.aoa for e in members if e.aoa is not None]
        rows.append(
            DomainSummary(
                domain=domain,
                count=len(members),
                mean_concreteness=conc,
                mean_aoa=sum(rated) / len(rated) if rated else None,
            )
        )
    return rows


def write_lexicon_tsv(lexicon: AnnotatedLexicon, path) -> None:
    """Export the joined lexicon as TSV; missing AoA becomes NA."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("word\tconc\taoa\tpos\tdomain\tper_million\tbin\n")
        for e in lexicon.entries:
            aoa = f"{e.aoa:.3f}" if e.aoa is not None else "NA"
            fh.write(
                f"{e.word}\t{e.concreteness:.3f}\t{aoa}\t{e.pos}\t"
                f"{e.domain}\t{e.per_million:.6f}\t{e.concreteness_bin}\n"
            )
