"""Synthetic two-dialect corpora for end-to-end verification.

Real condition-vs-condition experiments need corpora far larger than a
test suite can carry, so this module fabricates a pair of corpora whose
degree of lexical divergence is known by construction.  Both corpora
come from the same class-based generator: every vocabulary word belongs
to one of a small number of collocate classes, each line is a run drawn
from a single class, and a sticky walk over classes decides which class
supplies the next line.  Per-word token counts follow a fixed Zipf
shape and are identical on both sides by construction.  In the second
corpus a chosen fraction of the vocabulary is reassigned to a different
class, which changes those words' co-occurrence profile (and so their
embedding neighborhoods) while leaving the rest of the language model
untouched.

The deterministic marginals matter for null calibration.  Word
frequencies drive vocabulary order, vector initialization, negative
tables, and subsampling, so if the two sides sampled their counts
independently, a divergence-0 pair would still differ systematically in
all of those and a paired comparison would flag pure sampling noise as
signal.  Holding counts fixed, and confining co-occurrence to one class
per line, leaves arrangement noise as the only difference between the
sides, which is the same kind of noise that re-shuffling produces
within a side.

Generation is vectorized and fully determined by the seed.  The helper
functions also write annotation files and a ready-to-run experiment
config so a complete fixture can be produced in one call.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .corpus import Corpus
from .errors import ConfigError
from .lexicon import POS_CATEGORIES

_CONSONANTS = "bcdfghjklmnprstvz"
_VOWELS = "aeiou"
_SYLLABLES = [c + v for c in _CONSONANTS for v in _VOWELS]

_LINE_MIN = 10
_LINE_MAX = 20
_ZIPF_EXPONENT = 0.8

# Internal seed for annotation values; annotations describe the fixed
# vocabulary, not a particular corpus sample, so they never vary.
_ANNOTATION_SEED = 271_828


def synthetic_vocabulary(size: int) -> list[str]:
    """Deterministic pronounceable word list, unique by construction."""
    limit = len(_SYLLABLES) ** 2
    if not 1 <= size <= limit:
        raise ConfigError(f"vocabulary size must be in [1, {limit}]")
    words = []
    for i in range(size):
        word = _SYLLABLES[i // len(_SYLLABLES)] + _SYLLABLES[i % len(_SYLLABLES)]
        if i % 7 < 2:
            word += _VOWELS[i % len(_VOWELS)]
        words.append(word)
    return words


def _zipf_counts(total_tokens: int, size: int) -> np.ndarray:
    """Exact per-word token counts with a Zipf-shaped profile.

    Largest-remainder rounding keeps the total equal to
    ``total_tokens`` while staying as close as possible to the real
    valued shares, so every corpus built from the same budget and
    vocabulary carries identical word frequencies.
    """
    ranks = np.arange(1, size + 1, dtype=np.float64)
    share = ranks ** -_ZIPF_EXPONENT
    share = share / share.sum() * total_tokens
    counts = np.floor(share).astype(np.int64)
    shortfall = int(total_tokens - counts.sum())
    if shortfall:
        order = np.argsort(-(share - counts), kind="stable")
        counts[order[:shortfall]] += 1
    return counts


def _chop_runs(token_ids: np.ndarray, rng: np.random.Generator) -> list[np.ndarray]:
    """Split one class's tokens into lines of _LINE_MIN.._LINE_MAX each.

    A naive chop can strand a tail shorter than _LINE_MIN, so the cut
    before the tail either absorbs it or splits the remainder evenly.
    Only a class with fewer than _LINE_MIN tokens total yields a short
    line.
    """
    lines: list[np.ndarray] = []
    at = 0
    n = len(token_ids)
    while n - at >= _LINE_MIN:
        take = int(rng.integers(_LINE_MIN, _LINE_MAX + 1))
        left = n - at - take
        if 0 < left < _LINE_MIN:
            whole = n - at
            take = whole if whole <= _LINE_MAX else whole // 2
        lines.append(token_ids[at : at + take])
        at += take
    if at < n:
        lines.append(token_ids[at:])
    return lines


def _arrange_corpus(
    counts: np.ndarray,
    vocab: np.ndarray,
    class_of: np.ndarray,
    n_classes: int,
    switch_prob: float,
    rng: np.random.Generator,
    label: str,
) -> Corpus:
    """Lay out fixed per-word counts as single-class lines.

    Each class's token multiset is shuffled and chopped into lines, so
    co-occurrence never crosses a class boundary.  A sticky walk over
    classes then decides which class supplies the next block of lines;
    ``switch_prob`` is the per-line probability of leaving the current
    class.
    """
    per_class: list[list[np.ndarray]] = []
    for c in range(n_classes):
        ids = np.flatnonzero(class_of == c)
        toks = np.repeat(ids, counts[ids])
        rng.shuffle(toks)
        per_class.append(_chop_runs(toks, rng) if len(toks) else [])

    remaining = np.array([len(ls) for ls in per_class], dtype=np.int64)
    cursor = [0] * n_classes
    ordered: list[np.ndarray] = []
    while remaining.sum() > 0:
        cum = np.cumsum(remaining)
        pick = int(np.searchsorted(cum, rng.integers(0, cum[-1]), side="right"))
        run = min(int(remaining[pick]), int(rng.geometric(switch_prob)))
        ordered.extend(per_class[pick][cursor[pick] : cursor[pick] + run])
        cursor[pick] += run
        remaining[pick] -= run

    lines = tuple(tuple(vocab[ids].tolist()) for ids in ordered)
    return Corpus(lines=lines, label=label, token_count=int(counts.sum()))


def generate_synthetic_dialects(
    base_vocab_size: int,
    tokens: int,
    divergence_rate: float,
    seed: int,
    collocate_classes: int = 40,
    switch_prob: float = 0.1,
    labels: tuple[str, str] = ("dialect-a", "dialect-b"),
) -> tuple[Corpus, Corpus]:
    """Two corpora from one generator, diverging in a controlled fraction.

    ``divergence_rate`` of the vocabulary is moved to a different
    collocate class in the second corpus; 0 yields two arrangements of
    identical per-word counts, 1 relocates every word.  Word strings,
    base class assignments, and per-word counts are functions of the
    vocabulary and budget alone, so the same ``seed`` always reproduces
    the same pair of corpora, and both sides always share exact word
    frequencies.
    """
    if not 0.0 <= divergence_rate <= 1.0:
        raise ConfigError(f"divergence_rate {divergence_rate} outside [0,1]")
    if tokens < 10_000:
        raise ConfigError(f"need at least 10,000 tokens, got {tokens}")
    if collocate_classes < 2:
        raise ConfigError("need at least 2 collocate classes")
    if base_vocab_size < 2 * collocate_classes:
        raise ConfigError(
            f"vocabulary of {base_vocab_size} too small for "
            f"{collocate_classes} classes"
        )
    if not 0.0 < switch_prob <= 1.0:
        raise ConfigError(f"switch_prob {switch_prob} outside (0,1]")

    vocab = np.array(synthetic_vocabulary(base_vocab_size))
    counts = _zipf_counts(tokens, base_vocab_size)
    class_a = np.arange(base_vocab_size, dtype=np.int64) % collocate_classes

    rng = np.random.default_rng(seed)
    n_divergent = int(round(divergence_rate * base_vocab_size))
    class_b = class_a.copy()
    if n_divergent:
        moved = rng.choice(base_vocab_size, size=n_divergent, replace=False)
        shift = rng.integers(1, collocate_classes, size=n_divergent)
        class_b[moved] = (class_a[moved] + shift) % collocate_classes

    corpus_a = _arrange_corpus(
        counts, vocab, class_a, collocate_classes, switch_prob, rng, labels[0]
    )
    corpus_b = _arrange_corpus(
        counts, vocab, class_b, collocate_classes, switch_prob, rng, labels[1]
    )
    return corpus_a, corpus_b


def write_corpus_text(corpus: Corpus, path) -> None:
    """One line of space-joined tokens per corpus line."""
    with open(path, "w", encoding="utf-8") as fh:
        for line in corpus.lines:
            fh.write(" ".join(line) + "\n")


def write_synthetic_annotations(
    base_vocab_size: int,
    lexicon_size: int,
    directory,
    collocate_classes: int = 40,
) -> dict[str, Path]:
    """Annotation files for a slice of the synthetic vocabulary.

    Picks ``lexicon_size`` words spread over the most frequent 60% of
    the vocabulary and writes four TSVs (concreteness, age of
    acquisition, part of speech, semantic domain).  Ratings are
    arbitrary but deterministic; the domain equals the word's base
    collocate class, so domain structure in the annotations mirrors
    co-occurrence structure in the first corpus.  Roughly one word in
    seventeen is left without an AoA rating to exercise the optional
    join path.  Returns the file paths keyed by annotation name.
    """
    top = int(0.6 * base_vocab_size)
    if not 1 <= lexicon_size <= top:
        raise ConfigError(
            f"lexicon_size must be in [1, {top}] for a vocabulary of "
            f"{base_vocab_size}"
        )
    vocab = synthetic_vocabulary(base_vocab_size)
    picked = np.unique(
        np.linspace(0, top - 1, lexicon_size).round().astype(np.int64)
    )
    rng = np.random.default_rng(_ANNOTATION_SEED)
    conc = rng.uniform(1.0, 5.0, size=len(picked)).round(2)
    aoa = rng.uniform(2.0, 18.0, size=len(picked)).round(2)

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "concreteness": directory / "concreteness.tsv",
        "aoa": directory / "aoa.tsv",
        "pos": directory / "pos.tsv",
        "domains": directory / "domains.tsv",
    }
    with open(paths["concreteness"], "w", encoding="utf-8") as fh:
        fh.write("word\tvalue\n")
        for j, i in enumerate(picked):
            fh.write(f"{vocab[i]}\t{conc[j]}\n")
    with open(paths["aoa"], "w", encoding="utf-8") as fh:
        fh.write("word\tvalue\n")
        for j, i in enumerate(picked):
            if j % 17 == 16:
                continue
            fh.write(f"{vocab[i]}\t{aoa[j]}\n")
    with open(paths["pos"], "w", encoding="utf-8") as fh:
        fh.write("word\tlabel\n")
        for j, i in enumerate(picked):
            fh.write(f"{vocab[i]}\t{POS_CATEGORIES[j % len(POS_CATEGORIES)]}\n")
    with open(paths["domains"], "w", encoding="utf-8") as fh:
        fh.write("word\tlabel\n")
        for i in picked:
            fh.write(f"{vocab[i]}\tclass-{i % collocate_classes:02d}\n")
    return paths


SCALED_TRAIN_DEFAULTS = {
    "dim": 32,
    "negatives": 5,
    "epochs": 3,
    "learning_rate": 0.05,
    "ngram_min": 3,
    "ngram_max": 6,
    "bucket_count": 30_000,
    "window": 5,
    "min_count": 5,
    "seed": 7,
    "subsample_threshold": 1e-4,
    "deterministic": True,
}


def emit_synthetic_experiment(
    output_dir,
    base_vocab_size: int = 2000,
    tokens: int = 1_000_000,
    divergence_rate: float = 0.2,
    seed: int = 97,
    lexicon_size: int = 300,
    runs_per_condition: int = 5,
    k_values=(5, 10, 25, 50),
    master_seed: int | None = None,
    collocate_classes: int = 40,
    train_overrides: dict | None = None,
) -> Path:
    """Write a complete, runnable synthetic experiment fixture.

    Produces two corpus text files, the annotation TSVs, and a
    config.json wired to them (training scaled down for desk-size
    hardware).  Returns the config path, ready for the experiment
    runner.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus_a, corpus_b = generate_synthetic_dialects(
        base_vocab_size,
        tokens,
        divergence_rate,
        seed,
        collocate_classes=collocate_classes,
    )
    write_corpus_text(corpus_a, out / "corpus_a.txt")
    write_corpus_text(corpus_b, out / "corpus_b.txt")
    write_synthetic_annotations(
        base_vocab_size, lexicon_size, out, collocate_classes=collocate_classes
    )
    train = dict(SCALED_TRAIN_DEFAULTS)
    if train_overrides:
        train.update(train_overrides)
    config = {
        "conditions": [
            {"label": corpus_a.label, "corpus": "corpus_a.txt"},
            {"label": corpus_b.label, "corpus": "corpus_b.txt"},
        ],
        "runs_per_condition": runs_per_condition,
        "train": train,
        "k_values": list(k_values),
        "lexicon": {
            "concreteness": {
                "path": "concreteness.tsv",
                "word_column": "word",
                "value_column": "value",
            },
            "aoa": {"path": "aoa.tsv", "word_column": "word", "value_column": "value"},
            "pos": {"path": "pos.tsv", "word_column": "word", "value_column": "label"},
            "domains": {
                "path": "domains.tsv",
                "word_column": "word",
                "value_column": "label",
            },
        },
        "output": "results",
        "master_seed": master_seed if master_seed is not None else seed * 1000 + 1,
        "histogram_bins": 50,
        "threads": 1,
    }
    config_path = out / "config.json"
    with open(config_path, "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2)
        fh.write("\n")
    return config_path
