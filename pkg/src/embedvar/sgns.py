"""Subword skip-gram embeddings with negative sampling.

Words are represented as the mean of a per-word input row and hashed
character-n-gram bucket rows, so related surface forms share parameters.
Training is a single-hidden-layer binary classifier: for each
(center, context) pair drawn from a sliding window, the context word is
scored against a handful of negatives sampled from the smoothed unigram
distribution, and both input and output matrices are updated by SGD with
a linearly decaying learning rate.

Two properties matter more here than raw throughput.  First, training is
reproducible: with ``deterministic=True`` and one thread, the same corpus,
config, and seed give bit-identical matrices, which is what makes
shuffle-retrain comparisons meaningful.  Second, the gradient applied to
each subword row is the true gradient of the pair loss (the hidden-vector
gradient divided by the number of contributing rows), so the update can be
checked against finite differences of :func:`pair_loss`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from . import _kernels
from .corpus import Corpus, count_frequencies
from .errors import (
    ConfigError,
    DataError,
    EmptyVocabError,
    ParseError,
    TrainingDivergenceError,
)
from .rng import SplitMix64

NEGATIVE_TABLE_SIZE = 5_000_000

FNV_OFFSET_BASIS = 0x811C9DC5
FNV_PRIME = 0x01000193

_INIT_STREAM = 0x1000
_TRAIN_STREAM = 0x2000


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for one training run.

    Defaults follow common practice for subword skip-gram models on
    mid-sized corpora; tests and pipelines override them freely.
    ``seed`` fixes both matrix initialization and the training-time
    sampling stream.  ``deterministic=True`` restricts training to a
    single thread so runs are bit-reproducible; setting it to ``False``
    permits lock-free multithreaded updates that race benignly but
    forfeit exact reproducibility.
    """

    dim: int = 100
    negatives: int = 50
    epochs: int = 20
    learning_rate: float = 0.05
    ngram_min: int = 3
    ngram_max: int = 6
    bucket_count: int = 2_000_000
    window: int = 5
    min_count: int = 5
    seed: int = 1
    subsample_threshold: float = 1e-4
    deterministic: bool = True

    def __post_init__(self) -> None:
        problems = []
        if self.dim < 1:
            problems.append("dim must be >= 1")
        if self.negatives < 0:
            problems.append("negatives must be >= 0")
        if self.epochs < 1:
            problems.append("epochs must be >= 1")
        if not self.learning_rate > 0:
            problems.append("learning_rate must be > 0")
        if self.ngram_min < 1:
            problems.append("ngram_min must be >= 1")
        if self.ngram_max < self.ngram_min:
            problems.append("ngram_max must be >= ngram_min")
        if self.bucket_count < 1:
            problems.append("bucket_count must be >= 1")
        if self.window < 1:
            problems.append("window must be >= 1")
        if self.min_count < 1:
            problems.append("min_count must be >= 1")
        if self.seed < 0:
            problems.append("seed must be >= 0")
        if math.isnan(self.subsample_threshold):
            problems.append("subsample_threshold must not be NaN")
        if problems:
            raise ConfigError("; ".join(problems))

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown training options: {', '.join(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class Vocab:
    """Retained words with their counts and negative-sampling weights.

    Word ids are positions in ``words``, which is ordered by descending
    count with ties broken alphabetically, so ids are stable across runs
    on the same corpus.  ``sampling_probs[i]`` is proportional to
    ``counts[i] ** 0.75`` and the array sums to one.
    """

    words: tuple[str, ...]
    counts: tuple[int, ...]
    word_index: dict[str, int]
    sampling_probs: np.ndarray
    corpus_tokens: int

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.word_index


def build_vocab(corpus: Corpus, config: TrainConfig) -> Vocab:
    """Count words in ``corpus`` and retain those seen >= min_count times.

    Raises EmptyVocabError when nothing survives the threshold.
    """
    table = count_frequencies(corpus)
    retained = [
        (word, count)
        for word, (count, _) in table.entries.items()
        if count >= config.min_count
    ]
    if not retained:
        raise EmptyVocabError(
            f"no word in {corpus.label!r} reaches min_count={config.min_count}"
        )
    retained.sort(key=lambda pair: (-pair[1], pair[0]))
    words = tuple(word for word, _ in retained)
    counts = tuple(count for _, count in retained)
    probs = np.array(counts, dtype=np.float64) ** 0.75
    probs /= probs.sum()
    return Vocab(
        words=words,
        counts=counts,
        word_index={word: i for i, word in enumerate(words)},
        sampling_probs=probs,
        corpus_tokens=corpus.token_count,
    )


def char_ngrams(word: str, ngram_min: int, ngram_max: int) -> list[str]:
    """Character n-grams of '<word>', shortest first, plus the whole form.

    The word is wrapped in angle-bracket boundary markers before
    extraction.  Within each length, n-grams appear left to right, and
    the full wrapped form is appended at the end unless some n-gram
    already equals it.  Duplicates from repeated substrings are kept.
    """
    if not word:
        raise DataError("cannot extract n-grams from an empty word")
    if ngram_min < 1 or ngram_max < ngram_min:
        raise ConfigError(f"bad n-gram range [{ngram_min}, {ngram_max}]")
    wrapped = f"<{word}>"
    width = len(wrapped)
    grams = []
    for n in range(ngram_min, min(ngram_max, width) + 1):
        for start in range(width - n + 1):
            grams.append(wrapped[start : start + n])
    if wrapped not in grams:
        grams.append(wrapped)
    return grams


def hash_ngram(ngram: str, bucket_count: int) -> int:
    """Map an n-gram to a bucket id with the 32-bit FNV-1a hash.

    The hash runs over the UTF-8 bytes of ``ngram`` (offset basis
    2166136261, prime 16777619, wrapping at 32 bits) and the result is
    reduced modulo ``bucket_count``.
    """
    if not ngram:
        raise DataError("cannot hash an empty n-gram")
    if bucket_count < 1:
        raise ConfigError("bucket_count must be >= 1")
    value = FNV_OFFSET_BASIS
    for byte in ngram.encode("utf-8"):
        value ^= byte
        value = (value * FNV_PRIME) & 0xFFFFFFFF
    return value % bucket_count


def _derive_seed(seed: int, stream: int) -> int:
    """Decorrelate RNG streams that share one user-facing seed."""
    return SplitMix64(seed + stream).next_u64()


@dataclass(frozen=True)
class EmbeddingSpace:
    """A trained embedding space.

    ``input_vectors`` holds one row per vocab word followed by one row
    per n-gram bucket; ``output_vectors`` holds the context
    representations used only during training.  Both are float32 and
    marked read-only.  ``epoch_losses`` records the mean per-pair loss
    of each epoch, mostly as a sanity signal that training moved.
    """

    vocab: Vocab
    config: TrainConfig
    input_vectors: np.ndarray
    output_vectors: np.ndarray
    epoch_losses: tuple[float, ...]

    @property
    def words(self) -> tuple[str, ...]:
        return self.vocab.words

    @property
    def dim(self) -> int:
        return self.config.dim

    def vector(self, word: str) -> np.ndarray:
        return word_vector(self, word)


def _subword_rows(vocab_size: int, config: TrainConfig, word: str) -> list[int]:
    """Input-matrix row ids composing ``word``: its own row, then buckets."""
    rows = [hash_ngram(g, config.bucket_count) + vocab_size
            for g in char_ngrams(word, config.ngram_min, config.ngram_max)]
    return rows


def _build_subword_table(vocab: Vocab, config: TrainConfig):
    """Flattened per-word row lists for the training kernel.

    Returns (row_ids, offsets) where word w owns
    row_ids[offsets[w]:offsets[w+1]], always starting with w itself.
    """
    size = len(vocab)
    offsets = np.zeros(size + 1, dtype=np.int64)
    chunks = []
    for w, word in enumerate(vocab.words):
        rows = [w]
        rows.extend(_subword_rows(size, config, word))
        chunks.append(np.array(rows, dtype=np.int64))
        offsets[w + 1] = offsets[w] + len(rows)
    return np.concatenate(chunks), offsets


def _encode_corpus(corpus: Corpus, vocab: Vocab):
    """Corpus lines as flat in-vocab token ids plus line offsets."""
    index = vocab.word_index
    ids = []
    offsets = [0]
    for line in corpus.lines:
        for tok in line:
            w = index.get(tok)
            if w is not None:
                ids.append(w)
        offsets.append(len(ids))
    tokens = np.array(ids, dtype=np.int32)
    line_offsets = np.array(offsets, dtype=np.int64)
    lengths = np.diff(line_offsets)
    max_len = int(lengths.max()) if len(lengths) else 0
    return tokens, line_offsets, max_len


def _keep_probabilities(vocab: Vocab, config: TrainConfig) -> np.ndarray:
    """Per-word subsampling keep probabilities.

    A word with corpus frequency f (count over all corpus tokens) is
    kept with probability min(1, sqrt(t/f) + t/f) where t is the
    threshold; t <= 0 disables subsampling entirely.
    """
    size = len(vocab)
    t = config.subsample_threshold
    if t <= 0:
        return np.ones(size, dtype=np.float64)
    counts = np.array(vocab.counts, dtype=np.float64)
    freqs = counts / float(vocab.corpus_tokens)
    keep = np.sqrt(t / freqs) + t / freqs
    return np.minimum(keep, 1.0)


def train(corpus: Corpus, config: TrainConfig, threads: int = 1) -> EmbeddingSpace:
    """Train an embedding space on ``corpus``.

    The input matrix is initialized uniformly in (-1/dim, 1/dim) from
    ``config.seed`` and the output matrix starts at zero, so two runs
    differ only through the order in which lines feed the optimizer.
    The learning rate decays linearly from ``config.learning_rate``
    toward zero over ``epochs`` passes, re-evaluated at every line.

    With ``threads > 1`` (requires ``deterministic=False``) the corpus
    is split into contiguous line chunks trained concurrently on shared
    matrices without locks; updates may race, which perturbs results
    slightly between runs.

    Raises TrainingDivergenceError if any pair produces a non-finite
    score, reporting the global pair index at which training failed.
    """
    if threads < 1:
        raise ConfigError("threads must be >= 1")
    if threads > 1 and config.deterministic:
        raise ConfigError(
            "deterministic training is single-threaded; "
            "set deterministic=False to use multiple threads"
        )
    vocab = build_vocab(corpus, config)
    tokens, line_offsets, max_line_len = _encode_corpus(corpus, vocab)
    sub_idx, sub_off = _build_subword_table(vocab, config)
    keep_prob = _keep_probabilities(vocab, config)
    neg_table = _kernels.build_negative_table(
        vocab.sampling_probs, NEGATIVE_TABLE_SIZE
    )

    size = len(vocab)
    in_mat = np.empty((size + config.bucket_count, config.dim), dtype=np.float32)
    _kernels.fill_uniform(
        in_mat, 1.0 / config.dim, np.uint64(_derive_seed(config.seed, _INIT_STREAM))
    )
    out_mat = np.zeros((size, config.dim), dtype=np.float32)

    n_lines = len(corpus.lines)
    total_tokens = float(config.epochs) * max(len(tokens), 1)
    progress = np.zeros(1, dtype=np.int64)
    epoch_losses = []
    pairs_done = 0

    if threads == 1:
        state = np.array(
            [_derive_seed(config.seed, _TRAIN_STREAM)], dtype=np.uint64
        )
        for _ in range(config.epochs):
            loss_sum, pair_count, bad = _kernels.train_chunk(
                tokens, line_offsets, 0, n_lines, in_mat, out_mat,
                sub_idx, sub_off, neg_table, keep_prob,
                config.window, config.negatives, config.learning_rate,
                total_tokens, progress, state, max_line_len,
            )
            if bad >= 0:
                raise TrainingDivergenceError(pairs_done + bad)
            epoch_losses.append(loss_sum / pair_count if pair_count else 0.0)
            pairs_done += pair_count
    else:
        bounds = [n_lines * i // threads for i in range(threads + 1)]
        states = [
            np.array([_derive_seed(config.seed, _TRAIN_STREAM + 1 + w)],
                     dtype=np.uint64)
            for w in range(threads)
        ]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for _ in range(config.epochs):
                futures = [
                    pool.submit(
                        _kernels.train_chunk,
                        tokens, line_offsets, bounds[w], bounds[w + 1],
                        in_mat, out_mat, sub_idx, sub_off, neg_table,
                        keep_prob, config.window, config.negatives,
                        config.learning_rate, total_tokens, progress,
                        states[w], max_line_len,
                    )
                    for w in range(threads)
                ]
                loss_sum = 0.0
                pair_count = 0
                for fut in futures:
                    chunk_loss, chunk_pairs, bad = fut.result()
                    if bad >= 0:
                        raise TrainingDivergenceError(pairs_done + bad)
                    loss_sum += chunk_loss
                    pair_count += chunk_pairs
                epoch_losses.append(loss_sum / pair_count if pair_count else 0.0)
                pairs_done += pair_count

    if not np.isfinite(in_mat).all() or not np.isfinite(out_mat).all():
        raise TrainingDivergenceError(pairs_done)
    in_mat.setflags(write=False)
    out_mat.setflags(write=False)
    return EmbeddingSpace(
        vocab=vocab,
        config=config,
        input_vectors=in_mat,
        output_vectors=out_mat,
        epoch_losses=tuple(epoch_losses),
    )


def word_vector(space: EmbeddingSpace, word: str) -> np.ndarray:
    """Composed vector for ``word``: the mean of its subword rows.

    In-vocab words contribute their own row plus their n-gram bucket
    rows; unseen words are composed from bucket rows alone, so any
    non-empty string gets a vector.  Repeated n-grams contribute once
    per occurrence.  Returns a fresh float64 array.
    """
    rows = _subword_rows(len(space.vocab), space.config, word)
    idx = space.vocab.word_index.get(word)
    if idx is not None:
        rows.insert(0, idx)
    picked = space.input_vectors[np.array(rows, dtype=np.int64)]
    return picked.astype(np.float64).mean(axis=0)


@dataclass(frozen=True)
class LoadedVectors:
    """Word vectors read back from a text export.

    ``matrix`` rows align with ``words``; lookups go through ``index``.
    When the source file repeats a word, the last row wins and
    ``duplicate_count`` reports how many earlier rows were discarded.
    """

    words: tuple[str, ...]
    matrix: np.ndarray
    index: dict[str, int]
    duplicate_count: int

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def vector(self, word: str) -> np.ndarray:
        row = self.index.get(word)
        if row is None:
            raise DataError(f"word {word!r} not present in loaded vectors")
        return self.matrix[row]


def save_vectors(space: EmbeddingSpace, path) -> None:
    """Write composed vocab vectors as text: header line, then one
    ``word v1 .. vd`` row per vocab word with six-decimal components."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(space.vocab)} {space.config.dim}\n")
        for word in space.vocab.words:
            vec = word_vector(space, word)
            comps = " ".join(f"{x:.6f}" for x in vec)
            fh.write(f"{word} {comps}\n")


def load_vectors(path) -> LoadedVectors:
    """Read a text vector file written by :func:`save_vectors`.

    The header must be two integers (row count, dimension); every data
    row must carry exactly ``dim`` float components.  Raises ParseError
    with the offending line number on any malformed content, including
    a row count that disagrees with the header.
    """
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2:
            raise ParseError(path, 1, "header must be '<count> <dim>'")
        try:
            count, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(path, 1, "header must be '<count> <dim>'") from None
        if count < 0 or dim < 1:
            raise ParseError(path, 1, f"implausible header {count} {dim}")
        words: list[str] = []
        rows: list[np.ndarray] = []
        slot: dict[str, int] = {}
        duplicates = 0
        line_no = 1
        for raw in fh:
            line_no += 1
            fields_ = raw.rstrip("\n").split(" ")
            if len(fields_) != dim + 1:
                raise ParseError(
                    path, line_no,
                    f"expected {dim + 1} fields, found {len(fields_)}",
                )
            word = fields_[0]
            try:
                vec = np.array([float(x) for x in fields_[1:]], dtype=np.float64)
            except ValueError:
                raise ParseError(path, line_no, "non-numeric component") from None
            if word in slot:
                rows[slot[word]] = vec
                duplicates += 1
            else:
                slot[word] = len(words)
                words.append(word)
                rows.append(vec)
        if len(words) + duplicates != count:
            raise ParseError(
                path, line_no + 1,
                f"header promised {count} rows, file held {len(words) + duplicates}",
            )
    matrix = (
        np.vstack(rows) if rows else np.zeros((0, dim), dtype=np.float64)
    )
    matrix.setflags(write=False)
    return LoadedVectors(
        words=tuple(words),
        matrix=matrix,
        index={w: i for i, w in enumerate(slot)},
        duplicate_count=duplicates,
    )


def pair_loss(
    input_rows: np.ndarray,
    output_vectors: np.ndarray,
    context_id: int,
    negative_ids,
) -> float:
    """Loss of a single training pair, written plainly in float64.

    ``input_rows`` are the subword rows of the center word whose mean is
    the hidden vector h.  The loss is softplus(-h.u_ctx) plus
    softplus(h.u_neg) summed over negatives.  This is the definition the
    training kernel optimizes; tests difference it numerically to check
    the kernel's analytic gradients.
    """
    hidden = input_rows.mean(axis=0)
    loss = float(np.logaddexp(0.0, -hidden @ output_vectors[context_id]))
    for neg in negative_ids:
        loss += float(np.logaddexp(0.0, hidden @ output_vectors[neg]))
    return loss


def pair_gradients(
    input_rows: np.ndarray,
    output_vectors: np.ndarray,
    context_id: int,
    negative_ids,
):
    """Analytic gradients of :func:`pair_loss`.

    Returns (loss, row_gradient, output_gradients) where row_gradient is
    the gradient with respect to EACH input row (the hidden gradient
    divided by the row count) and output_gradients maps output ids to
    accumulated gradients, merging repeated negatives.
    """
    hidden = input_rows.mean(axis=0)
    n_rows = input_rows.shape[0]
    grad_hidden = np.zeros_like(hidden)
    out_grads: dict[int, np.ndarray] = {}
    loss = 0.0

    def _accumulate(target: int, label: float) -> None:
        nonlocal loss
        score = float(hidden @ output_vectors[target])
        sig = 1.0 / (1.0 + math.exp(-score)) if score > -700 else 0.0
        loss += float(np.logaddexp(0.0, -score if label == 1.0 else score))
        coeff = sig - label
        grad_hidden[:] += coeff * output_vectors[target]
        if target not in out_grads:
            out_grads[target] = np.zeros_like(hidden)
        out_grads[target] += coeff * hidden

    _accumulate(context_id, 1.0)
    for neg in negative_ids:
        _accumulate(neg, 0.0)
    return loss, grad_hidden / n_rows, out_grads


def with_overrides(config: TrainConfig, **changes) -> TrainConfig:
    """A copy of ``config`` with the given fields replaced."""
    known = {f.name for f in fields(TrainConfig)}
    unknown = sorted(set(changes) - known)
    if unknown:
        raise ConfigError(f"unknown training options: {', '.join(unknown)}")
    return replace(config, **changes)
