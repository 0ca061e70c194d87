"""Nearest-neighbor overlap between embedding spaces.

The core measurement: for a word, take its k nearest neighbors by
cosine similarity in each of two spaces, restricted to the candidate
pool both spaces share, and report the fraction of neighbors the two
lists have in common.  Comparing spaces trained on reshuffled copies of
one corpus gives a within-condition baseline; comparing across corpora
gives between-condition variation.

Everything here is exact and deterministic.  Similarities are computed
in float64 by full scan (no approximate index), and ties are broken by
the lexicographic order of the candidate words, so results do not
depend on platform, parallelism, or input ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import (
    ConfigError,
    DataError,
    DegenerateVectorError,
    MissingSpaceError,
    PoolError,
    ScheduleError,
)
from .sgns import EmbeddingSpace, LoadedVectors, word_vector


@dataclass(frozen=True)
class OverlapQuery:
    """How to run a neighbor query: list length and the fixed pool rule
    (all words shared by the spaces under comparison, minus the query
    word itself)."""

    k: int = 50

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ConfigError("k must be >= 1")


@dataclass(frozen=True, order=True)
class PairId:
    condition_a: str
    run_a: int
    condition_b: str
    run_b: int

    @property
    def condition_type(self) -> str:
        return "within" if self.condition_a == self.condition_b else "between"

    def __str__(self) -> str:
        return (
            f"{self.condition_a}_r{self.run_a}__{self.condition_b}_r{self.run_b}"
        )


@dataclass(frozen=True)
class OverlapRecord:
    word: str
    pair_id: PairId
    condition_type: str
    k: int
    overlap: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.overlap <= 1.0:
            raise DataError(f"overlap {self.overlap} outside [0,1]")


@dataclass(frozen=True)
class PairSchedule:
    """The run pairs compared for one condition pairing."""

    condition_a: str
    condition_b: str
    pairs: tuple[PairId, ...]


def schedule_pairs(
    runs_per_condition: int, condition_a: str, condition_b: str
) -> PairSchedule:
    """Deterministic comparison schedule for two conditions.

    Within a condition (same label twice) every unordered run pair is
    compared: C(r,2) pairs.  Across conditions the schedule is the 2r
    pairs (i, i) and (i, (i+1) mod r), which touch every run of each
    side exactly twice.  At the five runs used throughout, both counts
    are ten.
    """
    r = runs_per_condition
    if r < 2:
        raise ScheduleError(f"need at least 2 runs per condition, got {r}")
    if condition_a == condition_b:
        pairs = tuple(
            PairId(condition_a, i, condition_b, j)
            for i, j in combinations(range(r), 2)
        )
    else:
        pairs = []
        for i in range(r):
            pairs.append(PairId(condition_a, i, condition_b, i))
            pairs.append(PairId(condition_a, i, condition_b, (i + 1) % r))
        pairs = tuple(sorted(pairs))
    return PairSchedule(condition_a, condition_b, pairs)


def _space_words(space) -> tuple[str, ...]:
    return space.words


def _query_vector(space, word: str) -> np.ndarray:
    if isinstance(space, LoadedVectors):
        return space.vector(word)
    return word_vector(space, word)


def _pool_matrix(space, pool: list[str]) -> np.ndarray:
    """Candidate vectors as a float64 matrix, one row per pool word."""
    if isinstance(space, LoadedVectors):
        rows = np.array([space.index[w] for w in pool], dtype=np.int64)
        return space.matrix[rows]
    return np.vstack([word_vector(space, w) for w in pool])


def _rank_pool(sims: np.ndarray) -> np.ndarray:
    """Order candidate indices by descending similarity.

    The pool is lexicographically sorted, so a stable argsort on the
    negated similarities yields cosine-descending order with exact ties
    resolved alphabetically.
    """
    return np.argsort(-sims, kind="stable")


def _similarities(query: np.ndarray, matrix: np.ndarray, word: str) -> np.ndarray:
    qn = float(np.linalg.norm(query))
    if qn == 0.0:
        raise DegenerateVectorError(f"word {word!r} has a zero-norm vector")
    norms = np.linalg.norm(matrix, axis=1)
    safe = np.where(norms == 0.0, 1.0, norms)
    sims = (matrix @ query) / (safe * qn)
    return np.where(norms == 0.0, 0.0, sims)


def nearest_neighbors(
    space, word: str, query: OverlapQuery, candidates=None
) -> list[str]:
    """The k nearest candidates of ``word`` by cosine similarity.

    ``space`` may be a trained EmbeddingSpace or LoadedVectors read from
    a file.  ``candidates`` defaults to every word the space knows other
    than the query word; pass an explicit collection to restrict the
    pool (it is deduplicated, sorted, and stripped of the query word).
    Zero-norm candidates sort last (similarity treated as 0); a
    zero-norm query raises DegenerateVectorError; a pool smaller than k
    raises PoolError.
    """
    if candidates is None:
        candidates = _space_words(space)
    pool = sorted(set(candidates) - {word})
    if len(pool) < query.k:
        raise PoolError(
            f"candidate pool for {word!r} holds {len(pool)} words, need k={query.k}"
        )
    qvec = _query_vector(space, word)
    sims = _similarities(qvec, _pool_matrix(space, pool), word)
    order = _rank_pool(sims)
    return [pool[i] for i in order[: query.k]]


def overlap(space_a, space_b, word: str, query: OverlapQuery) -> float:
    """Fraction of shared k-nearest neighbors for ``word``.

    The candidate pool is the shared vocabulary of the two spaces minus
    the word itself; both neighbor lists are drawn from that pool, so
    the value is symmetric in the two spaces and lands on a multiple of
    1/k in [0,1].
    """
    shared = set(_space_words(space_a)) & set(_space_words(space_b))
    if word not in shared:
        raise DataError(f"word {word!r} is not shared by both spaces")
    pool = sorted(shared - {word})
    if len(pool) < query.k:
        raise PoolError(
            f"shared pool for {word!r} holds {len(pool)} words, need k={query.k}"
        )
    nn_a = nearest_neighbors(space_a, word, query, pool)
    nn_b = nearest_neighbors(space_b, word, query, pool)
    return len(set(nn_a) & set(nn_b)) / query.k


def ranked_neighbor_lists(
    space, words: list[str], pool: list[str], k: int
) -> dict[str, list[str] | None]:
    """Top-k neighbor lists for many query words over one shared pool.

    Matches :func:`nearest_neighbors` called per word with
    ``candidates=pool`` exactly, but computes all similarities in one
    matrix product.  Words that are absent from the pool or have a
    zero-norm vector map to None instead of raising, so callers can
    record skips.  Because ranking does not depend on k, the list for
    any smaller k' is the k'-prefix of the list for k.
    """
    pool = sorted(set(pool))
    pool_index = {w: i for i, w in enumerate(pool)}
    matrix = _pool_matrix(space, pool)
    norms = np.linalg.norm(matrix, axis=1)
    safe = np.where(norms == 0.0, 1.0, norms)
    unit = matrix / safe[:, None]

    out: dict[str, list[str] | None] = {}
    queryable = []
    for w in words:
        at = pool_index.get(w)
        if at is None:
            out[w] = None
        elif norms[at] == 0.0:
            out[w] = None
        else:
            queryable.append((w, at))
    if not queryable:
        return out
    if len(pool) - 1 < k:
        raise PoolError(f"pool holds {len(pool)} words, need k={k} plus the query")

    rows = np.array([at for _, at in queryable], dtype=np.int64)
    sims = unit[rows] @ unit.T
    sims[:, norms == 0.0] = 0.0
    order = np.argsort(-sims, axis=1, kind="stable")
    for row, (w, at) in enumerate(queryable):
        picked = []
        for idx in order[row]:
            if idx == at:
                continue
            picked.append(pool[idx])
            if len(picked) == k:
                break
        out[w] = picked
    return out


@dataclass(frozen=True)
class SkippedWord:
    word: str
    pair_id: PairId
    reason: str


@dataclass(frozen=True)
class ComparisonResult:
    records: tuple[OverlapRecord, ...]
    skipped: tuple[SkippedWord, ...]


def compare_conditions(
    spaces: dict[tuple[str, int], object],
    lexicon_words,
    query: OverlapQuery,
    runs_per_condition: int | None = None,
) -> ComparisonResult:
    """Overlap records for every scheduled pair and lexicon word.

    ``spaces`` maps (condition, run_index) to a space; every condition
    must supply runs 0..r-1.  All condition pairings are compared,
    within-condition ones included.  Words missing from a pair's shared
    vocabulary (or with degenerate vectors) become SkippedWord entries
    rather than silently vanishing.
    """
    words = list(getattr(lexicon_words, "words", lexicon_words))
    conditions = sorted({cond for cond, _ in spaces})
    if not conditions:
        raise MissingSpaceError("no spaces supplied")
    runs = runs_per_condition
    if runs is None:
        runs = max(run for _, run in spaces) + 1
    for cond in conditions:
        for run in range(runs):
            if (cond, run) not in spaces:
                raise MissingSpaceError(f"missing space for ({cond!r}, run {run})")

    records: list[OverlapRecord] = []
    skipped: list[SkippedWord] = []
    for a_at in range(len(conditions)):
        for b_at in range(a_at, len(conditions)):
            schedule = schedule_pairs(runs, conditions[a_at], conditions[b_at])
            for pair in schedule.pairs:
                space_a = spaces[(pair.condition_a, pair.run_a)]
                space_b = spaces[(pair.condition_b, pair.run_b)]
                pool = sorted(
                    set(_space_words(space_a)) & set(_space_words(space_b))
                )
                lists_a = ranked_neighbor_lists(space_a, words, pool, query.k)
                lists_b = ranked_neighbor_lists(space_b, words, pool, query.k)
                for w in words:
                    nn_a, nn_b = lists_a[w], lists_b[w]
                    if nn_a is None or nn_b is None:
                        skipped.append(
                            SkippedWord(
                                w, pair,
                                "word absent from shared vocabulary or degenerate",
                            )
                        )
                        continue
                    records.append(
                        OverlapRecord(
                            word=w,
                            pair_id=pair,
                            condition_type=pair.condition_type,
                            k=query.k,
                            overlap=len(set(nn_a) & set(nn_b)) / query.k,
                        )
                    )
    return ComparisonResult(tuple(records), tuple(skipped))


def write_overlap_csv(records, path) -> None:
    """Export overlap records as CSV, one row per (word, pair)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("word,cond_a,run_a,cond_b,run_b,condition_type,k,overlap\n")
        for r in records:
            p = r.pair_id
            fh.write(
                f"{r.word},{p.condition_a},{p.run_a},{p.condition_b},{p.run_b},"
                f"{r.condition_type},{r.k},{r.overlap:.6f}\n"
            )
