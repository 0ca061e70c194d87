"""Neighbor queries, overlap scores, and the run-pair comparison driver."""

import math

import numpy as np
import pytest

from embedvar.errors import (
    ConfigError,
    DataError,
    DegenerateVectorError,
    MissingSpaceError,
    PoolError,
    ScheduleError,
)
from embedvar.overlap import (
    ComparisonResult,
    OverlapQuery,
    OverlapRecord,
    PairId,
    compare_conditions,
    nearest_neighbors,
    overlap,
    ranked_neighbor_lists,
    schedule_pairs,
    write_overlap_csv,
)
from embedvar.sgns import LoadedVectors

from conftest import make_loaded_vectors


def make_space(named_vectors):
    """LoadedVectors from {word: vector} for hand-built geometry."""
    words = tuple(named_vectors)
    matrix = np.array([named_vectors[w] for w in words], dtype=np.float64)
    matrix.setflags(write=False)
    return LoadedVectors(
        words=words,
        matrix=matrix,
        index={w: i for i, w in enumerate(words)},
        duplicate_count=0,
    )


def on_circle(angle_deg):
    rad = math.radians(angle_deg)
    return [math.cos(rad), math.sin(rad)]


class TestQueryAndPairTypes:
    def test_query_validation(self):
        assert OverlapQuery().k == 50
        with pytest.raises(ConfigError):
            OverlapQuery(k=0)

    def test_pair_condition_type(self):
        assert PairId("a", 0, "a", 1).condition_type == "within"
        assert PairId("a", 0, "b", 0).condition_type == "between"

    def test_pair_str(self):
        assert str(PairId("news", 2, "web", 4)) == "news_r2__web_r4"

    def test_record_range_check(self):
        pair = PairId("a", 0, "a", 1)
        OverlapRecord("w", pair, "within", 10, 0.5)
        with pytest.raises(DataError):
            OverlapRecord("w", pair, "within", 10, 1.2)


class TestSchedule:
    def test_within_is_all_unordered_pairs(self):
        schedule = schedule_pairs(5, "a", "a")
        assert len(schedule.pairs) == 10
        assert len(set(schedule.pairs)) == 10
        assert schedule.pairs[0] == PairId("a", 0, "a", 1)
        assert all(p.run_a < p.run_b for p in schedule.pairs)

    def test_between_touches_every_run_twice(self):
        schedule = schedule_pairs(5, "a", "b")
        assert len(schedule.pairs) == 10
        assert len(set(schedule.pairs)) == 10
        assert schedule.pairs[0] == PairId("a", 0, "b", 0)
        for side, runs in (("a", [p.run_a for p in schedule.pairs]),
                           ("b", [p.run_b for p in schedule.pairs])):
            for run in range(5):
                assert runs.count(run) == 2, (side, run)

    def test_two_runs(self):
        assert schedule_pairs(2, "a", "a").pairs == (PairId("a", 0, "a", 1),)
        between = schedule_pairs(2, "a", "b").pairs
        assert between == (
            PairId("a", 0, "b", 0),
            PairId("a", 0, "b", 1),
            PairId("a", 1, "b", 0),
            PairId("a", 1, "b", 1),
        )

    def test_three_runs_between_count(self):
        assert len(set(schedule_pairs(3, "a", "b").pairs)) == 6

    def test_too_few_runs(self):
        with pytest.raises(ScheduleError):
            schedule_pairs(1, "a", "a")


class TestNearestNeighbors:
    def test_cosine_ladder(self):
        space = make_space(
            {
                "query": [1.0, 0.0],
                "high": [0.9, math.sqrt(1 - 0.81)],
                "mid": [0.5, math.sqrt(1 - 0.25)],
                "low": [0.1, math.sqrt(1 - 0.01)],
            }
        )
        assert nearest_neighbors(space, "query", OverlapQuery(k=2)) == ["high", "mid"]
        assert nearest_neighbors(space, "query", OverlapQuery(k=3)) == [
            "high",
            "mid",
            "low",
        ]

    def test_exact_ties_break_alphabetically(self):
        shared = [0.6, 0.8]
        space = make_space(
            {"query": [1.0, 0.0], "zeta": shared, "alpha": shared, "far": [-1.0, 0.0]}
        )
        assert nearest_neighbors(space, "query", OverlapQuery(k=2)) == ["alpha", "zeta"]

    def test_zero_norm_candidate_scores_zero(self):
        space = make_space(
            {
                "query": [1.0, 0.0],
                "close": [1.0, 0.1],
                "null": [0.0, 0.0],
                "anti": [-1.0, 0.0],
            }
        )
        assert nearest_neighbors(space, "query", OverlapQuery(k=3)) == [
            "close",
            "null",
            "anti",
        ]

    def test_zero_norm_query_rejected(self):
        space = make_space({"query": [0.0, 0.0], "a": [1.0, 0.0], "b": [0.0, 1.0]})
        with pytest.raises(DegenerateVectorError):
            nearest_neighbors(space, "query", OverlapQuery(k=1))

    def test_small_pool_rejected(self):
        space = make_space({"query": [1.0, 0.0], "a": [0.0, 1.0]})
        with pytest.raises(PoolError):
            nearest_neighbors(space, "query", OverlapQuery(k=2))

    def test_explicit_candidates_dedup_and_drop_query(self):
        space = make_space(
            {"query": [1.0, 0.0], "a": [1.0, 0.2], "b": [0.0, 1.0], "c": [1.0, -0.2]}
        )
        got = nearest_neighbors(
            space, "query", OverlapQuery(k=2), candidates=["a", "a", "query", "c"]
        )
        assert got == sorted(got)
        assert set(got) == {"a", "c"}

    def test_matches_brute_force_oracle(self):
        space = make_loaded_vectors(200, 12, seed=77)
        query = OverlapQuery(k=10)
        rng = np.random.default_rng(3)
        for word in rng.choice(space.words, size=20, replace=False):
            got = nearest_neighbors(space, word, query)
            qv = space.vector(word)
            scored = []
            for other in space.words:
                if other == word:
                    continue
                ov = space.vector(other)
                sim = float(
                    np.dot(qv, ov) / (np.linalg.norm(qv) * np.linalg.norm(ov))
                )
                scored.append((-sim, other))
            scored.sort()
            assert got == [w for _, w in scored[:10]]


class TestOverlap:
    def test_identical_spaces_give_one(self):
        space = make_loaded_vectors(30, 6, seed=1)
        assert overlap(space, space, space.words[0], OverlapQuery(k=10)) == 1.0

    def test_half_overlap_by_construction(self):
        # Space A ranks c00..c19 by angle; B rotates the ladder so the
        # top ten lists share exactly five members.
        a_vecs = {"query": on_circle(0)}
        b_vecs = {"query": on_circle(0)}
        for i in range(20):
            word = f"c{i:02d}"
            a_vecs[word] = on_circle(2 + 4 * i)
            b_vecs[word] = on_circle(2 + 4 * ((i - 5) % 20))
        space_a, space_b = make_space(a_vecs), make_space(b_vecs)
        query = OverlapQuery(k=10)
        top_a = set(nearest_neighbors(space_a, "query", query))
        top_b = set(nearest_neighbors(space_b, "query", query))
        assert top_a == {f"c{i:02d}" for i in range(10)}
        assert top_b == {f"c{i:02d}" for i in range(5, 15)}
        assert overlap(space_a, space_b, "query", query) == 0.5

    def test_disjoint_neighbor_structure_gives_zero(self):
        twins_a = [(0, 1), (2, 3), (4, 5)]
        twins_b = [(0, 2), (1, 4), (3, 5)]
        angles = [0, 60, 120]

        def paired_space(twins):
            vecs = {}
            for angle, (x, y) in zip(angles, twins):
                vecs[f"w{x}"] = on_circle(angle)
                vecs[f"w{y}"] = on_circle(angle)
            return make_space(vecs)

        space_a, space_b = paired_space(twins_a), paired_space(twins_b)
        query = OverlapQuery(k=1)
        for i in range(6):
            assert overlap(space_a, space_b, f"w{i}", query) == 0.0

    def test_symmetry(self):
        space_a = make_loaded_vectors(40, 8, seed=5)
        space_b = make_loaded_vectors(40, 8, seed=6)
        query = OverlapQuery(k=7)
        for word in space_a.words[:8]:
            assert overlap(space_a, space_b, word, query) == overlap(
                space_b, space_a, word, query
            )

    def test_times_k_is_integer(self):
        space_a = make_loaded_vectors(40, 8, seed=15)
        space_b = make_loaded_vectors(40, 8, seed=16)
        for k in (1, 5, 13):
            query = OverlapQuery(k=k)
            for word in space_a.words[:5]:
                val = overlap(space_a, space_b, word, query) * k
                assert val == round(val)

    def test_unshared_word_rejected(self):
        space_a = make_loaded_vectors(10, 4, seed=1, prefix="a")
        space_b = make_loaded_vectors(10, 4, seed=2, prefix="b")
        with pytest.raises(DataError):
            overlap(space_a, space_b, "a0001", OverlapQuery(k=2))

    def test_small_shared_pool_rejected(self):
        space_a = make_loaded_vectors(5, 4, seed=1)
        space_b = make_loaded_vectors(5, 4, seed=2)
        with pytest.raises(PoolError):
            overlap(space_a, space_b, space_a.words[0], OverlapQuery(k=5))


class TestRankedNeighborLists:
    def test_matches_per_word_queries(self):
        space = make_loaded_vectors(30, 6, seed=21)
        pool = list(space.words)
        k = 7
        lists = ranked_neighbor_lists(space, list(space.words[:12]), pool, k)
        query = OverlapQuery(k=k)
        for word in space.words[:12]:
            assert lists[word] == nearest_neighbors(space, word, query, pool)

    def test_prefix_property(self):
        space = make_loaded_vectors(30, 6, seed=22)
        pool = list(space.words)
        words = list(space.words[:10])
        long = ranked_neighbor_lists(space, words, pool, 9)
        short = ranked_neighbor_lists(space, words, pool, 3)
        for word in words:
            assert long[word][:3] == short[word]

    def test_absent_and_degenerate_words_map_to_none(self):
        space = make_space(
            {"a": [1.0, 0.0], "b": [0.5, 0.5], "null": [0.0, 0.0], "c": [0.0, 1.0]}
        )
        lists = ranked_neighbor_lists(
            space, ["a", "null", "ghost"], list(space.words), 2
        )
        assert lists["ghost"] is None
        assert lists["null"] is None
        assert lists["a"] is not None

    def test_pool_too_small_for_some_query(self):
        space = make_space({"a": [1.0, 0.0], "b": [0.5, 0.5], "c": [0.0, 1.0]})
        with pytest.raises(PoolError):
            ranked_neighbor_lists(space, ["a"], ["a", "b", "c"], 3)

    def test_no_queryable_words_returns_all_none(self):
        space = make_space({"a": [1.0, 0.0], "b": [0.5, 0.5]})
        lists = ranked_neighbor_lists(space, ["ghost", "phantom"], ["a", "b"], 50)
        assert lists == {"ghost": None, "phantom": None}


class TestCompareConditions:
    def _space_grid(self, n_conditions=2, runs=3, identical=False):
        spaces = {}
        base = make_loaded_vectors(25, 5, seed=100)
        for c in range(n_conditions):
            cond = f"cond{c}"
            for run in range(runs):
                if identical:
                    spaces[(cond, run)] = base
                else:
                    spaces[(cond, run)] = make_loaded_vectors(
                        25, 5, seed=100 + 7 * c + run
                    )
        return spaces

    def test_record_cardinality(self):
        spaces = self._space_grid(n_conditions=2, runs=3)
        words = [f"v{i:04d}" for i in range(6)]
        result = compare_conditions(spaces, words, OverlapQuery(k=4))
        # 3 within pairs per condition plus 6 between pairs, all words
        assert len(result.records) == (3 + 3 + 6) * 6
        assert not result.skipped
        by_type = {"within": 0, "between": 0}
        for record in result.records:
            by_type[record.condition_type] += 1
        assert by_type == {"within": 6 * 6, "between": 6 * 6}

    def test_identical_spaces_give_unit_overlap(self):
        spaces = self._space_grid(identical=True)
        words = [f"v{i:04d}" for i in range(4)]
        result = compare_conditions(spaces, words, OverlapQuery(k=5))
        assert result.records
        assert all(r.overlap == 1.0 for r in result.records)

    def test_missing_run_detected(self):
        spaces = self._space_grid()
        del spaces[("cond1", 2)]
        with pytest.raises(MissingSpaceError):
            compare_conditions(spaces, ["v0000"], OverlapQuery(k=3))

    def test_unshared_words_recorded_as_skips(self):
        spaces = {
            ("a", 0): make_loaded_vectors(20, 4, seed=1),
            ("a", 1): make_loaded_vectors(20, 4, seed=2),
        }
        result = compare_conditions(
            spaces, ["v0001", "missing"], OverlapQuery(k=3)
        )
        assert len(result.records) == 1
        (skip,) = result.skipped
        assert skip.word == "missing"
        assert skip.pair_id == PairId("a", 0, "a", 1)

    def test_accepts_lexicon_like_objects(self, lexicon200):
        spaces = {
            ("a", 0): make_loaded_vectors(20, 4, seed=1),
            ("a", 1): make_loaded_vectors(20, 4, seed=2),
        }
        result = compare_conditions(spaces, lexicon200, OverlapQuery(k=3))
        # every lexicon word is absent from these tiny spaces
        assert len(result.skipped) == 200
        assert not result.records


class TestCsvExport:
    def test_golden_rows(self, tmp_path):
        records = [
            OverlapRecord("dog", PairId("a", 0, "a", 1), "within", 10, 0.5),
            OverlapRecord("cat", PairId("a", 1, "b", 2), "between", 10, 1.0),
        ]
        path = tmp_path / "overlaps.csv"
        write_overlap_csv(records, path)
        assert path.read_text(encoding="utf-8") == (
            "word,cond_a,run_a,cond_b,run_b,condition_type,k,overlap\n"
            "dog,a,0,a,1,within,10,0.500000\n"
            "cat,a,1,b,2,between,10,1.000000\n"
        )


class TestTrainedSpaceIntegration:
    def test_self_overlap_is_one(self, tiny_space):
        query = OverlapQuery(k=5)
        for word in tiny_space.words[:10]:
            assert overlap(tiny_space, tiny_space, word, query) == 1.0

    def test_trained_space_queries_run(self, tiny_space):
        neighbors = nearest_neighbors(tiny_space, tiny_space.words[0], OverlapQuery(k=5))
        assert len(neighbors) == 5
        assert tiny_space.words[0] not in neighbors
