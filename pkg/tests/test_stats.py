"""Student-t machinery, paired tests, credible intervals, and the OLS model."""

import math

import numpy as np
import pytest
import scipy.stats

from embedvar.errors import (
    CollinearDesignError,
    ConfigError,
    DataError,
    DegenerateVarianceError,
)
from embedvar.lexicon import AnnotatedLexicon, LexiconEntry, concreteness_bin
from embedvar.stats import (
    CredibleInterval,
    RegressionRow,
    RegressionTable,
    TTestResult,
    bayes_mean_ci,
    fit_lexical_model,
    paired_t_test,
    pearson,
    regularized_incomplete_beta,
    student_t_cdf,
    student_t_ppf,
    student_t_two_tailed_p,
    write_regression_csv,
)

# Classical two-sided 5% critical values of the t distribution.
T_TABLE_975 = {1: 12.706204736, 3: 3.182446305, 5: 2.570581836, 10: 2.228138852}


class TestStudentT:
    def test_p_at_zero(self):
        assert student_t_two_tailed_p(0.0, 5) == pytest.approx(1.0, abs=1e-12)

    def test_symmetry(self):
        for t in (0.3, 1.7, 4.2):
            assert student_t_two_tailed_p(t, 7) == pytest.approx(
                student_t_two_tailed_p(-t, 7), abs=1e-15
            )

    def test_infinite_t(self):
        assert student_t_two_tailed_p(float("inf"), 3) == 0.0

    def test_df_must_be_positive(self):
        with pytest.raises(DataError):
            student_t_two_tailed_p(1.0, 0)

    def test_df2_closed_form(self):
        # For df=2 the two-tailed p is exactly 1 - |t|/sqrt(t^2+2).
        for t in (0.5, 1.0606601717798212, 2.0, 3.4641016151377544):
            expected = 1.0 - t / math.sqrt(t * t + 2.0)
            assert student_t_two_tailed_p(t, 2) == pytest.approx(expected, abs=1e-12)

    def test_against_independent_oracle_grid(self):
        for t in (0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 5.0, 12.7):
            for df in (1, 2, 3, 5, 10, 30, 120):
                mine = student_t_two_tailed_p(t, df)
                oracle = 2.0 * scipy.stats.t.sf(t, df)
                assert mine == pytest.approx(oracle, abs=1e-10), (t, df)

    def test_cdf_against_oracle(self):
        for t in (-3.0, -0.7, 0.0, 0.7, 3.0):
            for df in (1, 4, 9):
                assert student_t_cdf(t, df) == pytest.approx(
                    scipy.stats.t.cdf(t, df), abs=1e-10
                )

    def test_ppf_critical_values(self):
        for df, crit in T_TABLE_975.items():
            assert student_t_ppf(0.975, df) == pytest.approx(crit, abs=1e-6)

    def test_ppf_round_trip(self):
        for q in (0.6, 0.9, 0.975, 0.999):
            for df in (2, 8):
                assert student_t_cdf(student_t_ppf(q, df), df) == pytest.approx(
                    q, abs=1e-10
                )

    def test_ppf_median_and_symmetry(self):
        assert student_t_ppf(0.5, 7) == 0.0
        assert student_t_ppf(0.1, 7) == pytest.approx(-student_t_ppf(0.9, 7), abs=1e-12)

    def test_ppf_rejects_bad_quantiles(self):
        for q in (0.0, 1.0, -0.2, 1.3):
            with pytest.raises(DataError):
                student_t_ppf(q, 5)

    def test_incomplete_beta_identities(self):
        assert regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0
        assert regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0
        # I_x(1,1) is the identity; I_x(a,b) = 1 - I_{1-x}(b,a)
        assert regularized_incomplete_beta(1.0, 1.0, 0.42) == pytest.approx(
            0.42, abs=1e-13
        )
        a, b, x = 2.5, 0.5, 0.3
        assert regularized_incomplete_beta(a, b, x) == pytest.approx(
            1.0 - regularized_incomplete_beta(b, a, 1.0 - x), abs=1e-12
        )
        assert regularized_incomplete_beta(a, b, x) == pytest.approx(
            scipy.stats.beta.cdf(x, a, b), abs=1e-12
        )


class TestPairedTTest:
    def test_reference_point(self):
        result = paired_t_test([2.0, 4.0, 6.0], [1.0, 2.0, 3.0])
        assert result.t == pytest.approx(2.0 * math.sqrt(3.0), abs=1e-12)
        assert result.df == 2
        assert result.p_two_tailed == pytest.approx(0.0741799, abs=1e-7)
        assert result.mean_diff == pytest.approx(2.0, abs=1e-15)

    def test_against_independent_oracle(self):
        rng = np.random.default_rng(19)
        x = rng.normal(0.6, 0.1, size=12)
        y = x + rng.normal(0.02, 0.05, size=12)
        mine = paired_t_test(x, y)
        oracle = scipy.stats.ttest_rel(x, y)
        assert mine.t == pytest.approx(oracle.statistic, abs=1e-10)
        assert mine.p_two_tailed == pytest.approx(oracle.pvalue, abs=1e-10)

    def test_identical_samples(self):
        result = paired_t_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert (result.t, result.p_two_tailed, result.mean_diff) == (0.0, 1.0, 0.0)

    def test_constant_nonzero_difference_degenerate(self):
        with pytest.raises(DegenerateVarianceError):
            paired_t_test([2.0, 3.0, 4.0], [1.0, 2.0, 3.0])

    def test_translation_invariance(self):
        x = [0.8, 0.6, 0.7, 0.9]
        y = [0.5, 0.6, 0.4, 0.7]
        base = paired_t_test(x, y)
        shifted = paired_t_test([v + 5.0 for v in x], [v + 5.0 for v in y])
        assert shifted.t == pytest.approx(base.t, abs=1e-12)
        assert shifted.p_two_tailed == pytest.approx(base.p_two_tailed, abs=1e-12)
        assert shifted.mean_diff == pytest.approx(base.mean_diff, abs=1e-12)

    @pytest.mark.parametrize(
        "x,y",
        [([1.0], [2.0]), ([1.0, 2.0], [1.0]), ([[1.0, 2.0]], [[1.0, 2.0]])],
    )
    def test_shape_validation(self, x, y):
        with pytest.raises(DataError):
            paired_t_test(x, y)


class TestCredibleInterval:
    def test_reference_interval(self):
        # mean 10, sample sd exactly 2, n = 4
        root3 = math.sqrt(3.0)
        values = [10.0 - root3, 10.0 - root3, 10.0 + root3, 10.0 + root3]
        ci = bayes_mean_ci(values, level=0.95)
        assert ci.mean == pytest.approx(10.0, abs=1e-12)
        assert ci.lo == pytest.approx(6.817554, abs=1e-5)
        assert ci.hi == pytest.approx(13.182446, abs=1e-5)
        assert ci.level == 0.95

    def test_interval_shrinks_with_n(self):
        def spread_sample(n, s):
            delta = s * math.sqrt((n - 1) / n)
            return [5.0 - delta] * (n // 2) + [5.0 + delta] * (n // 2)

        wide = bayes_mean_ci(spread_sample(10, 2.0))
        narrow = bayes_mean_ci(spread_sample(100, 2.0))
        assert (narrow.hi - narrow.lo) < (wide.hi - wide.lo)

    def test_level_validation(self):
        for level in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(ConfigError):
                bayes_mean_ci([1.0, 2.0, 3.0], level=level)

    def test_constant_values_degenerate(self):
        with pytest.raises(DegenerateVarianceError):
            bayes_mean_ci([4.0, 4.0, 4.0])

    def test_too_few_values(self):
        with pytest.raises(DataError):
            bayes_mean_ci([1.0])

    def test_bracket_validated(self):
        with pytest.raises(DataError):
            CredibleInterval(mean=5.0, lo=6.0, hi=7.0, level=0.9)

    def test_wider_level_gives_wider_interval(self):
        values = [0.3, 0.5, 0.4, 0.6, 0.45]
        ci90 = bayes_mean_ci(values, level=0.90)
        ci99 = bayes_mean_ci(values, level=0.99)
        assert ci99.lo < ci90.lo < ci90.hi < ci99.hi


class TestPearson:
    def test_reference_point_exact(self):
        r, p = pearson([1.0, 2.0, 3.0, 4.0], [2.0, 1.0, 4.0, 3.0])
        assert r == pytest.approx(0.6, abs=1e-15)
        assert p == pytest.approx(0.4, abs=1e-12)

    def test_against_independent_oracle(self):
        rng = np.random.default_rng(23)
        x = rng.normal(size=40)
        y = 0.4 * x + rng.normal(size=40)
        r, p = pearson(x, y)
        oracle = scipy.stats.pearsonr(x, y)
        assert r == pytest.approx(oracle.statistic, abs=1e-12)
        assert p == pytest.approx(oracle.pvalue, abs=1e-10)

    def test_perfect_correlation(self):
        assert pearson([1.0, 2.0, 3.0], [2.0, 4.0, 6.0]) == (1.0, 0.0)
        assert pearson([1.0, 2.0, 3.0], [-2.0, -4.0, -6.0]) == (-1.0, 0.0)

    def test_scale_shift_invariance(self):
        x = [0.1, 0.4, 0.2, 0.9, 0.7]
        y = [0.3, 0.5, 0.2, 0.8, 0.4]
        r0, p0 = pearson(x, y)
        r1, p1 = pearson([2.5 * v - 3.0 for v in x], [0.7 * v + 11.0 for v in y])
        assert r1 == pytest.approx(r0, abs=1e-12)
        assert p1 == pytest.approx(p0, abs=1e-12)

    def test_negative_scaling_flips_sign(self):
        x = [0.1, 0.4, 0.2, 0.9, 0.7]
        y = [0.3, 0.5, 0.2, 0.8, 0.4]
        r0, p0 = pearson(x, y)
        r1, p1 = pearson([-v for v in x], y)
        assert r1 == pytest.approx(-r0, abs=1e-12)
        assert p1 == pytest.approx(p0, abs=1e-12)

    def test_constant_input_degenerate(self):
        with pytest.raises(DegenerateVarianceError):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_too_few_observations(self):
        with pytest.raises(DataError):
            pearson([1.0, 2.0], [2.0, 1.0])


def _make_lexicon(specs):
    """AnnotatedLexicon from {word: (conc, aoa, pos, domain, per_million)}."""
    entries = []
    for word in sorted(specs):
        conc, aoa, pos, domain, pm = specs[word]
        entries.append(
            LexiconEntry(
                word=word,
                concreteness=conc,
                aoa=aoa,
                pos=pos,
                domain=domain,
                per_million=pm,
                concreteness_bin=concreteness_bin(conc),
            )
        )
    from collections import Counter

    return AnnotatedLexicon(
        entries=tuple(entries),
        counts_by_domain=dict(Counter(e.domain for e in entries)),
        counts_by_pos=dict(Counter(e.pos for e in entries)),
        counts_by_bin=dict(Counter(e.concreteness_bin for e in entries)),
    )


class TestLexicalModel:
    def test_noiseless_scalar_coefficient_exact(self):
        specs = {}
        for i in range(10):
            conc = 1.0 + 0.4 * i
            specs[f"w{i:02d}"] = (conc, 5.0, "Noun", "things", 0.0)
        lexicon = _make_lexicon(specs)
        records = {
            region: {w: 1.0 + 2.0 * specs[w][0] for w in specs}
            for region in ("within-a", "between")
        }
        table = fit_lexical_model(records, lexicon, condition="a")
        by_name = {row.factor: row for row in table.rows}
        assert by_name["concreteness"].coefficient == pytest.approx(2.0, abs=1e-10)
        assert by_name["intercept"].coefficient == pytest.approx(1.0, abs=1e-9)
        assert by_name["concreteness"].p_value < 1e-100
        assert abs(by_name["region:within-a"].coefficient) < 1e-9
        assert table.dropped_constant == ("aoa", "per_million")
        assert table.r_squared == pytest.approx(1.0, abs=1e-12)
        assert table.max_normal_eq <= 1e-8
        assert table.n_observations == 20

    def test_planted_domain_effect_recovered(self):
        rng = np.random.default_rng(31)
        specs = {}
        for i in range(30):
            specs[f"base{i:02d}"] = (
                1.0 + (i % 8) * 0.5,
                3.0 + (i % 6),
                "Noun",
                "base",
                10.0 + i,
            )
        for i in range(20):
            specs[f"lift{i:02d}"] = (
                1.5 + (i % 8) * 0.4,
                4.0 + (i % 5),
                "Noun",
                "lift",
                25.0 + i,
            )
        lexicon = _make_lexicon(specs)
        records = {}
        for region in ("within-a", "between"):
            records[region] = {
                w: 0.5
                + (0.3 if spec[3] == "lift" else 0.0)
                + rng.normal(0.0, 0.05)
                for w, spec in specs.items()
            }
        table = fit_lexical_model(records, lexicon, condition="a")
        assert table.reference_levels["domain"] == "base"
        (lift_row,) = [r for r in table.rows if r.factor == "domain:lift"]
        assert lift_row.std_error > 0.0
        assert abs(lift_row.coefficient - 0.3) <= 2.0 * lift_row.std_error
        assert lift_row.p_value < 0.001
        assert table.max_normal_eq <= 1e-8
        assert all(0.0 <= r.p_value <= 1.0 for r in table.rows)

    def test_reference_level_ties_break_alphabetically(self):
        specs = {}
        for i in range(10):
            domain = "aaa" if i < 5 else "bbb"
            specs[f"w{i:02d}"] = (2.0 + 0.2 * i, 4.0 + i % 3, "Noun", domain, 0.0)
        lexicon = _make_lexicon(specs)
        rng = np.random.default_rng(5)
        records = {
            region: {w: float(rng.uniform(0.3, 0.7)) for w in specs}
            for region in ("r1", "r2")
        }
        table = fit_lexical_model(records, lexicon, condition="a")
        assert table.reference_levels["domain"] == "aaa"
        names = {row.factor for row in table.rows}
        assert "domain:bbb" in names
        assert "domain:aaa" not in names

    def test_collinear_covariate_detected(self):
        specs = {}
        for i in range(12):
            conc = 1.0 + 0.3 * i
            specs[f"w{i:02d}"] = (conc, conc, "Noun", "things", 0.0)
        lexicon = _make_lexicon(specs)
        records = {
            region: {w: 0.5 + 0.01 * i for i, w in enumerate(sorted(specs))}
            for region in ("r1", "r2")
        }
        with pytest.raises(CollinearDesignError) as err:
            fit_lexical_model(records, lexicon, condition="a")
        assert "aoa" in err.value.columns

    def test_insufficient_coverage_rejected(self):
        specs = {
            f"w{i:02d}": (2.0 + 0.1 * i, 5.0, "Noun", "things", 0.0) for i in range(8)
        }
        lexicon = _make_lexicon(specs)
        records = {
            region: dict(
                {w: 0.5 for w in specs}, ghost1=0.4, ghost2=0.6
            )
            for region in ("r1", "r2")
        }
        with pytest.raises(DataError, match="cover"):
            fit_lexical_model(records, lexicon, condition="a")

    def test_missing_aoa_counts_against_coverage(self):
        specs = {
            f"w{i:02d}": (2.0 + 0.1 * i, None if i < 3 else 5.0, "Noun", "t", 0.0)
            for i in range(10)
        }
        lexicon = _make_lexicon(specs)
        records = {r: {w: 0.5 for w in specs} for r in ("r1", "r2")}
        with pytest.raises(DataError, match="cover"):
            fit_lexical_model(records, lexicon, condition="a")

    def test_small_dropped_fraction_tolerated(self):
        rng = np.random.default_rng(41)
        specs = {
            f"w{i:02d}": (1.0 + 0.45 * (i % 8), 3.0 + i % 7, "Noun", "things", float(i))
            for i in range(19)
        }
        lexicon = _make_lexicon(specs)
        words = sorted(specs) + ["ghost"]
        records = {
            region: {w: float(rng.uniform(0.2, 0.8)) for w in words}
            for region in ("r1", "r2")
        }
        table = fit_lexical_model(records, lexicon, condition="a")
        assert table.dropped_words == 1
        assert table.n_observations == 38

    def test_fewer_than_two_regions_rejected(self):
        specs = {"aa": (2.0, 5.0, "Noun", "x", 0.0)}
        lexicon = _make_lexicon(specs)
        with pytest.raises(DataError, match="regions"):
            fit_lexical_model({"only": {"aa": 0.5}}, lexicon, condition="a")

    def test_more_columns_than_observations_rejected(self):
        specs = {
            "aa": (2.0, 5.0, "Noun", "x", 0.0),
            "bb": (3.0, 6.0, "Verb", "y", 1.0),
        }
        lexicon = _make_lexicon(specs)
        records = {r: {"aa": 0.5, "bb": 0.6} for r in ("r1", "r2")}
        with pytest.raises(DataError, match="observations"):
            fit_lexical_model(records, lexicon, condition="a")

    def test_table_metadata(self):
        specs = {
            f"w{i:02d}": (1.0 + 0.45 * (i % 8), 3.0 + i % 4, "Noun", "things", float(i))
            for i in range(12)
        }
        lexicon = _make_lexicon(specs)
        rng = np.random.default_rng(53)
        records = {
            region: {w: float(rng.uniform(0.2, 0.8)) for w in specs}
            for region in ("r1", "r2", "r3")
        }
        table = fit_lexical_model(records, lexicon, condition="news")
        assert isinstance(table, RegressionTable)
        assert table.dependent == "mean_overlap"
        assert table.condition == "news"
        assert table.n_observations == 36
        assert 0.0 <= table.r_squared <= 1.0
        names = [row.factor for row in table.rows]
        assert names[0] == "intercept"
        assert "region:r2" in names and "region:r3" in names
        assert table.reference_levels["region"] == "r1"


class TestRegressionExport:
    def test_golden_file(self, tmp_path):
        table = RegressionTable(
            rows=(RegressionRow("intercept", 0.5, 0.01, 0.000123),),
            dependent="mean_overlap",
            condition="a",
            n_observations=10,
            reference_levels={},
            dropped_constant=(),
            dropped_words=0,
            r_squared=0.9,
            max_normal_eq=1e-12,
        )
        path = tmp_path / "regression.csv"
        write_regression_csv(table, path)
        assert path.read_text(encoding="utf-8") == (
            "factor,coefficient,p_value\nintercept,0.500000,0.000123\n"
        )
