"""Statistical analysis of overlap measurements.

Provides the paired t-test used to compare within- against
between-condition overlap, a Student-t credible interval for mean
overlap, Pearson correlation for the k-robustness check, and an
ordinary-least-squares model relating per-word overlap to lexical
factors (comparison region, semantic domain, part of speech,
concreteness, age of acquisition, frequency).

The Student-t distribution functions are implemented here via the
regularized incomplete beta function (continued-fraction evaluation,
accurate to well under 1e-10 over the ranges used) rather than
delegated to an external statistics library, so the package's p-values
are self-contained and testable against published table values.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import (
    CollinearDesignError,
    ConfigError,
    DataError,
    DegenerateVarianceError,
)
from .lexicon import AnnotatedLexicon

_FPMIN = 1e-300
_CF_EPS = 1e-15
_CF_MAX_ITER = 300


def _betacf(a: float, b: float, x: float) -> float:
    # Lentz's continued-fraction evaluation for the incomplete beta.
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise DataError(f"incomplete beta failed to converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise DataError("incomplete beta requires positive shape parameters")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # The continued fraction converges fast only on one side of the
    # mean; use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) on the other.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_tailed_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for T Student-t distributed with ``df`` degrees."""
    if df <= 0:
        raise DataError("degrees of freedom must be positive")
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


def student_t_cdf(t: float, df: float) -> float:
    tail = student_t_two_tailed_p(t, df)
    return 1.0 - 0.5 * tail if t >= 0 else 0.5 * tail


def student_t_ppf(q: float, df: float) -> float:
    """Quantile of the Student-t distribution by bisection on the CDF."""
    if not 0.0 < q < 1.0:
        raise DataError(f"quantile level {q} outside (0,1)")
    if df <= 0:
        raise DataError("degrees of freedom must be positive")
    if q == 0.5:
        return 0.0
    if q < 0.5:
        return -student_t_ppf(1.0 - q, df)
    lo, hi = 0.0, 1.0
    while student_t_cdf(hi, df) < q:
        lo = hi
        hi *= 2.0
        if hi > 1e300:
            raise DataError(f"quantile level {q} too extreme for df={df}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if student_t_cdf(mid, df) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: int
    p_two_tailed: float
    mean_diff: float


@dataclass(frozen=True)
class CredibleInterval:
    mean: float
    lo: float
    hi: float
    level: float

    def __post_init__(self) -> None:
        if not self.lo <= self.mean <= self.hi:
            raise DataError("interval bounds do not bracket the mean")


def paired_t_test(x, y) -> TTestResult:
    """Paired t-test on matched samples.

    Computes the t statistic of the per-item differences d = x - y with
    df = n - 1 and a two-tailed p-value.  Identical samples (every
    difference exactly zero) return t = 0, p = 1; any other
    zero-variance difference vector is degenerate and raises.
    """
    xv = np.asarray(x, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    if xv.ndim != 1 or yv.ndim != 1 or len(xv) != len(yv):
        raise DataError("paired samples must be equal-length 1-d sequences")
    n = len(xv)
    if n < 2:
        raise DataError(f"need at least 2 paired observations, got {n}")
    d = xv - yv
    mean = float(d.mean())
    if float(np.ptp(d)) == 0.0:
        if d[0] == 0.0:
            return TTestResult(t=0.0, df=n - 1, p_two_tailed=1.0, mean_diff=0.0)
        raise DegenerateVarianceError(
            f"differences are constant at {d[0]}; t statistic undefined"
        )
    sd = float(d.std(ddof=1))
    t = mean / (sd / math.sqrt(n))
    return TTestResult(
        t=t,
        df=n - 1,
        p_two_tailed=student_t_two_tailed_p(t, n - 1),
        mean_diff=mean,
    )


def bayes_mean_ci(values, level: float = 0.95) -> CredibleInterval:
    """Credible interval for the mean under a noninformative prior.

    With a normal likelihood and the Jeffreys prior on (mu, sigma), the
    posterior of the mean is a Student-t centered on the sample mean,
    giving mean +- t_{(1+level)/2, n-1} * s / sqrt(n).
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or len(v) < 2:
        raise DataError("need at least 2 values for a credible interval")
    if not 0.0 < level < 1.0:
        raise ConfigError(f"level {level} outside (0,1)")
    if float(np.ptp(v)) == 0.0:
        raise DegenerateVarianceError("values are constant; posterior degenerate")
    n = len(v)
    mean = float(v.mean())
    s = float(v.std(ddof=1))
    half = student_t_ppf((1.0 + level) / 2.0, n - 1) * s / math.sqrt(n)
    return CredibleInterval(mean=mean, lo=mean - half, hi=mean + half, level=level)


def pearson(x, y) -> tuple[float, float]:
    """Sample Pearson correlation with a two-tailed p-value.

    The p-value comes from the exact null distribution via the t
    transform t = r * sqrt((n-2) / (1-r^2)) with df = n - 2; |r| = 1
    reports p = 0.
    """
    xv = np.asarray(x, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    if xv.ndim != 1 or yv.ndim != 1 or len(xv) != len(yv):
        raise DataError("correlation inputs must be equal-length 1-d sequences")
    n = len(xv)
    if n < 3:
        raise DataError(f"need at least 3 observations, got {n}")
    if float(np.ptp(xv)) == 0.0 or float(np.ptp(yv)) == 0.0:
        raise DegenerateVarianceError("correlation undefined for constant input")
    xc = xv - xv.mean()
    yc = yv - yv.mean()
    r = float(xc @ yc / math.sqrt((xc @ xc) * (yc @ yc)))
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return r, student_t_two_tailed_p(t, n - 2)


@dataclass(frozen=True)
class RegressionRow:
    factor: str
    coefficient: float
    std_error: float
    p_value: float


@dataclass(frozen=True)
class RegressionTable:
    """OLS fit of per-word mean overlap on lexical factors.

    ``reference_levels`` names the category absorbed into the intercept
    for each dummy-coded factor family; ``dropped_constant`` lists
    covariates excluded because they never varied; ``dropped_words``
    counts record words without complete lexicon covariates.
    ``max_normal_eq`` is the largest absolute dot product between a
    design column and the residuals, a direct check that the
    least-squares normal equations were satisfied.
    """

    rows: tuple[RegressionRow, ...]
    dependent: str
    condition: str
    n_observations: int
    reference_levels: dict[str, str]
    dropped_constant: tuple[str, ...]
    dropped_words: int
    r_squared: float
    max_normal_eq: float


def _dummy_encode(labels: list[str], family: str):
    """Dummy columns for a categorical factor.

    The reference level (absorbed into the intercept) is the most
    frequent level, ties resolved alphabetically.  A factor with a
    single level contributes no columns.
    """
    counts = Counter(labels)
    ref = sorted(counts, key=lambda lv: (-counts[lv], lv))[0]
    names = []
    columns = []
    arr = np.array(labels)
    for level in sorted(counts):
        if level == ref:
            continue
        names.append(f"{family}:{level}")
        columns.append((arr == level).astype(np.float64))
    return names, columns, ref


def fit_lexical_model(
    records: dict[str, dict[str, float]],
    lexicon: AnnotatedLexicon,
    condition: str,
) -> RegressionTable:
    """Regress per-word mean overlap on comparison region and lexical factors.

    ``records`` maps each comparison-region label to a word -> mean
    overlap map; one observation enters per (region, word).  The design
    holds an intercept, dummy columns for region, semantic domain, and
    part of speech (most frequent level as reference), and the scalar
    covariates concreteness, age of acquisition, and frequency per
    million.  Covariates that never vary are dropped and reported.
    Coefficients, standard errors, and p-values come from classical OLS
    inference with df = n - k.

    Words lacking complete lexicon covariates (no entry, or no AoA
    rating) are dropped; if they exceed 10% of the record vocabulary
    the data is considered insufficient and a DataError is raised,
    as is a design matrix with fewer observations than columns.
    Linearly dependent columns raise CollinearDesignError naming them.
    """
    regions = sorted(records)
    if len(regions) < 2:
        raise DataError(
            f"need >= 2 comparison regions, got {len(regions)}: {regions}"
        )
    record_words = sorted({w for region in regions for w in records[region]})
    if not record_words:
        raise DataError("no overlap records supplied")
    usable = {}
    for word in record_words:
        entry = lexicon.entry(word)
        if entry is not None and entry.aoa is not None:
            usable[word] = entry
    dropped_words = len(record_words) - len(usable)
    if len(usable) < 0.9 * len(record_words):
        raise DataError(
            f"lexicon covariates cover only {len(usable)} of "
            f"{len(record_words)} record words (need 90%)"
        )

    y_vals = []
    region_labels = []
    domain_labels = []
    pos_labels = []
    conc_vals = []
    aoa_vals = []
    freq_vals = []
    for region in regions:
        for word in sorted(records[region]):
            entry = usable.get(word)
            if entry is None:
                continue
            y_vals.append(records[region][word])
            region_labels.append(region)
            domain_labels.append(entry.domain)
            pos_labels.append(entry.pos)
            conc_vals.append(entry.concreteness)
            aoa_vals.append(entry.aoa)
            freq_vals.append(entry.per_million)

    y = np.array(y_vals, dtype=np.float64)
    n = len(y)
    names = ["intercept"]
    columns = [np.ones(n, dtype=np.float64)]
    references: dict[str, str] = {}
    for family, labels in (
        ("region", region_labels),
        ("domain", domain_labels),
        ("pos", pos_labels),
    ):
        fam_names, fam_cols, ref = _dummy_encode(labels, family)
        references[family] = ref
        names.extend(fam_names)
        columns.extend(fam_cols)
    dropped_constant = []
    for name, vals in (
        ("concreteness", conc_vals),
        ("aoa", aoa_vals),
        ("per_million", freq_vals),
    ):
        col = np.array(vals, dtype=np.float64)
        if float(np.ptp(col)) == 0.0:
            dropped_constant.append(name)
        else:
            names.append(name)
            columns.append(col)

    k = len(columns)
    if n <= k:
        raise DataError(f"{n} observations cannot support {k} design columns")
    design = np.column_stack(columns)

    # Scale columns to unit max-abs for conditioning; coefficients and
    # standard errors are mapped back to the raw scale afterwards.
    scales = np.abs(design).max(axis=0)
    scales[scales == 0.0] = 1.0
    scaled = design / scales

    basis: list[np.ndarray] = []
    collinear = []
    for j in range(k):
        v = scaled[:, j].copy()
        for b in basis:
            v -= (v @ b) * b
        norm = float(np.linalg.norm(v))
        if norm <= 1e-8 * max(float(np.linalg.norm(scaled[:, j])), 1.0):
            collinear.append(names[j])
        else:
            basis.append(v / norm)
    if collinear:
        raise CollinearDesignError(collinear)

    beta_s, _, _, _ = np.linalg.lstsq(scaled, y, rcond=None)
    fitted = scaled @ beta_s
    resid = y - fitted
    rss = float(resid @ resid)
    dof = n - k
    sigma2 = rss / dof
    cov = np.linalg.inv(scaled.T @ scaled)
    se_s = np.sqrt(np.maximum(np.diag(cov), 0.0) * sigma2)

    beta = beta_s / scales
    se = se_s / scales
    rows = []
    for j, name in enumerate(names):
        if se_s[j] == 0.0:
            # Perfect fit: effects are either exact or exactly absent.
            p = 0.0 if abs(beta_s[j]) > 1e-12 else 1.0
        else:
            p = student_t_two_tailed_p(float(beta_s[j] / se_s[j]), dof)
        rows.append(
            RegressionRow(
                factor=name,
                coefficient=float(beta[j]),
                std_error=float(se[j]),
                p_value=p,
            )
        )

    tss = float(((y - y.mean()) ** 2).sum())
    r_squared = 1.0 - rss / tss if tss > 0.0 else 1.0
    return RegressionTable(
        rows=tuple(rows),
        dependent="mean_overlap",
        condition=condition,
        n_observations=n,
        reference_levels=references,
        dropped_constant=tuple(dropped_constant),
        dropped_words=dropped_words,
        r_squared=r_squared,
        max_normal_eq=float(np.abs(design.T @ resid).max()),
    )


def write_regression_csv(table: RegressionTable, path) -> None:
    """Export a regression table as CSV: factor, coefficient, p-value."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("factor,coefficient,p_value\n")
        for row in table.rows:
            fh.write(f"{row.factor},{row.coefficient:.6f},{row.p_value:.6g}\n")
