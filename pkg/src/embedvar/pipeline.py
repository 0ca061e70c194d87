"""End-to-end experiment orchestration.

An experiment is described by a JSON config naming the condition
corpora, the annotation files, training hyperparameters, and seeds.
Running it produces a self-describing output tree:

    manifest.json             what was run, with what, and what exists
    lexicon.tsv               the joined evaluation lexicon
    vectors/<cond>_run<i>.vec one embedding space per (condition, run)
    overlaps/<pair>_k<k>.csv  per-word overlap for every scheduled pair
    stats/                    t-tests, credible intervals, regressions,
                              k-correlations (at the largest k)
    plots/                    histogram and quantile data per comparison
    skipped.csv               words excluded from any pair, with reasons
    report.md                 human-readable summary

Training runs are resumable: each completed run is recorded in the
manifest, and a rerun with an unchanged training configuration skips
straight to analysis (which always reruns; it is cheap and idempotent).
Shuffle seeds are master_seed + run_index while the training seed stays
fixed, so replica spaces differ only in the order lines reach the
optimizer.  With deterministic training the analysis outputs are
byte-identical across executions.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import shutil
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import concatenate, count_frequencies, load_corpus, shuffle
from .errors import ConfigError, DataError, DegenerateVarianceError
from .lexicon import join, load_labels, load_ratings, write_lexicon_tsv
from .overlap import (
    OverlapRecord,
    PairId,
    ranked_neighbor_lists,
    schedule_pairs,
    write_overlap_csv,
)
from .sgns import TrainConfig, load_vectors, save_vectors, train
from .stats import (
    bayes_mean_ci,
    fit_lexical_model,
    paired_t_test,
    pearson,
    write_regression_csv,
)

OUTPUT_ROOT_ENV = "EMBEDVAR_OUTPUT_ROOT"

_LABEL_RE = re.compile(r"^[A-Za-z0-9._-]+$")

_REQUIRED_LEXICON_SOURCES = ("concreteness", "pos", "domains")
_LEXICON_SOURCES = _REQUIRED_LEXICON_SOURCES + ("aoa",)

_CONFIG_KEYS = {
    "conditions",
    "runs_per_condition",
    "train",
    "k_values",
    "lexicon",
    "output",
    "master_seed",
    "histogram_bins",
    "threads",
}


@dataclass(frozen=True)
class LexiconSource:
    """Where one annotation lives and which columns to read."""

    path: str
    word_column: str = "word"
    value_column: str = "value"


@dataclass(frozen=True)
class ExperimentConfig:
    conditions: tuple[tuple[str, str], ...]
    train: TrainConfig
    lexicon: dict[str, LexiconSource]
    output_dir: str
    master_seed: int
    runs_per_condition: int = 5
    k_values: tuple[int, ...] = (5, 10, 25, 50)
    histogram_bins: int = 50
    threads: int = 1

    def __post_init__(self) -> None:
        if not self.conditions:
            raise ConfigError("at least one condition is required")
        labels = [label for label, _ in self.conditions]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"condition labels must be unique: {labels}")
        for label in labels:
            if not _LABEL_RE.match(label):
                raise ConfigError(
                    f"condition label {label!r} may only use letters, digits, "
                    "dot, dash, underscore"
                )
        if self.runs_per_condition < 2:
            raise ConfigError("runs_per_condition must be >= 2")
        if not self.k_values or any(k < 1 for k in self.k_values):
            raise ConfigError("k_values must be a non-empty list of positive ints")
        object.__setattr__(self, "k_values", tuple(sorted(set(self.k_values))))
        missing = [s for s in _REQUIRED_LEXICON_SOURCES if s not in self.lexicon]
        if missing:
            raise ConfigError(f"lexicon config lacks source(s): {', '.join(missing)}")
        unknown = sorted(set(self.lexicon) - set(_LEXICON_SOURCES))
        if unknown:
            raise ConfigError(f"unknown lexicon source(s): {', '.join(unknown)}")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be >= 0")
        if self.histogram_bins < 1:
            raise ConfigError("histogram_bins must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    def to_dict(self) -> dict:
        return {
            "conditions": [
                {"label": label, "corpus": path} for label, path in self.conditions
            ],
            "runs_per_condition": self.runs_per_condition,
            "train": self.train.to_dict(),
            "k_values": list(self.k_values),
            "lexicon": {
                name: {
                    "path": src.path,
                    "word_column": src.word_column,
                    "value_column": src.value_column,
                }
                for name, src in sorted(self.lexicon.items())
            },
            "output": self.output_dir,
            "master_seed": self.master_seed,
            "histogram_bins": self.histogram_bins,
            "threads": self.threads,
        }

    def train_hash(self) -> str:
        """Fingerprint of everything that determines the trained vectors."""
        payload = {
            "conditions": [[label, path] for label, path in self.conditions],
            "runs_per_condition": self.runs_per_condition,
            "train": self.train.to_dict(),
            "master_seed": self.master_seed,
        }
        blob = json.dumps(payload, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        """Parse a JSON experiment config.

        Relative paths inside the file resolve against the file's own
        directory; a relative output directory resolves against the
        EMBEDVAR_OUTPUT_ROOT environment variable when set.
        """
        path = Path(path)
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        unknown = sorted(set(raw) - _CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"{path}: unknown config key(s): {', '.join(unknown)}")
        base = path.resolve().parent

        def resolve(p: str) -> str:
            q = Path(p)
            return str(q if q.is_absolute() else base / q)

        try:
            conditions = tuple(
                (entry["label"], resolve(entry["corpus"]))
                for entry in raw["conditions"]
            )
            lexicon = {}
            for name, entry in raw["lexicon"].items():
                lexicon[name] = LexiconSource(
                    path=resolve(entry["path"]),
                    word_column=entry.get("word_column", "word"),
                    value_column=entry.get("value_column", "value"),
                )
            out_raw = raw.get("output", "results")
            out_path = Path(out_raw)
            if not out_path.is_absolute():
                root = os.environ.get(OUTPUT_ROOT_ENV)
                out_path = (Path(root) if root else base) / out_path
            return cls(
                conditions=conditions,
                train=TrainConfig.from_dict(raw.get("train", {})),
                lexicon=lexicon,
                output_dir=str(out_path),
                master_seed=int(raw.get("master_seed", 1)),
                runs_per_condition=int(raw.get("runs_per_condition", 5)),
                k_values=tuple(raw.get("k_values", (5, 10, 25, 50))),
                histogram_bins=int(raw.get("histogram_bins", 50)),
                threads=int(raw.get("threads", 1)),
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"{path}: malformed config ({exc!r})") from None


def _save_manifest(out: Path, data: dict) -> None:
    tmp = out / "manifest.json.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, out / "manifest.json")


def _load_manifest(out: Path) -> dict | None:
    path = out / "manifest.json"
    if not path.exists():
        return None
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (json.JSONDecodeError, OSError):
        return None


def _fresh_manifest(config: ExperimentConfig) -> dict:
    return {
        "format": 1,
        "version": __version__,
        "config": config.to_dict(),
        "train_hash": config.train_hash(),
        "failed_stage": None,
        "lexicon": {},
        "runs": {},
        "analysis": {"complete": False, "outputs": [], "regression": {}},
        "files": [],
    }


def _comparisons(labels: list[str]) -> list[tuple[str, str]]:
    return [
        (labels[i], labels[j])
        for i in range(len(labels))
        for j in range(i, len(labels))
    ]


def _comparison_label(cond_a: str, cond_b: str) -> str:
    return f"{cond_a}_vs_{cond_b}"


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def run_experiment(config: ExperimentConfig) -> Path:
    """Run shuffle -> train -> overlap -> stats -> report.

    Returns the output directory.  On failure the manifest records the
    stage that broke and the original exception propagates; inputs and
    completed outputs are left in place, and a rerun resumes after the
    last completed training run.
    """
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = _fresh_manifest(config)
    previous = _load_manifest(out)
    if previous and previous.get("train_hash") == manifest["train_hash"]:
        manifest["runs"] = previous.get("runs", {})
    elif previous is not None:
        # The vectors on disk were made by a different configuration.
        shutil.rmtree(out / "vectors", ignore_errors=True)

    stage = "setup"
    try:
        corpora = {}
        for label, corpus_path in config.conditions:
            corpora[label] = load_corpus(corpus_path, label=label)
        lexicon, source_warnings = _load_lexicon(config, list(corpora.values()))
        write_lexicon_tsv(lexicon, out / "lexicon.tsv")
        manifest["lexicon"] = {
            "size": len(lexicon),
            "duplicate_warnings": source_warnings,
        }
        _save_manifest(out, manifest)

        stage = "training"
        vectors_dir = out / "vectors"
        vectors_dir.mkdir(exist_ok=True)
        vector_files = {}
        for label, _ in config.conditions:
            for run in range(config.runs_per_condition):
                key = f"{label}:{run}"
                rel = f"vectors/{label}_run{run}.vec"
                vector_files[(label, run)] = out / rel
                entry = manifest["runs"].get(key)
                if entry and entry.get("complete") and (out / rel).exists():
                    continue
                started = time.monotonic()
                shuffle_seed = config.master_seed + run
                shuffled = shuffle(corpora[label], shuffle_seed)
                space = train(shuffled, config.train, threads=config.threads)
                save_vectors(space, out / rel)
                manifest["runs"][key] = {
                    "condition": label,
                    "run_index": run,
                    "shuffle_seed": shuffle_seed,
                    "train_seed": config.train.seed,
                    "vectors": rel,
                    "wall_time_s": round(time.monotonic() - started, 3),
                    "complete": True,
                }
                _save_manifest(out, manifest)

        stage = "analysis"
        started = time.monotonic()
        loaded = {key: load_vectors(path) for key, path in vector_files.items()}
        outputs = _analyze(out, config, lexicon, loaded, manifest)
        manifest["analysis"]["complete"] = True
        manifest["analysis"]["outputs"] = sorted(outputs)
        manifest["analysis"]["wall_time_s"] = round(time.monotonic() - started, 3)
        files = set(outputs)
        files.update(entry["vectors"] for entry in manifest["runs"].values())
        files.update({"lexicon.tsv", "manifest.json"})
        manifest["files"] = sorted(files)
        _save_manifest(out, manifest)

        stage = "report"
        emit_report(out)
        manifest["files"] = sorted(set(manifest["files"]) | {"report.md"})
        _save_manifest(out, manifest)
    except Exception:
        manifest["failed_stage"] = stage
        _save_manifest(out, manifest)
        raise
    return out


def _load_lexicon(config: ExperimentConfig, corpora):
    frequency = count_frequencies(concatenate(corpora, label="all-conditions"))
    warnings = {}

    def ratings(name):
        src = config.lexicon[name]
        table, dups = load_ratings(src.path, src.word_column, src.value_column)
        warnings[name] = dups
        return table

    def labels(name):
        src = config.lexicon[name]
        table, dups = load_labels(src.path, src.word_column, src.value_column)
        warnings[name] = dups
        return table

    concreteness = ratings("concreteness")
    aoa = ratings("aoa") if "aoa" in config.lexicon else {}
    pos = labels("pos")
    domains = labels("domains")
    return join(concreteness, aoa, pos, domains, frequency), warnings


def _analyze(out, config, lexicon, loaded, manifest) -> list[str]:
    """Compute overlaps and statistics; returns written relative paths."""
    for sub in ("overlaps", "stats", "plots"):
        shutil.rmtree(out / sub, ignore_errors=True)
        (out / sub).mkdir()

    labels = [label for label, _ in config.conditions]
    runs = config.runs_per_condition
    k_values = list(config.k_values)
    k_max = k_values[-1]
    words = list(lexicon.words)
    written: list[str] = []

    by_pair_k: dict[tuple[str, int], list[OverlapRecord]] = {}
    by_comp_k: dict[tuple[str, int], list[OverlapRecord]] = {}
    word_values: dict[str, dict[str, dict[str, float]]] = {}
    skipped: list[tuple[str, str, str]] = []

    for cond_a, cond_b in _comparisons(labels):
        comp = _comparison_label(cond_a, cond_b)
        word_values[comp] = {}
        schedule = schedule_pairs(runs, cond_a, cond_b)
        for pair in schedule.pairs:
            space_a = loaded[(pair.condition_a, pair.run_a)]
            space_b = loaded[(pair.condition_b, pair.run_b)]
            pool = sorted(set(space_a.words) & set(space_b.words))
            lists_a = ranked_neighbor_lists(space_a, words, pool, k_max)
            lists_b = ranked_neighbor_lists(space_b, words, pool, k_max)
            pair_values = {}
            for w in words:
                nn_a, nn_b = lists_a[w], lists_b[w]
                if nn_a is None or nn_b is None:
                    skipped.append(
                        (w, str(pair), "absent from shared vocabulary or degenerate")
                    )
                    continue
                for k in k_values:
                    value = len(set(nn_a[:k]) & set(nn_b[:k])) / k
                    record = OverlapRecord(
                        word=w,
                        pair_id=pair,
                        condition_type=pair.condition_type,
                        k=k,
                        overlap=value,
                    )
                    by_pair_k.setdefault((str(pair), k), []).append(record)
                    by_comp_k.setdefault((comp, k), []).append(record)
                    if k == k_max:
                        pair_values[w] = value
            word_values[comp][str(pair)] = pair_values

        for pair in schedule.pairs:
            for k in k_values:
                rel = f"overlaps/{pair}_k{k}.csv"
                write_overlap_csv(by_pair_k.get((str(pair), k), []), out / rel)
                written.append(rel)

    comps = [_comparison_label(a, b) for a, b in _comparisons(labels)]
    written += _write_intervals(out, comps, by_comp_k, k_max)
    written += _write_ttests(out, config, labels, word_values, k_max)
    written += _write_k_correlations(out, comps, by_comp_k, k_values)
    written += _write_regressions(out, config, labels, lexicon, word_values, k_max, manifest)
    written += _write_distributions(out, comps, by_comp_k, k_values, config.histogram_bins)

    rel = "skipped.csv"
    with open(out / rel, "w", encoding="utf-8") as fh:
        fh.write("word,pair,reason\n")
        for word, pair_str, reason in skipped:
            fh.write(f"{word},{pair_str},{reason}\n")
    written.append(rel)
    return written


def _write_intervals(out, comps, by_comp_k, k_max) -> list[str]:
    """Credible interval for mean overlap per comparison, percent scale."""
    rel = f"stats/intervals_k{k_max}.csv"
    with open(out / rel, "w", encoding="utf-8") as fh:
        fh.write("comparison,condition_type,n,mean_pct,lo_pct,hi_pct,level,note\n")
        for comp in comps:
            records = by_comp_k.get((comp, k_max), [])
            ctype = records[0].condition_type if records else "unknown"
            values = [r.overlap * 100.0 for r in records]
            if not values:
                fh.write(f"{comp},{ctype},0,NA,NA,NA,0.95,no records\n")
                continue
            mean = float(np.mean(values))
            try:
                ci = bayes_mean_ci(values, level=0.95)
                fh.write(
                    f"{comp},{ctype},{len(values)},{_fmt(mean)},"
                    f"{_fmt(ci.lo)},{_fmt(ci.hi)},0.95,\n"
                )
            except (DegenerateVarianceError, DataError):
                fh.write(
                    f"{comp},{ctype},{len(values)},{_fmt(mean)},NA,NA,0.95,"
                    "zero variance\n"
                )
    return [rel]


def _write_ttests(out, config, labels, word_values, k_max) -> list[str]:
    """Paired t-tests: first within pair vs first between pair, per word.

    One row per (between comparison, within condition).  Mirrors a
    protocol that draws a single pair from each distribution; here the
    drawn pair is pinned to the schedule's first for reproducibility.
    """
    runs = config.runs_per_condition
    rel = f"stats/ttests_k{k_max}.csv"
    with open(out / rel, "w", encoding="utf-8") as fh:
        fh.write(
            "comparison,within_condition,within_pair,between_pair,"
            "n,t,df,p_two_tailed,mean_diff_pct,note\n"
        )
        for i in range(len(labels)):
            for j in range(i + 1, len(labels)):
                cond_a, cond_b = labels[i], labels[j]
                comp = _comparison_label(cond_a, cond_b)
                between_pair = schedule_pairs(runs, cond_a, cond_b).pairs[0]
                y_map = word_values[comp][str(between_pair)]
                for within_cond in (cond_a, cond_b):
                    within_comp = _comparison_label(within_cond, within_cond)
                    within_pair = schedule_pairs(
                        runs, within_cond, within_cond
                    ).pairs[0]
                    x_map = word_values[within_comp][str(within_pair)]
                    common = sorted(set(x_map) & set(y_map))
                    prefix = (
                        f"{comp},{within_cond},{within_pair},{between_pair},"
                        f"{len(common)}"
                    )
                    if len(common) < 2:
                        fh.write(f"{prefix},NA,NA,NA,NA,too few words\n")
                        continue
                    x = [x_map[w] for w in common]
                    y = [y_map[w] for w in common]
                    try:
                        res = paired_t_test(x, y)
                    except DegenerateVarianceError:
                        fh.write(f"{prefix},NA,NA,NA,NA,zero variance\n")
                        continue
                    fh.write(
                        f"{prefix},{_fmt(res.t)},{res.df},{res.p_two_tailed:.6g},"
                        f"{_fmt(res.mean_diff * 100.0)},\n"
                    )
    return [rel]


def _write_k_correlations(out, comps, by_comp_k, k_values) -> list[str]:
    """Pearson r between per-(word, pair) overlaps at each k and the largest."""
    k_max = k_values[-1]
    rel = "stats/k_correlation.csv"
    with open(out / rel, "w", encoding="utf-8") as fh:
        fh.write("comparison,k_a,k_b,n,r,p,note\n")
        for comp in comps:
            high = [r.overlap for r in by_comp_k.get((comp, k_max), [])]
            for k in k_values[:-1]:
                low = [r.overlap for r in by_comp_k.get((comp, k), [])]
                if len(low) != len(high) or len(low) < 3:
                    fh.write(f"{comp},{k},{k_max},{len(low)},NA,NA,too few records\n")
                    continue
                try:
                    r, p = pearson(low, high)
                except DegenerateVarianceError:
                    fh.write(f"{comp},{k},{k_max},{len(low)},NA,NA,zero variance\n")
                    continue
                fh.write(f"{comp},{k},{k_max},{len(low)},{_fmt(r)},{p:.6g},\n")
    return [rel]


def _write_regressions(out, config, labels, lexicon, word_values, k_max, manifest) -> list[str]:
    """Per-condition lexical-factor regressions on mean overlap (percent)."""
    written = []
    for cond in labels:
        regions = {}
        for comp, pairs in word_values.items():
            parts = comp.split("_vs_")
            if cond not in parts:
                continue
            totals: dict[str, list[float]] = {}
            for pair_map in pairs.values():
                for w, v in pair_map.items():
                    totals.setdefault(w, []).append(v)
            regions[comp] = {
                w: 100.0 * sum(vs) / len(vs) for w, vs in totals.items()
            }
        meta_entry = manifest["analysis"]["regression"]
        if len(regions) < 2:
            meta_entry[cond] = {
                "skipped": f"only {len(regions)} comparison region(s); need 2"
            }
            continue
        table = fit_lexical_model(regions, lexicon, condition=cond)
        rel = f"stats/regression_{cond}_k{k_max}.csv"
        write_regression_csv(table, out / rel)
        meta_rel = f"stats/regression_{cond}_k{k_max}_meta.json"
        with open(out / meta_rel, "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "condition": cond,
                    "k": k_max,
                    "dependent": "per-word mean overlap, percent",
                    "regions": sorted(regions),
                    "n_observations": table.n_observations,
                    "reference_levels": table.reference_levels,
                    "dropped_constant": list(table.dropped_constant),
                    "dropped_words": table.dropped_words,
                    "r_squared": table.r_squared,
                    "max_normal_eq": table.max_normal_eq,
                },
                fh,
                indent=2,
            )
            fh.write("\n")
        meta_entry[cond] = {"file": rel, "skipped": None}
        written += [rel, meta_rel]
    return written


def _write_distributions(out, comps, by_comp_k, k_values, bins) -> list[str]:
    """Histogram counts and quantile grids of overlap values, per comparison and k."""
    written = []
    quantiles = np.linspace(0.0, 1.0, 101)
    for comp in comps:
        for k in k_values:
            values = np.array(
                [r.overlap for r in by_comp_k.get((comp, k), [])], dtype=np.float64
            )
            rel = f"plots/hist_{comp}_k{k}.csv"
            counts, edges = np.histogram(values, bins=bins, range=(0.0, 1.0))
            with open(out / rel, "w", encoding="utf-8") as fh:
                fh.write("bin_lo,bin_hi,count\n")
                for b in range(bins):
                    fh.write(f"{edges[b]:.6f},{edges[b + 1]:.6f},{counts[b]}\n")
            written.append(rel)
            if len(values) == 0:
                continue
            rel = f"plots/violin_{comp}_k{k}.csv"
            qvals = np.quantile(values, quantiles)
            with open(out / rel, "w", encoding="utf-8") as fh:
                fh.write("quantile,value\n")
                for q, v in zip(quantiles, qvals):
                    fh.write(f"{q:.2f},{v:.6f}\n")
            written.append(rel)
    return written


@dataclass(frozen=True)
class ReportStatus:
    path: Path
    complete: bool
    missing: tuple[str, ...]


def _read_csv_rows(path: Path) -> list[dict[str, str]]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        rows = []
        for line in fh:
            parts = line.rstrip("\n").split(",")
            rows.append(dict(zip(header, parts)))
    return rows


def emit_report(output_dir) -> ReportStatus:
    """Render report.md from the analysis files in an output directory.

    The report renders with whatever is present; completeness (reflected
    in the returned status) requires a manifest whose analysis finished,
    no recorded failed stage, and every analysis output on disk.  Vector
    files are not required; an analysis-only directory is complete.
    """
    out = Path(output_dir)
    if not out.is_dir():
        raise DataError(f"output directory {out} does not exist")
    manifest = _load_manifest(out)
    notes = []
    missing: list[str] = []
    if manifest is None:
        complete = False
        notes.append("manifest.json is missing or unreadable")
    else:
        expected = list(manifest.get("analysis", {}).get("outputs", []))
        expected.append("lexicon.tsv")
        missing = sorted(f for f in expected if not (out / f).exists())
        lost_vectors = [
            entry["vectors"]
            for entry in manifest.get("runs", {}).values()
            if not (out / entry["vectors"]).exists()
        ]
        if lost_vectors:
            notes.append(
                f"{len(lost_vectors)} vector file(s) no longer present "
                "(analysis outputs are unaffected)"
            )
        if manifest.get("failed_stage"):
            notes.append(f"a previous run failed during: {manifest['failed_stage']}")
        complete = (
            not missing
            and manifest.get("failed_stage") is None
            and manifest.get("analysis", {}).get("complete", False)
        )

    lines = ["# Embedding variation report", ""]
    interval_files = sorted(out.glob("stats/intervals_k*.csv"))
    conditions: list[str] = []
    if manifest:
        conditions = [c["label"] for c in manifest["config"].get("conditions", [])]

    for path in interval_files:
        rows = _read_csv_rows(path)
        k_tag = path.stem.split("_k")[-1]
        if not conditions:
            seen = []
            for row in rows:
                for part in row["comparison"].split("_vs_"):
                    if part not in seen:
                        seen.append(part)
            conditions = seen
        mean_of = {row["comparison"]: row for row in rows}
        lines.append(f"## Mean overlap matrix (percent, k={k_tag})")
        lines.append("")
        lines.append("| | " + " | ".join(conditions) + " |")
        lines.append("|---" * (len(conditions) + 1) + "|")
        for a in conditions:
            cells = []
            for b in conditions:
                row = mean_of.get(_comparison_label(a, b)) or mean_of.get(
                    _comparison_label(b, a)
                )
                cells.append(row["mean_pct"] if row else "NA")
            lines.append("| " + a + " | " + " | ".join(cells) + " |")
        lines.append("")
        lines.append("## Credible intervals (95%, percent)")
        lines.append("")
        for row in rows:
            if row["lo_pct"] == "NA":
                lines.append(
                    f"- {row['comparison']} ({row['condition_type']}): "
                    f"mean {row['mean_pct']} (interval unavailable: {row['note']})"
                )
            else:
                lines.append(
                    f"- {row['comparison']} ({row['condition_type']}): "
                    f"mean {row['mean_pct']} in [{row['lo_pct']}, {row['hi_pct']}], "
                    f"n={row['n']}"
                )
        lines.append("")
    if not interval_files:
        lines += ["No interval statistics found.", ""]

    ttest_files = sorted(out.glob("stats/ttests_k*.csv"))
    for path in ttest_files:
        lines.append("## Paired t-tests (first within pair vs first between pair)")
        lines.append("")
        for row in _read_csv_rows(path):
            if row["t"] == "NA":
                lines.append(
                    f"- {row['comparison']} vs within {row['within_condition']}: "
                    f"unavailable ({row['note']})"
                )
            else:
                lines.append(
                    f"- {row['comparison']} vs within {row['within_condition']}: "
                    f"t={row['t']}, df={row['df']}, p={row['p_two_tailed']}, "
                    f"mean diff {row['mean_diff_pct']} points (n={row['n']})"
                )
        lines.append("")

    regression_files = sorted(out.glob("stats/regression_*_k*.csv"))
    if regression_files:
        lines.append("## Regression factors significant at p < 0.01")
        lines.append("")
        for path in regression_files:
            cond = path.stem[len("regression_"):].rsplit("_k", 1)[0]
            significant = [
                row
                for row in _read_csv_rows(path)
                if row["factor"] != "intercept" and float(row["p_value"]) < 0.01
            ]
            if significant:
                for row in significant:
                    lines.append(
                        f"- {cond}: {row['factor']} coefficient {row['coefficient']} "
                        f"(p={row['p_value']})"
                    )
            else:
                lines.append(f"- {cond}: none")
        lines.append("")

    corr_path = out / "stats" / "k_correlation.csv"
    if corr_path.exists():
        lines.append("## Overlap agreement across k")
        lines.append("")
        for row in _read_csv_rows(corr_path):
            if row["r"] == "NA":
                lines.append(
                    f"- {row['comparison']} k={row['k_a']} vs k={row['k_b']}: "
                    f"unavailable ({row['note']})"
                )
            else:
                lines.append(
                    f"- {row['comparison']} k={row['k_a']} vs k={row['k_b']}: "
                    f"r={row['r']} (p={row['p']})"
                )
        lines.append("")

    skipped_path = out / "skipped.csv"
    if skipped_path.exists():
        n_skipped = len(_read_csv_rows(skipped_path))
        lines.append(f"Skipped (word, pair) measurements: {n_skipped} (see skipped.csv)")
        lines.append("")

    plot_files = sorted(p.name for p in (out / "plots").glob("*.csv")) if (out / "plots").exists() else []
    if plot_files:
        lines.append(
            f"Distribution data for plotting: {len(plot_files)} file(s) under plots/ "
            "(hist_* = histogram counts, violin_* = quantile grids)"
        )
        lines.append("")

    if missing:
        lines.append("## Missing artifacts")
        lines.append("")
        for f in missing:
            lines.append(f"- {f}")
        lines.append("")
    if notes:
        lines.append("## Notes")
        lines.append("")
        for n in notes:
            lines.append(f"- {n}")
        lines.append("")

    report_path = out / "report.md"
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines).rstrip() + "\n")
    return ReportStatus(path=report_path, complete=complete, missing=tuple(missing))
