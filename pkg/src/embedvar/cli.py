"""Command-line interface.

Subcommands cover the individual stages (train, shuffle, overlap,
stats), the full pipeline (run), the synthetic fixture generator
(synth), and report rendering (report).  Exit codes: 0 on success, 1
for usage problems, 2 for data problems, 3 for anything unexpected.
When the EMBEDVAR_OUTPUT_ROOT environment variable is set, relative
output paths are created beneath it.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .corpus import load_corpus, shuffle
from .errors import ConfigError, DataError, EmbedvarError
from .overlap import PairId, OverlapRecord, ranked_neighbor_lists, write_overlap_csv
from .pipeline import (
    OUTPUT_ROOT_ENV,
    ExperimentConfig,
    emit_report,
    run_experiment,
)
from .sgns import TrainConfig, load_vectors, save_vectors, train
from .stats import bayes_mean_ci, paired_t_test
from .synth import emit_synthetic_experiment, write_corpus_text

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; remap to 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _resolve_output(path: str) -> Path:
    p = Path(path)
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root and not p.is_absolute():
        return Path(root) / p
    return p


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    d = TrainConfig()
    parser.add_argument("--dim", type=int, default=d.dim)
    parser.add_argument("--negatives", type=int, default=d.negatives)
    parser.add_argument("--epochs", type=int, default=d.epochs)
    parser.add_argument("--learning-rate", type=float, default=d.learning_rate)
    parser.add_argument("--ngram-min", type=int, default=d.ngram_min)
    parser.add_argument("--ngram-max", type=int, default=d.ngram_max)
    parser.add_argument("--buckets", type=int, default=d.bucket_count)
    parser.add_argument("--window", type=int, default=d.window)
    parser.add_argument("--min-count", type=int, default=d.min_count)
    parser.add_argument("--seed", type=int, default=d.seed)
    parser.add_argument("--subsample", type=float, default=d.subsample_threshold)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument(
        "--parallel",
        action="store_true",
        help="allow lock-free multithreaded updates (forfeits bit reproducibility)",
    )


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        dim=args.dim,
        negatives=args.negatives,
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        ngram_min=args.ngram_min,
        ngram_max=args.ngram_max,
        bucket_count=args.buckets,
        window=args.window,
        min_count=args.min_count,
        seed=args.seed,
        subsample_threshold=args.subsample,
        deterministic=not args.parallel,
    )


def _cmd_train(args) -> int:
    corpus = load_corpus(args.corpus, label=args.label or Path(args.corpus).stem)
    if args.shuffle_seed is not None:
        corpus = shuffle(corpus, args.shuffle_seed)
    space = train(corpus, _train_config(args), threads=args.threads)
    out = _resolve_output(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_vectors(space, out)
    print(
        f"trained {len(space.vocab)} words x dim {space.dim} "
        f"(final epoch loss {space.epoch_losses[-1]:.4f}) -> {out}"
    )
    return EXIT_OK


def _cmd_shuffle(args) -> int:
    corpus = load_corpus(args.corpus, label=Path(args.corpus).stem)
    shuffled = shuffle(corpus, args.seed)
    out = _resolve_output(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_corpus_text(shuffled, out)
    print(f"shuffled {len(shuffled.lines)} lines with seed {args.seed} -> {out}")
    return EXIT_OK


def _cmd_overlap(args) -> int:
    space_a = load_vectors(args.vectors_a)
    space_b = load_vectors(args.vectors_b)
    pool = sorted(set(space_a.words) & set(space_b.words))
    if args.words:
        with open(args.words, "r", encoding="utf-8") as fh:
            words = [line.strip() for line in fh if line.strip()]
    else:
        words = pool
    lists_a = ranked_neighbor_lists(space_a, words, pool, args.k)
    lists_b = ranked_neighbor_lists(space_b, words, pool, args.k)
    label_a = Path(args.vectors_a).stem.replace(",", "_")
    label_b = Path(args.vectors_b).stem.replace(",", "_")
    pair = PairId(label_a, 0, label_b, 0)
    records = []
    skipped = 0
    for w in words:
        if lists_a[w] is None or lists_b[w] is None:
            skipped += 1
            continue
        records.append(
            OverlapRecord(
                word=w,
                pair_id=pair,
                condition_type=pair.condition_type,
                k=args.k,
                overlap=len(set(lists_a[w]) & set(lists_b[w])) / args.k,
            )
        )
    out = _resolve_output(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_overlap_csv(records, out)
    mean = sum(r.overlap for r in records) / len(records) if records else float("nan")
    print(
        f"{len(records)} words compared (skipped {skipped}), "
        f"mean overlap@{args.k} = {mean:.4f} -> {out}"
    )
    return EXIT_OK


def _read_records_csv(path):
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        expected = "word,cond_a,run_a,cond_b,run_b,condition_type,k,overlap".split(",")
        if header != expected:
            raise DataError(f"{path}: not an overlap CSV (header {header})")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            rows.append(
                {
                    "word": parts[0],
                    "cond_a": parts[1],
                    "run_a": int(parts[2]),
                    "cond_b": parts[3],
                    "run_b": int(parts[4]),
                    "k": int(parts[6]),
                    "overlap": float(parts[7]),
                }
            )
    return rows


def _cmd_stats(args) -> int:
    rows = []
    for path in args.records:
        rows.extend(_read_records_csv(path))
    if not rows:
        raise DataError("no overlap records in the given file(s)")
    out = _resolve_output(args.output)
    out.mkdir(parents=True, exist_ok=True)

    groups: dict[tuple[str, int], list[dict]] = {}
    for row in rows:
        groups.setdefault((f"{row['cond_a']}_vs_{row['cond_b']}", row["k"]), []).append(row)

    with open(out / "intervals.csv", "w", encoding="utf-8") as fh:
        fh.write("comparison,k,n,mean_pct,lo_pct,hi_pct,level,note\n")
        for (comp, k), members in sorted(groups.items()):
            values = [m["overlap"] * 100.0 for m in members]
            mean = sum(values) / len(values)
            try:
                ci = bayes_mean_ci(values, level=args.level)
                fh.write(
                    f"{comp},{k},{len(values)},{mean:.6f},{ci.lo:.6f},"
                    f"{ci.hi:.6f},{args.level},\n"
                )
            except (DataError, EmbedvarError):
                fh.write(f"{comp},{k},{len(values)},{mean:.6f},NA,NA,{args.level},degenerate\n")

    def first_pair(members):
        key = min((m["run_a"], m["run_b"]) for m in members)
        return {
            m["word"]: m["overlap"]
            for m in members
            if (m["run_a"], m["run_b"]) == key
        }, key

    with open(out / "ttests.csv", "w", encoding="utf-8") as fh:
        fh.write("comparison,k,within_condition,n,t,df,p_two_tailed,mean_diff_pct,note\n")
        for (comp, k), members in sorted(groups.items()):
            cond_a, cond_b = comp.split("_vs_")
            if cond_a == cond_b:
                continue
            y_map, _ = first_pair(members)
            for cond in (cond_a, cond_b):
                within = groups.get((f"{cond}_vs_{cond}", k))
                if not within:
                    fh.write(f"{comp},{k},{cond},0,NA,NA,NA,NA,no within records\n")
                    continue
                x_map, _ = first_pair(within)
                common = sorted(set(x_map) & set(y_map))
                if len(common) < 2:
                    fh.write(f"{comp},{k},{cond},{len(common)},NA,NA,NA,NA,too few words\n")
                    continue
                try:
                    res = paired_t_test(
                        [x_map[w] for w in common], [y_map[w] for w in common]
                    )
                except EmbedvarError:
                    fh.write(f"{comp},{k},{cond},{len(common)},NA,NA,NA,NA,degenerate\n")
                    continue
                fh.write(
                    f"{comp},{k},{cond},{len(common)},{res.t:.6f},{res.df},"
                    f"{res.p_two_tailed:.6g},{res.mean_diff * 100.0:.6f},\n"
                )
    print(f"wrote {out / 'intervals.csv'} and {out / 'ttests.csv'}")
    return EXIT_OK


def _cmd_run(args) -> int:
    config = ExperimentConfig.from_file(args.config)
    out = run_experiment(config)
    status = emit_report(out)
    print(f"experiment complete -> {out}")
    print(f"report: {status.path}")
    return EXIT_OK if status.complete else EXIT_DATA


def _cmd_synth(args) -> int:
    out = _resolve_output(args.output)
    config_path = emit_synthetic_experiment(
        out,
        base_vocab_size=args.vocab,
        tokens=args.tokens,
        divergence_rate=args.divergence,
        seed=args.seed,
        lexicon_size=args.lexicon_size,
        runs_per_condition=args.runs,
        collocate_classes=args.classes,
        master_seed=args.master_seed,
    )
    print(f"synthetic experiment ready: {config_path}")
    return EXIT_OK


def _cmd_report(args) -> int:
    status = emit_report(args.dir)
    print(f"report: {status.path}")
    if status.missing:
        print("missing artifacts:")
        for f in status.missing:
            print(f"  - {f}")
    return EXIT_OK if status.complete else EXIT_DATA


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="embedvar",
        description="Train embedding replicas and measure neighbor-overlap variation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[], help="train one embedding space")
    p.add_argument("--corpus", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--label", default=None)
    p.add_argument("--shuffle-seed", type=int, default=None)
    _add_train_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("shuffle", help="write a seeded line shuffle of a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_shuffle)

    p = sub.add_parser("overlap", help="per-word neighbor overlap of two vector files")
    p.add_argument("--vectors-a", required=True)
    p.add_argument("--vectors-b", required=True)
    p.add_argument("--k", type=int, default=50)
    p.add_argument("--words", default=None, help="file with one query word per line")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_overlap)

    p = sub.add_parser("stats", help="intervals and t-tests from overlap CSVs")
    p.add_argument("--records", action="append", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--level", type=float, default=0.95)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("run", help="run a full experiment from a config file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("synth", help="generate a synthetic two-dialect experiment")
    p.add_argument("--output", required=True)
    p.add_argument("--vocab", type=int, default=2000)
    p.add_argument("--tokens", type=int, default=1_000_000)
    p.add_argument("--divergence", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=97)
    p.add_argument("--lexicon-size", type=int, default=300)
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--classes", type=int, default=40)
    p.add_argument("--master-seed", type=int, default=None)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("report", help="render report.md for an output directory")
    p.add_argument("--dir", required=True)
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"embedvar: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"embedvar: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"embedvar: cannot access {exc.filename or 'file'}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_DATA
    except EmbedvarError as exc:
        print(f"embedvar: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # anything unplanned is an internal error
        print(f"embedvar: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
