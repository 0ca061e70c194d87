"""Measure how much embedding spaces differ beyond training noise.

The toolkit trains subword skip-gram embeddings on shuffled replicas of
text corpora, measures per-word nearest-neighbor overlap between the
resulting spaces over an annotated lexicon, and tests whether
between-corpus variation exceeds the within-corpus instability
baseline.  See the individual modules for the pieces: corpus handling,
training, lexicon joining, overlap measurement, statistics, synthetic
fixtures, and the experiment pipeline.
"""

__version__ = "0.1.0"

from .corpus import (
    Corpus,
    FrequencyTable,
    concatenate,
    count_frequencies,
    load_corpus,
    shuffle,
    tokenize,
)
from .errors import (
    CollinearDesignError,
    ConfigError,
    DataError,
    DegenerateVarianceError,
    DegenerateVectorError,
    EmbedvarError,
    EmptyVocabError,
    EncodingError,
    JoinError,
    MissingSpaceError,
    ParseError,
    PoolError,
    ScheduleError,
    SchemaError,
    TrainingDivergenceError,
)
from .lexicon import (
    AnnotatedLexicon,
    LexiconEntry,
    join,
    load_labels,
    load_ratings,
    summarize,
    write_lexicon_tsv,
)
from .overlap import (
    OverlapQuery,
    OverlapRecord,
    PairId,
    PairSchedule,
    compare_conditions,
    nearest_neighbors,
    overlap,
    schedule_pairs,
    write_overlap_csv,
)
from .pipeline import (
    ExperimentConfig,
    LexiconSource,
    ReportStatus,
    emit_report,
    run_experiment,
)
from .sgns import (
    EmbeddingSpace,
    LoadedVectors,
    TrainConfig,
    Vocab,
    build_vocab,
    char_ngrams,
    hash_ngram,
    load_vectors,
    pair_gradients,
    pair_loss,
    save_vectors,
    train,
    word_vector,
)
from .stats import (
    CredibleInterval,
    RegressionTable,
    TTestResult,
    bayes_mean_ci,
    fit_lexical_model,
    paired_t_test,
    pearson,
    regularized_incomplete_beta,
    student_t_cdf,
    student_t_ppf,
)
from .synth import (
    emit_synthetic_experiment,
    generate_synthetic_dialects,
    write_synthetic_annotations,
)

__all__ = [
    "__version__",
    "AnnotatedLexicon",
    "CollinearDesignError",
    "ConfigError",
    "Corpus",
    "CredibleInterval",
    "DataError",
    "DegenerateVarianceError",
    "DegenerateVectorError",
    "EmbeddingSpace",
    "EmbedvarError",
    "EmptyVocabError",
    "EncodingError",
    "ExperimentConfig",
    "FrequencyTable",
    "JoinError",
    "LexiconEntry",
    "LexiconSource",
    "LoadedVectors",
    "MissingSpaceError",
    "OverlapQuery",
    "OverlapRecord",
    "PairId",
    "PairSchedule",
    "ParseError",
    "PoolError",
    "RegressionTable",
    "ReportStatus",
    "ScheduleError",
    "SchemaError",
    "TTestResult",
    "TrainConfig",
    "TrainingDivergenceError",
    "Vocab",
    "bayes_mean_ci",
    "build_vocab",
    "char_ngrams",
    "compare_conditions",
    "concatenate",
    "count_frequencies",
    "emit_report",
    "emit_synthetic_experiment",
    "fit_lexical_model",
    "generate_synthetic_dialects",
    "hash_ngram",
    "join",
    "load_corpus",
    "load_labels",
    "load_ratings",
    "load_vectors",
    "nearest_neighbors",
    "overlap",
    "pair_gradients",
    "pair_loss",
    "paired_t_test",
    "pearson",
    "regularized_incomplete_beta",
    "run_experiment",
    "save_vectors",
    "schedule_pairs",
    "shuffle",
    "student_t_cdf",
    "student_t_ppf",
    "summarize",
    "tokenize",
    "train",
    "word_vector",
    "write_lexicon_tsv",
    "write_overlap_csv",
    "write_synthetic_annotations",
]
