"""Shared fixtures: small corpora, a trained space, and the lexicon fixture."""

import random
from pathlib import Path

import numpy as np
import pytest

from embedvar.corpus import Corpus
from embedvar.lexicon import join, load_labels, load_ratings
from embedvar.sgns import LoadedVectors, TrainConfig, train

DATA_DIR = Path(__file__).resolve().parent / "data"
LEX200_DIR = DATA_DIR / "lexicon200"


def make_clustered_corpus(seed, n_lines, label="toy", n_clusters=6, cluster_size=5):
    """Corpus with co-occurrence clusters, built with stdlib RNG only.

    Words are grouped into clusters; each line samples mostly from one
    cluster with a 20% chance per token of drawing globally, so trained
    spaces get real neighbor structure without package-side randomness.
    """
    rng = random.Random(seed)
    vocab = [f"w{c}{i}x" for c in range(n_clusters) for i in range(cluster_size)]
    clusters = [vocab[c * cluster_size : (c + 1) * cluster_size] for c in range(n_clusters)]
    lines = []
    for _ in range(n_lines):
        home = rng.randrange(n_clusters)
        length = rng.randint(8, 14)
        line = []
        for _ in range(length):
            pool = vocab if rng.random() < 0.2 else clusters[home]
            line.append(rng.choice(pool))
        lines.append(tuple(line))
    return Corpus.from_lines(lines, label=label)


def make_loaded_vectors(n_words, dim, seed, prefix="v"):
    """Random dense vectors packaged like a parsed vector file."""
    rng = np.random.default_rng(seed)
    words = tuple(f"{prefix}{i:04d}" for i in range(n_words))
    matrix = rng.normal(size=(n_words, dim)).astype(np.float64)
    matrix.setflags(write=False)
    return LoadedVectors(
        words=words,
        matrix=matrix,
        index={w: i for i, w in enumerate(words)},
        duplicate_count=0,
    )


@pytest.fixture(scope="session")
def tiny_corpus():
    return make_clustered_corpus(seed=5, n_lines=400)


@pytest.fixture(scope="session")
def tiny_config():
    return TrainConfig(
        dim=16,
        negatives=3,
        epochs=2,
        learning_rate=0.05,
        ngram_min=3,
        ngram_max=4,
        bucket_count=1000,
        window=2,
        min_count=1,
        seed=11,
        subsample_threshold=0.0,
        deterministic=True,
    )


@pytest.fixture(scope="session")
def tiny_space(tiny_corpus, tiny_config):
    return train(tiny_corpus, tiny_config)


@pytest.fixture(scope="session")
def lex200_sources():
    conc, conc_dups = load_ratings(LEX200_DIR / "concreteness.tsv", "word", "value")
    aoa, aoa_dups = load_ratings(LEX200_DIR / "aoa.tsv", "word", "value")
    pos, pos_dups = load_labels(LEX200_DIR / "pos.tsv", "word", "label")
    dom, dom_dups = load_labels(LEX200_DIR / "domains.tsv", "word", "label")
    return {
        "concreteness": (conc, conc_dups),
        "aoa": (aoa, aoa_dups),
        "pos": (pos, pos_dups),
        "domains": (dom, dom_dups),
    }


@pytest.fixture(scope="session")
def lexicon200(lex200_sources):
    return join(
        lex200_sources["concreteness"][0],
        lex200_sources["aoa"][0],
        lex200_sources["pos"][0],
        lex200_sources["domains"][0],
    )
