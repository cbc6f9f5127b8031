"""Latent Dirichlet allocation by collapsed Gibbs sampling.

Fitting runs seeded, sequential Gibbs sweeps over the corpus; inference
folds a new document in against the frozen topic-word counts and returns a
smoothed topic distribution. Relevance between two documents is the cosine
of their topic vectors.

Everything is deterministic for a fixed seed: fitting twice on the same
corpus yields byte-identical models, and inferring the same document twice
yields bit-identical vectors (the fold-in RNG is derived from the model
seed and the document's token ids).
"""
from __future__ import annotations

import json
import re
import zlib
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .errors import DataError, FitError

_TOKEN_RE = re.compile(r"[a-z0-9]+")

MODEL_FORMAT = "absaug-lda"
MODEL_VERSION = 1

DEFAULT_K = 10
DEFAULT_ALPHA = 0.1
DEFAULT_BETA = 0.01
DEFAULT_ITERATIONS = 200
DEFAULT_FOLD_IN_ITERATIONS = 50


@lru_cache(maxsize=1)
def builtin_stopwords() -> frozenset[str]:
    text = resources.files("absaug").joinpath("data/stopwords.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


def tokenize(text: str, stopwords: frozenset[str] | None = None) -> list[str]:
    """Lowercase, split on non-alphanumeric runs, drop short tokens and stopwords."""
    sw = builtin_stopwords() if stopwords is None else stopwords
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= 2 and t not in sw]


@dataclass
class LdaModel:
    """Frozen state of a fitted sampler: vocabulary plus topic-word counts."""

    k: int
    alpha: float
    beta: float
    vocab: dict[str, int]
    topic_word_counts: np.ndarray  # (k, V) int64
    topic_totals: np.ndarray       # (k,)  int64
    seed: int

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)


def _validate_params(k: int, alpha: float, beta: float, iterations: int) -> None:
    if k < 2:
        raise ValueError("k must be >= 2")
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be > 0")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")


def _draw(weights: np.ndarray, rng: np.random.Generator) -> int:
    cum = np.cumsum(weights)
    idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    return min(idx, len(weights) - 1)


def fit(
    corpus: Sequence[str],
    k: int = DEFAULT_K,
    alpha: float = DEFAULT_ALPHA,
    beta: float = DEFAULT_BETA,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
    stopwords: frozenset[str] | None = None,
) -> LdaModel:
    """Fit by collapsed Gibbs sampling.

    Token topics start from seeded uniform assignments, then every token is
    re-sampled from the standard collapsed conditional for ``iterations``
    full sweeps. Sequential by construction: parallel sweeps would break
    determinism.
    """
    _validate_params(k, alpha, beta, iterations)
    if len(corpus) == 0:
        raise FitError("cannot fit on an empty corpus")
    docs_tokens = [tokenize(doc, stopwords) for doc in corpus]
    vocab_terms = sorted({t for toks in docs_tokens for t in toks})
    if not vocab_terms:
        raise FitError("corpus has no usable tokens after tokenization")
    vocab = {t: i for i, t in enumerate(vocab_terms)}
    v_size = len(vocab)
    doc_ids = [np.array([vocab[t] for t in toks], dtype=np.int64) for toks in docs_tokens]

    rng = np.random.Generator(np.random.PCG64(seed))
    topic_word = np.zeros((k, v_size), dtype=np.int64)
    topic_totals = np.zeros(k, dtype=np.int64)
    doc_topic = np.zeros((len(doc_ids), k), dtype=np.int64)
    assignments: list[np.ndarray] = []
    for d, ids in enumerate(doc_ids):
        zd = rng.integers(0, k, size=len(ids))
        assignments.append(zd)
        np.add.at(topic_word, (zd, ids), 1)
        doc_topic[d] = np.bincount(zd, minlength=k)
        topic_totals += doc_topic[d]

    beta_sum = v_size * beta
    for _ in range(iterations):
        for d, ids in enumerate(doc_ids):
            zd = assignments[d]
            dt = doc_topic[d]
            for i in range(len(ids)):
                v = ids[i]
                old = zd[i]
                dt[old] -= 1
                topic_word[old, v] -= 1
                topic_totals[old] -= 1
                weights = (dt + alpha) * (topic_word[:, v] + beta) / (topic_totals + beta_sum)
                new = _draw(weights, rng)
                zd[i] = new
                dt[new] += 1
                topic_word[new, v] += 1
                topic_totals[new] += 1

    return LdaModel(
        k=k,
        alpha=alpha,
        beta=beta,
        vocab=vocab,
        topic_word_counts=topic_word,
        topic_totals=topic_totals,
        seed=seed,
    )


def infer(
    model: LdaModel,
    doc: str,
    fold_in_iterations: int = DEFAULT_FOLD_IN_ITERATIONS,
    stopwords: frozenset[str] | None = None,
) -> np.ndarray:
    """Topic distribution of one document under a fitted model.

    Fold-in Gibbs: the document's token topics are re-sampled against the
    frozen topic-word counts, after which the smoothed document-topic
    proportions are normalized into a distribution. Out-of-vocabulary
    tokens are ignored; a document with no in-vocabulary tokens gets the
    uniform vector.
    """
    ids = np.array(
        [model.vocab[t] for t in tokenize(doc, stopwords) if t in model.vocab],
        dtype=np.int64,
    )
    if len(ids) == 0:
        return np.full(model.k, 1.0 / model.k)
    # Per-document RNG: deterministic per (model, document), decorrelated
    # across documents.
    doc_crc = zlib.crc32(ids.tobytes())
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([model.seed, doc_crc])))

    k = model.k
    beta_sum = model.vocab_size * model.beta
    # Frozen across sweeps, so the word factor is a constant matrix.
    word_factor = (model.topic_word_counts[:, ids] + model.beta) / (
        model.topic_totals + beta_sum
    )[:, None]

    zd = rng.integers(0, k, size=len(ids))
    dt = np.bincount(zd, minlength=k)
    for _ in range(fold_in_iterations):
        for i in range(len(ids)):
            old = zd[i]
            dt[old] -= 1
            weights = (dt + model.alpha) * word_factor[:, i]
            new = _draw(weights, rng)
            zd[i] = new
            dt[new] += 1

    theta = (dt + model.alpha) / (len(ids) + k * model.alpha)
    return theta / theta.sum()


def relevance(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two topic vectors; 1.0 iff they are parallel.

    Smoothed topic vectors are strictly positive, so the value lies in
    (0, 1]; clipped at 1.0 against float round-off.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"topic vectors differ in length: {a.shape} vs {b.shape}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    assert norm_a > 0 and norm_b > 0, "topic vectors must be non-zero"
    return min(float(np.dot(a, b)) / (norm_a * norm_b), 1.0)


def model_to_dict(model: LdaModel) -> dict:
    terms = [""] * model.vocab_size
    for term, idx in model.vocab.items():
        terms[idx] = term
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "k": model.k,
        "alpha": model.alpha,
        "beta": model.beta,
        "seed": model.seed,
        "vocab": terms,
        "topic_word_counts": model.topic_word_counts.tolist(),
        "topic_totals": model.topic_totals.tolist(),
    }


def model_from_dict(obj: dict) -> LdaModel:
    if obj.get("format") != MODEL_FORMAT:
        raise DataError(f"not a topic model file (format {obj.get('format')!r})")
    if obj.get("version") != MODEL_VERSION:
        raise DataError(f"unsupported topic model version {obj.get('version')!r}")
    return LdaModel(
        k=obj["k"],
        alpha=obj["alpha"],
        beta=obj["beta"],
        vocab={t: i for i, t in enumerate(obj["vocab"])},
        topic_word_counts=np.array(obj["topic_word_counts"], dtype=np.int64),
        topic_totals=np.array(obj["topic_totals"], dtype=np.int64),
        seed=obj["seed"],
    )


def save_model(model: LdaModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model)), encoding="utf-8")


def load_model(path: str | Path) -> LdaModel:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


class GibbsLda(BaseEstimator, TransformerMixin):
    """Estimator wrapper: fit on raw documents, transform to topic vectors.

    Parameters mirror :func:`fit` / :func:`infer`; ``transform`` returns an
    (n_documents, n_topics) array of smoothed topic distributions.
    """

    def __init__(
        self,
        n_topics: int = DEFAULT_K,
        alpha: float = DEFAULT_ALPHA,
        beta: float = DEFAULT_BETA,
        iterations: int = DEFAULT_ITERATIONS,
        fold_in_iterations: int = DEFAULT_FOLD_IN_ITERATIONS,
        seed: int = 0,
        stopwords: frozenset[str] | None = None,
    ) -> None:
        self.n_topics = n_topics
        self.alpha = alpha
        self.beta = beta
        self.iterations = iterations
        self.fold_in_iterations = fold_in_iterations
        self.seed = seed
        self.stopwords = stopwords

    def fit(self, X: Iterable[str], y=None) -> "GibbsLda":
        self.model_ = fit(
            list(X),
            k=self.n_topics,
            alpha=self.alpha,
            beta=self.beta,
            iterations=self.iterations,
            seed=self.seed,
            stopwords=self.stopwords,
        )
        return self

    def transform(self, X: Iterable[str]) -> np.ndarray:
        if not hasattr(self, "model_"):
            raise NotFittedError("GibbsLda must be fitted before transform")
        rows = [
            infer(self.model_, doc, self.fold_in_iterations, stopwords=self.stopwords)
            for doc in X
        ]
        return np.vstack(rows) if rows else np.empty((0, self.n_topics))
