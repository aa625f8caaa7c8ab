"""Latent Dirichlet allocation trained by collapsed Gibbs sampling.

The sampler integrates out the topic-word and document-topic distributions
and resamples one topic assignment per token per sweep, for a fixed number
of sweeps (no convergence test). Point estimates come from the final
state:

    phi[k, w]   = (n_kw + beta)  / (n_k + V * beta)
    theta[d, k] = (n_dk + alpha) / (n_d + K * alpha)

Training is sequential and fully determined by (documents, config): the
seed drives both the initial assignments and every sweep's draws through a
single PCG64 stream, so equal inputs give bit-identical models.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from ._gibbs import sweep_compiled
from .text_prep import Document

MODEL_FORMAT = "qamine-topic-model"
MODEL_FORMAT_VERSION = 1


class ModelError(ValueError):
    """Invalid training input or a corrupt serialized model."""


@dataclass(frozen=True)
class LdaConfig:
    """Sampler configuration; the defaults are the reference run.

    ``alpha=None`` resolves to 1/num_topics (0.025 at the default 40
    topics). ``min_count`` prunes rare words from the vocabulary and is off
    by default.
    """

    num_topics: int = 40
    alpha: float | None = None
    beta: float = 0.1
    iterations: int = 1000
    seed: int = 0
    min_count: int = 1

    def __post_init__(self) -> None:
        if self.num_topics < 1:
            raise ModelError(f"num_topics must be >= 1, got {self.num_topics}")
        if self.alpha is not None and self.alpha <= 0:
            raise ModelError(f"alpha must be positive, got {self.alpha}")
        if self.beta <= 0:
            raise ModelError(f"beta must be positive, got {self.beta}")
        if self.iterations < 1:
            raise ModelError(f"iterations must be >= 1, got {self.iterations}")
        if self.min_count < 1:
            raise ModelError(f"min_count must be >= 1, got {self.min_count}")
        if self.alpha is None:
            # resolve the 1/K convention eagerly so configs round-trip
            object.__setattr__(self, "alpha", 1.0 / self.num_topics)

    def as_dict(self) -> dict:
        return {
            "num_topics": self.num_topics,
            "alpha": self.alpha,
            "beta": self.beta,
            "iterations": self.iterations,
            "seed": self.seed,
            "min_count": self.min_count,
        }


@dataclass
class TopicModel:
    """Trained sampler state.

    Token streams are flattened: ``token_doc[i]``/``token_word[i]``/``z[i]``
    give document index, vocabulary index and topic of token i.
    """

    config: LdaConfig
    vocabulary: tuple[str, ...]
    doc_ids: tuple[str, ...]
    doc_lengths: np.ndarray    # (D,) int32
    token_doc: np.ndarray      # (N,) int32
    token_word: np.ndarray     # (N,) int32
    z: np.ndarray              # (N,) int32
    n_dk: np.ndarray           # (D, K) int32
    n_kw: np.ndarray           # (K, V) int32
    n_k: np.ndarray            # (K,) int32

    @property
    def num_documents(self) -> int:
        return len(self.doc_ids)

    @property
    def num_topics(self) -> int:
        return self.config.num_topics

    @property
    def vocab_size(self) -> int:
        return len(self.vocabulary)


@dataclass(frozen=True)
class TopicSummary:
    """Top words for one topic plus how many documents it dominates."""

    topic_id: int
    top_words: tuple[tuple[str, float], ...]
    nddt: int
    label: str | None = None


def _counts_from_assignments(
    token_doc: np.ndarray,
    token_word: np.ndarray,
    z: np.ndarray,
    num_docs: int,
    num_topics: int,
    vocab_size: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n_dk = np.bincount(
        token_doc.astype(np.int64) * num_topics + z, minlength=num_docs * num_topics
    ).reshape(num_docs, num_topics).astype(np.int32)
    n_kw = np.bincount(
        z.astype(np.int64) * vocab_size + token_word, minlength=num_topics * vocab_size
    ).reshape(num_topics, vocab_size).astype(np.int32)
    n_k = np.bincount(z, minlength=num_topics).astype(np.int32)
    return n_dk, n_kw, n_k


def verify_counts(model: TopicModel) -> None:
    """Debug verifier: count tables must be consistent with the assignments.

    Raises ModelError on any mismatch; cheap enough to run after every
    sweep when requested.
    """
    n_dk, n_kw, n_k = _counts_from_assignments(
        model.token_doc,
        model.token_word,
        model.z,
        model.num_documents,
        model.num_topics,
        model.vocab_size,
    )
    if not np.array_equal(n_dk, model.n_dk):
        raise ModelError("document-topic counts inconsistent with assignments")
    if not np.array_equal(n_kw, model.n_kw):
        raise ModelError("topic-word counts inconsistent with assignments")
    if not np.array_equal(n_k, model.n_k):
        raise ModelError("topic totals inconsistent with assignments")
    if model.n_kw.sum(axis=1).tolist() != model.n_k.tolist():
        raise ModelError("topic-word marginals do not match topic totals")
    if model.n_dk.sum(axis=1).tolist() != model.doc_lengths.tolist():
        raise ModelError("document-topic marginals do not match document lengths")
    if int(model.n_k.sum()) != len(model.z):
        raise ModelError("topic totals do not sum to the token count")


def train(
    documents: Sequence[Document] | Sequence[Sequence[str]],
    config: LdaConfig,
    check_every: int = 0,
    sweep_fn: Callable | None = None,
) -> TopicModel:
    """Run the sampler for exactly ``config.iterations`` full sweeps.

    ``check_every`` > 0 re-derives the count tables from the assignments
    every that-many sweeps and fails loudly on drift. ``sweep_fn`` swaps in
    an alternative kernel (the uncompiled reference, in tests).
    """
    docs = _as_documents(documents)
    if not docs:
        raise ModelError("cannot train on an empty corpus")
    for doc in docs:
        if not doc.tokens:
            raise ModelError(f"document {doc.question_id!r} has no tokens")

    counts: dict[str, int] = {}
    for doc in docs:
        for token in doc.tokens:
            counts[token] = counts.get(token, 0) + 1
    vocabulary = tuple(sorted(w for w, c in counts.items() if c >= config.min_count))
    if not vocabulary:
        raise ModelError(f"vocabulary is empty at min_count={config.min_count}")
    word_index = {word: i for i, word in enumerate(vocabulary)}

    token_doc: list[int] = []
    token_word: list[int] = []
    doc_lengths: list[int] = []
    for d, doc in enumerate(docs):
        kept = [word_index[t] for t in doc.tokens if t in word_index]
        if not kept:
            raise ModelError(
                f"document {doc.question_id!r} lost all tokens at "
                f"min_count={config.min_count}"
            )
        token_doc.extend([d] * len(kept))
        token_word.extend(kept)
        doc_lengths.append(len(kept))

    token_doc_arr = np.asarray(token_doc, dtype=np.int32)
    token_word_arr = np.asarray(token_word, dtype=np.int32)
    n_tokens = len(token_doc_arr)
    num_topics = config.num_topics
    if num_topics > n_tokens:
        warnings.warn(
            f"num_topics={num_topics} exceeds the corpus size of {n_tokens} tokens; "
            "most topics will stay empty",
            stacklevel=2,
        )

    rng = np.random.default_rng(config.seed)
    z = rng.integers(0, num_topics, size=n_tokens, dtype=np.int32)
    n_dk, n_kw, n_k = _counts_from_assignments(
        token_doc_arr, token_word_arr, z, len(docs), num_topics, len(vocabulary)
    )
    model = TopicModel(
        config=config,
        vocabulary=vocabulary,
        doc_ids=tuple(doc.question_id for doc in docs),
        doc_lengths=np.asarray(doc_lengths, dtype=np.int32),
        token_doc=token_doc_arr,
        token_word=token_word_arr,
        z=z,
        n_dk=n_dk,
        n_kw=n_kw,
        n_k=n_k,
    )

    sweep = sweep_fn if sweep_fn is not None else sweep_compiled
    alpha = config.alpha
    cum = np.empty(num_topics, dtype=np.float64)
    for sweep_index in range(config.iterations):
        u = rng.random(n_tokens)
        sweep(token_doc_arr, token_word_arr, z, n_dk, n_kw, n_k, alpha, config.beta, u, cum)
        if check_every and (sweep_index + 1) % check_every == 0:
            verify_counts(model)
    return model


def _as_documents(documents: Sequence) -> list[Document]:
    docs = []
    for i, doc in enumerate(documents):
        if isinstance(doc, Document):
            docs.append(doc)
        else:
            docs.append(Document(question_id=str(i), tokens=tuple(doc)))
    return docs


def phi(model: TopicModel) -> np.ndarray:
    """Topic-word probabilities, one distribution per row."""
    beta = model.config.beta
    denom = model.n_k.astype(np.float64) + model.vocab_size * beta
    return (model.n_kw.astype(np.float64) + beta) / denom[:, None]


def theta(model: TopicModel) -> np.ndarray:
    """Document-topic probabilities, one distribution per row."""
    alpha = model.config.alpha
    denom = model.doc_lengths.astype(np.float64) + model.num_topics * alpha
    return (model.n_dk.astype(np.float64) + alpha) / denom[:, None]


def dominant_topics(model: TopicModel) -> np.ndarray:
    """Per-document argmax over theta; ties resolve to the lowest topic id."""
    return np.argmax(theta(model), axis=1)


def dominant_topic(model: TopicModel, doc_index: int) -> int:
    return int(np.argmax(theta(model)[doc_index]))


def nddt(model: TopicModel) -> np.ndarray:
    """Number of documents per topic for which that topic is dominant."""
    return np.bincount(dominant_topics(model), minlength=model.num_topics)


def summarize(
    model: TopicModel,
    top_n: int = 20,
    labels: dict[int, str] | None = None,
) -> list[TopicSummary]:
    """Per-topic top words with probabilities, ordered by decreasing NDDT.

    Within a topic, words sort by descending probability, ties broken
    lexicographically; topics with equal NDDT sort by id.
    """
    probabilities = phi(model)
    doc_counts = nddt(model)
    summaries = []
    for k in range(model.num_topics):
        ranked = sorted(
            zip(model.vocabulary, probabilities[k].tolist()),
            key=lambda pair: (-pair[1], pair[0]),
        )[:top_n]
        summaries.append(
            TopicSummary(
                topic_id=k,
                top_words=tuple((word, prob) for word, prob in ranked),
                nddt=int(doc_counts[k]),
                label=labels.get(k) if labels else None,
            )
        )
    summaries.sort(key=lambda s: (-s.nddt, s.topic_id))
    return summaries


# -- serialization -----------------------------------------------------


def save_model(model: TopicModel, path: str | Path) -> None:
    """Write the versioned text serialization (config, vocab, counts, z)."""
    payload = {
        "format": MODEL_FORMAT,
        "format_version": MODEL_FORMAT_VERSION,
        "config": model.config.as_dict(),
        "vocabulary": list(model.vocabulary),
        "doc_ids": list(model.doc_ids),
        "doc_lengths": model.doc_lengths.tolist(),
        "token_word": model.token_word.tolist(),
        "assignments": model.z.tolist(),
        "n_dk": model.n_dk.tolist(),
        "n_kw": model.n_kw.tolist(),
        "n_k": model.n_k.tolist(),
    }
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, separators=(",", ":")), encoding="utf-8"
    )


def load_model(path: str | Path) -> TopicModel:
    """Load a serialized model and re-check its count invariants."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != MODEL_FORMAT:
        raise ModelError(f"{path}: not a topic model file")
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise ModelError(
            f"{path}: unsupported model format version {payload.get('format_version')}"
        )
    cfg = payload["config"]
    config = LdaConfig(
        num_topics=cfg["num_topics"],
        alpha=cfg["alpha"],
        beta=cfg["beta"],
        iterations=cfg["iterations"],
        seed=cfg["seed"],
        min_count=cfg.get("min_count", 1),
    )
    doc_lengths = np.asarray(payload["doc_lengths"], dtype=np.int32)
    token_doc = np.repeat(
        np.arange(len(doc_lengths), dtype=np.int32), doc_lengths
    ).astype(np.int32)
    model = TopicModel(
        config=config,
        vocabulary=tuple(payload["vocabulary"]),
        doc_ids=tuple(payload["doc_ids"]),
        doc_lengths=doc_lengths,
        token_doc=token_doc,
        token_word=np.asarray(payload["token_word"], dtype=np.int32),
        z=np.asarray(payload["assignments"], dtype=np.int32),
        n_dk=np.asarray(payload["n_dk"], dtype=np.int32),
        n_kw=np.asarray(payload["n_kw"], dtype=np.int32),
        n_k=np.asarray(payload["n_k"], dtype=np.int32),
    )
    verify_counts(model)
    return model


# -- estimator ---------------------------------------------------------


class GibbsLda(ClusterMixin, BaseEstimator):
    """sklearn-style estimator around the collapsed Gibbs sampler.

    fit() accepts token lists (or Documents) and exposes the usual fitted
    attributes; labels_ holds each document's dominant topic, which is what
    fit_predict() returns.
    """

    def __init__(
        self,
        n_topics: int = 40,
        alpha: float | None = None,
        beta: float = 0.1,
        iterations: int = 1000,
        seed: int = 0,
        min_count: int = 1,
        check_every: int = 0,
    ):
        self.n_topics = n_topics
        self.alpha = alpha
        self.beta = beta
        self.iterations = iterations
        self.seed = seed
        self.min_count = min_count
        self.check_every = check_every

    def fit(self, X: Sequence, y=None) -> "GibbsLda":
        config = LdaConfig(
            num_topics=self.n_topics,
            alpha=self.alpha,
            beta=self.beta,
            iterations=self.iterations,
            seed=self.seed,
            min_count=self.min_count,
        )
        self.model_ = train(X, config, check_every=self.check_every)
        self.vocabulary_ = self.model_.vocabulary
        self.phi_ = phi(self.model_)
        self.theta_ = theta(self.model_)
        self.labels_ = dominant_topics(self.model_)
        self.nddt_ = nddt(self.model_)
        return self

    def summaries(self, top_n: int = 20) -> list[TopicSummary]:
        check_is_fitted(self, "model_")
        return summarize(self.model_, top_n=top_n)
