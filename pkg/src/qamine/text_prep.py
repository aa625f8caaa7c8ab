"""Question titles -> LDA documents: tokenize, stop words, guarded stemming.

Stemming is deliberately shallow: only the plural-reduction step of the
classic suffix-stripping algorithm is applied, and technology-specific
terms (by default the final tag set) are exempted entirely so that words
like "ios" keep their meaning instead of becoming "io".
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from sklearn.base import BaseEstimator, TransformerMixin

_TOKEN_RE = re.compile(r"\.?[a-z0-9][a-z0-9.#+]*")


def tokenize(title: str) -> list[str]:
    """Lowercase tokens; '.', '#', '+' survive only attached to a word.

    Keeps "xamarin.forms", "c#", "c++" and ".net" intact while plain
    punctuation splits: "async/await" -> ["async", "await"].
    """
    tokens = []
    for match in _TOKEN_RE.findall(title.lower()):
        token = match.rstrip(".")
        if token:
            tokens.append(token)
    return tokens


def load_wordlist(path: str | Path) -> frozenset[str]:
    """One lowercase word per line; blank lines and '#' comments ignored."""
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        word = line.split("#", 1)[0].strip().lower()
        if word:
            words.add(word)
    return frozenset(words)


_DEFAULT_STOPWORDS: frozenset[str] | None = None


def default_stopwords() -> frozenset[str]:
    """The stop-word list shipped with the package."""
    global _DEFAULT_STOPWORDS
    if _DEFAULT_STOPWORDS is None:
        text = resources.files("qamine.data").joinpath("stopwords.txt").read_text("utf-8")
        _DEFAULT_STOPWORDS = frozenset(
            word for word in (line.split("#", 1)[0].strip().lower() for line in text.splitlines()) if word
        )
    return _DEFAULT_STOPWORDS


def remove_stopwords(tokens: Sequence[str], stopwords: frozenset[str] | None = None) -> list[str]:
    """Order-preserving removal against the given (or bundled) stop list."""
    stopwords = default_stopwords() if stopwords is None else stopwords
    return [token for token in tokens if token not in stopwords]


def stem_plural(token: str) -> str:
    """Plural-reduction suffix rules: SSES->SS, IES->I, SS->SS, S->drop."""
    if token.endswith("sses"):
        return token[:-2]
    if token.endswith("ies"):
        return token[:-3] + "i"
    if token.endswith("ss"):
        return token
    if token.endswith("s"):
        return token[:-1]
    return token


def stem_custom(tokens: Sequence[str], protected: frozenset[str] | set[str]) -> list[str]:
    """Stem every token except protected technology terms (exact match)."""
    return [token if token in protected else stem_plural(token) for token in tokens]


@dataclass(frozen=True)
class Document:
    """Pre-processed token sequence for one question title."""

    question_id: str
    tokens: tuple[str, ...]


def preprocess_title(
    title: str,
    protected: frozenset[str] | set[str],
    stopwords: frozenset[str] | None = None,
) -> list[str]:
    tokens = remove_stopwords(tokenize(title), stopwords)
    return [token for token in stem_custom(tokens, protected) if token]


def build_documents(
    titled_questions: Iterable[tuple[str, str]],
    protected: frozenset[str] | set[str],
    stopwords: frozenset[str] | None = None,
) -> tuple[list[Document], list[str]]:
    """One Document per (question id, title) pair.

    Titles that come out empty cannot take part in topic training; their ids
    are returned separately so the exclusion is reported, never silent.
    """
    documents: list[Document] = []
    excluded: list[str] = []
    for qid, title in titled_questions:
        tokens = preprocess_title(title, protected, stopwords)
        if tokens:
            documents.append(Document(question_id=qid, tokens=tuple(tokens)))
        else:
            excluded.append(qid)
    return documents, excluded


class TitlePreprocessor(TransformerMixin, BaseEstimator):
    """Transformer from raw titles to token lists.

    Stateless apart from its configuration; fit() only resolves the word
    lists so the object can sit in an sklearn Pipeline ahead of a
    vectorizer or the Gibbs LDA estimator.
    """

    def __init__(
        self,
        stopwords: Iterable[str] | str | Path | None = None,
        protected: Iterable[str] | str | Path = (),
    ):
        self.stopwords = stopwords
        self.protected = protected

    def _resolve(self) -> tuple[frozenset[str], frozenset[str]]:
        if self.stopwords is None:
            stop = default_stopwords()
        elif isinstance(self.stopwords, (str, Path)):
            stop = load_wordlist(self.stopwords)
        else:
            stop = frozenset(w.lower() for w in self.stopwords)
        if isinstance(self.protected, (str, Path)):
            protected = load_wordlist(self.protected)
        else:
            protected = frozenset(w.lower() for w in self.protected)
        return stop, protected

    def fit(self, X=None, y=None) -> "TitlePreprocessor":
        self.stopwords_, self.protected_ = self._resolve()
        return self

    def transform(self, X: Iterable[str]) -> list[list[str]]:
        if not hasattr(self, "stopwords_"):
            self.fit()
        return [preprocess_title(title, self.protected_, self.stopwords_) for title in X]
