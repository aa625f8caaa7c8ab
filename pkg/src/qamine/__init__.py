"""qamine: build technology-specific Q&A corpora and mine their topics.

Submodules import lazily so that light-weight consumers (e.g. the
streaming dump parser) do not pay for numpy/numba at import time.
"""

from __future__ import annotations

__version__ = "0.1.0"

_EXPORTS = {
    "CorpusStore": "store",
    "CorpusStats": "store",
    "IngestSummary": "store",
    "PostRecord": "records",
    "ForumRecord": "records",
    "CommentRecord": "records",
    "UserRecord": "records",
    "Source": "records",
    "PostKind": "records",
    "FilterConfig": "tag_filter",
    "TagSnowballSelector": "tag_filter",
    "build_question_set": "tag_filter",
    "Document": "text_prep",
    "TitlePreprocessor": "text_prep",
    "build_documents": "text_prep",
    "GibbsLda": "lda",
    "LdaConfig": "lda",
    "TopicModel": "lda",
    "TopicSummary": "lda",
    "train": "lda",
}


def __getattr__(name: str):
    module_name = _EXPORTS.get(name)
    if module_name is None:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
    import importlib

    module = importlib.import_module(f".{module_name}", __name__)
    value = getattr(module, name)
    globals()[name] = value
    return value


def __dir__():
    return sorted(set(globals()) | set(_EXPORTS))
