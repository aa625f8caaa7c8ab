"""Snowball tag selection and the keyword-title fallback.

Starting from every tag that contains a seed pattern, two ratios are
computed for each co-occurring tag:

* relevance (``trt``): of all questions carrying the tag, the fraction
  that also carry an initial-set tag. High relevance means the tag is
  specific to the target technology.
* significance (``tst``): the tag's in-domain question count divided by
  the in-domain count of the most popular tag. Low significance flags
  tags too rare to matter.

Tags passing both thresholds (inclusive) join the initial set to form the
final tag set; a keyword pass over question titles then catches questions
that discuss the technology without carrying any of its tags.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted


class TagFilterError(ValueError):
    """Filtering cannot proceed (e.g. the seed pattern matches nothing)."""


@dataclass(frozen=True)
class FilterConfig:
    initial_pattern: str = "xamarin"
    trt_min: float = 0.25
    tst_min: float = 0.001

    def __post_init__(self) -> None:
        if not self.initial_pattern:
            raise TagFilterError("initial_pattern must be non-empty")
        for name, value in (("trt_min", self.trt_min), ("tst_min", self.tst_min)):
            if not 0 < value <= 1:
                raise TagFilterError(f"{name} must be in (0, 1], got {value}")


@dataclass(frozen=True)
class TagStats:
    tag: str
    occ_all: int   # questions carrying the tag, whole corpus
    occ_dom: int   # questions carrying the tag and >=1 initial tag
    trt: float
    tst: float


class Provenance(str, Enum):
    TAG = "tag"
    KEYWORD = "keyword"


@dataclass(frozen=True)
class QuestionSet:
    """Selected question ids, partitioned by how they were matched."""

    tag_matched: tuple[str, ...]
    keyword_matched: tuple[str, ...]

    @property
    def ids(self) -> tuple[str, ...]:
        return self.tag_matched + self.keyword_matched

    def provenance(self) -> dict[str, Provenance]:
        out = {qid: Provenance.TAG for qid in self.tag_matched}
        out.update({qid: Provenance.KEYWORD for qid in self.keyword_matched})
        return out

    def counts(self) -> dict[str, int]:
        return {
            "tag_matched": len(self.tag_matched),
            "keyword_matched": len(self.keyword_matched),
            "total": len(self.tag_matched) + len(self.keyword_matched),
        }


@dataclass(frozen=True)
class FilterResult:
    initial_tags: tuple[str, ...]
    stats: tuple[TagStats, ...]
    final_tags: tuple[str, ...]
    question_set: QuestionSet


def expand_initial_tags(config: FilterConfig, all_tags: Iterable[str]) -> set[str]:
    """Every tag containing the seed pattern, case-insensitive substring."""
    pattern = config.initial_pattern.lower()
    matched = {tag for tag in all_tags if pattern in tag.lower()}
    if not matched:
        raise TagFilterError(
            f"no tag contains {config.initial_pattern!r}; nothing to snowball from"
        )
    return matched


def compute_tag_stats(
    questions: Iterable[tuple[str, Sequence[str]]], initial: set[str]
) -> list[TagStats]:
    """Relevance/significance for every tag co-occurring with the initial set.

    ``questions`` yields (question id, tags) pairs; answers never carry tags
    so only questions count. Output is sorted by in-domain occurrences
    descending, then tag name.
    """
    if not initial:
        raise TagFilterError("initial tag set is empty")
    occ_all: dict[str, int] = {}
    occ_dom: dict[str, int] = {}
    for _, tags in questions:
        in_domain = any(tag in initial for tag in tags)
        for tag in tags:
            occ_all[tag] = occ_all.get(tag, 0) + 1
            if in_domain:
                occ_dom[tag] = occ_dom.get(tag, 0) + 1
    if not occ_dom:
        return []
    max_dom = max(occ_dom.values())
    stats = [
        TagStats(
            tag=tag,
            occ_all=occ_all[tag],
            occ_dom=dom,
            trt=dom / occ_all[tag],
            tst=dom / max_dom,
        )
        for tag, dom in occ_dom.items()
    ]
    stats.sort(key=lambda s: (-s.occ_dom, s.tag))
    return stats


def select_final_tags(stats: Iterable[TagStats], config: FilterConfig) -> set[str]:
    """Initial tags plus every tag at or above both thresholds (inclusive)."""
    pattern = config.initial_pattern.lower()
    final = set()
    for entry in stats:
        if pattern in entry.tag.lower():
            final.add(entry.tag)
        elif entry.trt >= config.trt_min and entry.tst >= config.tst_min:
            final.add(entry.tag)
    return final


def keyword_pattern(tag: str) -> re.Pattern[str]:
    """Title pattern for one tag: '.' and '-' also match a space or nothing.

    "xamarin.forms" therefore matches "Xamarin Forms", "Xamarin.Forms" and
    "XamarinForms". Matching is case-insensitive substring (no word
    boundaries).
    """
    parts = []
    for char in tag:
        if char == ".":
            parts.append("[. ]?")
        elif char == "-":
            parts.append("[- ]?")
        else:
            parts.append(re.escape(char))
    return re.compile("".join(parts), re.IGNORECASE)


def filter_by_tags(
    questions: Iterable[tuple[str, Sequence[str]]], final: set[str]
) -> set[str]:
    """Ids of questions carrying at least one final-set tag."""
    return {qid for qid, tags in questions if any(tag in final for tag in tags)}


def filter_by_keywords(
    questions: Iterable[tuple[str, str]], final: set[str], already: set[str]
) -> set[str]:
    """Ids of not-yet-selected questions whose title matches a tag keyword."""
    if not final:
        raise TagFilterError("final tag set is empty")
    patterns = [keyword_pattern(tag) for tag in sorted(final)]
    out = set()
    for qid, title in questions:
        if qid in already:
            continue
        if any(pattern.search(title) for pattern in patterns):
            out.add(qid)
    return out


def build_question_set(
    questions: Sequence[tuple[str, str, Sequence[str]]], config: FilterConfig
) -> FilterResult:
    """Run the whole selection: expand, score, threshold, tag + keyword match.

    ``questions`` holds (id, title, tags) triples for the corpus. Both match
    partitions are disjoint by construction and their union is the result.
    """
    all_tags = {tag for _, _, tags in questions for tag in tags}
    initial = expand_initial_tags(config, all_tags)
    stats = compute_tag_stats(((qid, tags) for qid, _, tags in questions), initial)
    final = select_final_tags(stats, config)
    tag_ids = filter_by_tags(((qid, tags) for qid, _, tags in questions), final)
    keyword_ids = filter_by_keywords(
        ((qid, title) for qid, title, _ in questions), final, tag_ids
    )
    question_set = QuestionSet(
        tag_matched=tuple(sorted(tag_ids, key=_id_key)),
        keyword_matched=tuple(sorted(keyword_ids, key=_id_key)),
    )
    return FilterResult(
        initial_tags=tuple(sorted(initial)),
        stats=tuple(stats),
        final_tags=tuple(sorted(final)),
        question_set=question_set,
    )


def _id_key(raw_id: str) -> tuple[int, int, str]:
    if raw_id.isdigit():
        return (0, int(raw_id), "")
    return (1, 0, raw_id)


class TagSnowballSelector(BaseEstimator):
    """Estimator facade over the snowball selection.

    fit() takes (id, title, tags) triples and exposes the fitted tag
    statistics and question set; get_params/set_params make the thresholds
    grid-searchable alongside other pipeline steps.
    """

    def __init__(
        self,
        initial_pattern: str = "xamarin",
        trt_min: float = 0.25,
        tst_min: float = 0.001,
    ):
        self.initial_pattern = initial_pattern
        self.trt_min = trt_min
        self.tst_min = tst_min

    def fit(self, X: Sequence[tuple[str, str, Sequence[str]]], y=None) -> "TagSnowballSelector":
        config = FilterConfig(
            initial_pattern=self.initial_pattern,
            trt_min=self.trt_min,
            tst_min=self.tst_min,
        )
        result = build_question_set(list(X), config)
        self.initial_tags_ = result.initial_tags
        self.tag_stats_ = result.stats
        self.final_tags_ = result.final_tags
        self.question_set_ = result.question_set
        return self

    def predict(self, X: Sequence[tuple[str, str, Sequence[str]]]) -> list[bool]:
        """Membership of each question in the fitted selection."""
        check_is_fitted(self, "final_tags_")
        final = set(self.final_tags_)
        patterns = [keyword_pattern(tag) for tag in sorted(final)]
        out = []
        for _, title, tags in X:
            hit = any(tag in final for tag in tags) or any(
                pattern.search(title) for pattern in patterns
            )
            out.append(hit)
        return out
