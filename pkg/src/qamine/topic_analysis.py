"""Labeling support, cross-source topic matching, relevant-question drill-down.

Topic matching is computer-assisted, not automatic: the matcher proposes
candidates (label equality first, then top-word overlap) and an analyst
records accept/reject verdicts in a decisions CSV that the summary
operation consumes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .lda import TopicModel, TopicSummary, dominant_topics
from .records import PostRecord
from .store import CorpusStore


class LabelError(ValueError):
    """A label file refers to a topic that does not exist."""


@dataclass(frozen=True)
class LabelFile:
    """Human-assigned labels for one topic set, tagged with its source."""

    source: str
    entries: dict[int, str]

    @classmethod
    def load(cls, path: str | Path, source: str) -> "LabelFile":
        entries: dict[int, str] = {}
        with Path(path).open("r", encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                entries[int(row["topic_id"])] = row["label"]
        return cls(source=source, entries=entries)

    def save(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["topic_id", "label"])
            for topic_id in sorted(self.entries):
                writer.writerow([topic_id, self.entries[topic_id]])


def apply_labels(
    summaries: Sequence[TopicSummary], labels: LabelFile
) -> list[TopicSummary]:
    """Attach labels by topic id; unlabeled topics pass through unchanged.

    A label for a topic id that is not in the summaries is an error (the
    file and the model disagree), listed by id.
    """
    known = {s.topic_id for s in summaries}
    missing = sorted(set(labels.entries) - known)
    if missing:
        raise LabelError(f"labels refer to unknown topic ids: {missing}")
    return [
        replace(s, label=labels.entries.get(s.topic_id, s.label)) for s in summaries
    ]


def unlabeled_topics(summaries: Sequence[TopicSummary]) -> list[int]:
    return [s.topic_id for s in summaries if s.label is None]


class MatchMethod(str, Enum):
    LABEL_EQUALITY = "label_equality"
    WORD_OVERLAP = "word_overlap"


@dataclass(frozen=True)
class TopicMatch:
    left_id: int
    right_id: int
    matched_by: MatchMethod
    score: float
    shared_words: tuple[str, ...]


@dataclass(frozen=True)
class ExternalTopic:
    id: int
    label: str | None
    words: tuple[tuple[str, float | None], ...]


@dataclass(frozen=True)
class ExternalTopicSet:
    """Reference topics transcribed from prior work.

    CSV columns: id, label, word, probability (probability may be empty
    when the original table did not publish one).
    """

    topics: tuple[ExternalTopic, ...]

    @classmethod
    def load_csv(cls, path: str | Path) -> "ExternalTopicSet":
        rows: dict[int, dict] = {}
        with Path(path).open("r", encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                topic_id = int(row["id"])
                entry = rows.setdefault(topic_id, {"label": None, "words": []})
                if row.get("label"):
                    entry["label"] = row["label"]
                raw_prob = row.get("probability") or ""
                prob = float(raw_prob) if raw_prob.strip() else None
                entry["words"].append((row["word"].strip().lower(), prob))
        topics = tuple(
            ExternalTopic(id=tid, label=data["label"], words=tuple(data["words"]))
            for tid, data in sorted(rows.items())
        )
        return cls(topics=topics)


def _normalize_label(label: str) -> str:
    return " ".join(label.lower().split())


def _as_matchable(side) -> list[tuple[int, str | None, list[tuple[str, float | None]]]]:
    if isinstance(side, ExternalTopicSet):
        return [(t.id, t.label, list(t.words)) for t in side.topics]
    return [
        (s.topic_id, s.label, [(w, p) for w, p in s.top_words]) for s in side
    ]


def _overlap_score(
    shared: list[str],
    left_probs: dict[str, float | None],
    right_probs: dict[str, float | None],
) -> float:
    """Shared-word count weighted by probability where available.

    Each shared word contributes the mean of its available probabilities,
    or 1.0 when neither side published one, so unweighted scores reduce to
    the plain shared count.
    """
    score = 0.0
    for word in shared:
        probs = [p for p in (left_probs.get(word), right_probs.get(word)) if p is not None]
        score += sum(probs) / len(probs) if probs else 1.0
    return score


def match_topics(
    left: Sequence[TopicSummary],
    right: Sequence[TopicSummary] | ExternalTopicSet,
    top_m: int = 20,
    min_shared: int = 3,
) -> list[TopicMatch]:
    """Propose cross-set matches for an analyst to confirm.

    Pairs whose normalized labels are equal match outright with score 1.
    Every other pair sharing at least ``min_shared`` of its top ``top_m``
    words becomes a word-overlap candidate, scored by the overlap.
    """
    left_side = _as_matchable(left)
    right_side = _as_matchable(right)
    label_matches: list[TopicMatch] = []
    candidates: list[TopicMatch] = []
    for left_id, left_label, left_words in left_side:
        left_top = left_words[:top_m]
        left_probs = dict(left_top)
        left_set = {w for w, _ in left_top}
        for right_id, right_label, right_words in right_side:
            right_top = right_words[:top_m]
            right_probs = dict(right_top)
            shared = sorted(left_set & {w for w, _ in right_top})
            if (
                left_label is not None
                and right_label is not None
                and _normalize_label(left_label) == _normalize_label(right_label)
            ):
                label_matches.append(
                    TopicMatch(
                        left_id=left_id,
                        right_id=right_id,
                        matched_by=MatchMethod.LABEL_EQUALITY,
                        score=1.0,
                        shared_words=tuple(shared),
                    )
                )
            elif len(shared) >= min_shared:
                candidates.append(
                    TopicMatch(
                        left_id=left_id,
                        right_id=right_id,
                        matched_by=MatchMethod.WORD_OVERLAP,
                        score=_overlap_score(shared, left_probs, right_probs),
                        shared_words=tuple(shared),
                    )
                )
    label_matches.sort(key=lambda m: (m.left_id, m.right_id))
    candidates.sort(key=lambda m: (-m.score, m.left_id, m.right_id))
    return label_matches + candidates


# -- decisions ---------------------------------------------------------


@dataclass(frozen=True)
class MatchDecision:
    left_id: int
    right_id: int
    verdict: str  # "accept" | "reject"
    note: str = ""


def load_decisions(path: str | Path) -> list[MatchDecision]:
    decisions = []
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            verdict = row["verdict"].strip().lower()
            if verdict not in ("accept", "reject"):
                raise ValueError(f"bad verdict {row['verdict']!r} (want accept/reject)")
            decisions.append(
                MatchDecision(
                    left_id=int(row["left_id"]),
                    right_id=int(row["right_id"]),
                    verdict=verdict,
                    note=row.get("note", "") or "",
                )
            )
    return decisions


def save_decisions(decisions: Iterable[MatchDecision], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["left_id", "right_id", "verdict", "note"])
        for d in decisions:
            writer.writerow([d.left_id, d.right_id, d.verdict, d.note])


@dataclass(frozen=True)
class MatchSummary:
    accepted_pairs: int
    left_matched: int
    right_matched: int
    left_only: int
    right_only: int
    left_coverage: float
    right_coverage: float

    def format_text(self) -> str:
        return "\n".join(
            [
                f"accepted_pairs: {self.accepted_pairs}",
                f"left_matched: {self.left_matched}",
                f"right_matched: {self.right_matched}",
                f"left_only: {self.left_only}",
                f"right_only: {self.right_only}",
                f"left_coverage: {self.left_coverage:.4f}",
                f"right_coverage: {self.right_coverage:.4f}",
            ]
        )


def match_summary(
    decisions: Sequence[MatchDecision],
    left_ids: Sequence[int],
    right_ids: Sequence[int],
) -> MatchSummary:
    """Matched/unmatched counts per side from the analyst's decisions.

    Both the accepted pair count and per-side coverage are reported, since
    several pairs can involve the same topic.
    """
    accepted = [d for d in decisions if d.verdict == "accept"]
    left_hit = {d.left_id for d in accepted}
    right_hit = {d.right_id for d in accepted}
    left_set, right_set = set(left_ids), set(right_ids)
    left_matched = len(left_hit & left_set)
    right_matched = len(right_hit & right_set)
    return MatchSummary(
        accepted_pairs=len(accepted),
        left_matched=left_matched,
        right_matched=right_matched,
        left_only=len(left_set) - left_matched,
        right_only=len(right_set) - right_matched,
        left_coverage=left_matched / len(left_set) if left_set else 0.0,
        right_coverage=right_matched / len(right_set) if right_set else 0.0,
    )


# -- relevant questions ------------------------------------------------


def relevant_questions(
    model: TopicModel,
    store: CorpusStore,
    topic: int,
    min_views: int = 10_000,
    min_score: int = 10,
) -> list[PostRecord]:
    """Questions dominated by ``topic`` that clear the views/score bar.

    Thresholds are inclusive; forum questions carry no score and only have
    to clear the view threshold. Results sort by views then score,
    descending, then id for determinism.
    """
    if not 0 <= topic < model.num_topics:
        raise ValueError(
            f"topic {topic} out of range; model has topics 0..{model.num_topics - 1}"
        )
    dominant = dominant_topics(model)
    out = []
    for doc_index in np.flatnonzero(dominant == topic):
        question = store.get_by_scoped_id(model.doc_ids[doc_index])
        if question is None:
            continue
        if (question.view_count or 0) < min_views:
            continue
        if question.score is not None and question.score < min_score:
            continue
        out.append(question)
    out.sort(
        key=lambda q: (
            -(q.view_count or 0),
            -(q.score if q.score is not None else -(10**9)),
            q.id,
        )
    )
    return out
