"""Flat-file corpus store plus the corpus-level statistics over it.

The store keeps one UTF-8 line-delimited file per entity kind under its
root directory (``posts.ndjson``, ``forums.ndjson``, ``comments.ndjson``,
``users.ndjson``), one self-describing JSON record per line. Writes are
single-writer; once an ingest batch completes, any number of readers may
work off the same directory.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator

from .records import (
    CommentRecord,
    ForumRecord,
    PostKind,
    PostRecord,
    Record,
    RecordError,
    Source,
    UserRecord,
    id_sort_key,
    record_from_dict,
    record_to_dict,
)

log = logging.getLogger(__name__)

_FILES = {
    PostRecord: "posts.ndjson",
    ForumRecord: "forums.ndjson",
    CommentRecord: "comments.ndjson",
    UserRecord: "users.ndjson",
}


@dataclass
class IngestSummary:
    """Counts for one put_records batch."""

    questions: int = 0
    answers: int = 0
    comments: int = 0
    users: int = 0
    forums: int = 0
    rejected: int = 0
    rejection_reasons: list[str] = field(default_factory=list)

    def merge(self, other: "IngestSummary") -> None:
        self.questions += other.questions
        self.answers += other.answers
        self.comments += other.comments
        self.users += other.users
        self.forums += other.forums
        self.rejected += other.rejected
        self.rejection_reasons.extend(other.rejection_reasons)

    def as_dict(self) -> dict:
        return {
            "questions": self.questions,
            "answers": self.answers,
            "comments": self.comments,
            "users": self.users,
            "forums": self.forums,
            "rejected": self.rejected,
        }


@dataclass(frozen=True)
class CorpusStats:
    """Question/answer/view statistics over one source."""

    question_count: int
    answered_count: int
    accepted_count: int
    answered_not_accepted_count: int
    unanswered_count: int
    avg_answers_per_question: float
    total_views: int
    avg_views_per_question: float
    technological_count: int
    non_technological_count: int

    def as_dict(self) -> dict:
        return {
            "question_count": self.question_count,
            "answered_count": self.answered_count,
            "accepted_count": self.accepted_count,
            "answered_not_accepted_count": self.answered_not_accepted_count,
            "unanswered_count": self.unanswered_count,
            "avg_answers_per_question": self.avg_answers_per_question,
            "total_views": self.total_views,
            "avg_views_per_question": self.avg_views_per_question,
            "technological_count": self.technological_count,
            "non_technological_count": self.non_technological_count,
        }

    def format_text(self) -> str:
        return "\n".join(f"{key}: {value}" for key, value in self.as_dict().items())


class CorpusStore:
    """In-memory corpus backed by line-delimited record files.

    Duplicate keys are replaced by the last write, which makes replaying an
    identical record stream a no-op. Answers whose parent question cannot
    be resolved (in the store or earlier in the same batch) are rejected
    and counted, never stored.
    """

    def __init__(self, root: str | Path, autosave: bool = True) -> None:
        self.root = Path(root)
        self.autosave = autosave
        self.posts: dict[tuple[Source, str], PostRecord] = {}
        self.forums: dict[str, ForumRecord] = {}
        self.comments: dict[str, CommentRecord] = {}
        self.users: dict[str, UserRecord] = {}
        if self.root.exists():
            self._load()

    # -- persistence ---------------------------------------------------

    def _load(self) -> None:
        for cls, name in _FILES.items():
            path = self.root / name
            if not path.exists():
                continue
            with path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    self._insert(record_from_dict(json.loads(line)))

    def _insert(self, record: Record) -> None:
        if isinstance(record, PostRecord):
            self.posts[(record.source, record.id)] = record
        elif isinstance(record, ForumRecord):
            self.forums[record.id] = record
        elif isinstance(record, CommentRecord):
            self.comments[record.id] = record
        else:
            self.users[record.id] = record

    def save(self) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        groups: dict[str, list[Record]] = {
            _FILES[PostRecord]: sorted(
                self.posts.values(), key=lambda p: (p.source.value, id_sort_key(p.id))
            ),
            _FILES[ForumRecord]: sorted(self.forums.values(), key=lambda f: id_sort_key(f.id)),
            _FILES[CommentRecord]: sorted(self.comments.values(), key=lambda c: id_sort_key(c.id)),
            _FILES[UserRecord]: sorted(self.users.values(), key=lambda u: id_sort_key(u.id)),
        }
        for name, records in groups.items():
            path = self.root / name
            with path.open("w", encoding="utf-8") as fh:
                for record in records:
                    fh.write(json.dumps(record_to_dict(record), sort_keys=True))
                    fh.write("\n")

    # -- ingest --------------------------------------------------------

    def put_records(self, records: Iterable[Record]) -> IngestSummary:
        """Store a stream of records, validating each one.

        Answers and comments are resolved at the end of the batch so the
        stream order does not matter (dumps do not guarantee
        parent-before-child ordering).
        """
        summary = IngestSummary()
        pending_answers: list[PostRecord] = []
        pending_comments: list[CommentRecord] = []
        for record in records:
            try:
                record.validate()
            except RecordError as exc:
                summary.rejected += 1
                summary.rejection_reasons.append(str(exc))
                continue
            if isinstance(record, PostRecord) and record.kind is PostKind.ANSWER:
                pending_answers.append(record)
            elif isinstance(record, CommentRecord):
                pending_comments.append(record)
            else:
                self._insert(record)
                if isinstance(record, PostRecord):
                    summary.questions += 1
                elif isinstance(record, ForumRecord):
                    summary.forums += 1
                else:
                    summary.users += 1
        for answer in pending_answers:
            parent = self.posts.get((answer.source, answer.parent_id))
            if parent is None or parent.kind is not PostKind.QUESTION:
                summary.rejected += 1
                summary.rejection_reasons.append(
                    f"answer {answer.id}: parent {answer.parent_id!r} is not a known "
                    f"question in source {answer.source.value}"
                )
                continue
            self._insert(answer)
            summary.answers += 1
        post_ids = {post_id for _, post_id in self.posts}
        for comment in pending_comments:
            if comment.post_id not in post_ids:
                summary.rejected += 1
                summary.rejection_reasons.append(
                    f"comment {comment.id}: post {comment.post_id!r} not found"
                )
                continue
            self._insert(comment)
            summary.comments += 1
        if self.autosave:
            self.save()
        return summary

    # -- queries -------------------------------------------------------

    def get_post(self, source: Source | str, post_id: str) -> PostRecord | None:
        return self.posts.get((Source(source), post_id))

    def get_by_scoped_id(self, scoped_id: str) -> PostRecord | None:
        source, _, post_id = scoped_id.partition(":")
        return self.get_post(source, post_id)

    def is_technological(self, question: PostRecord) -> bool:
        if question.forum_id is None:
            return False
        forum = self.forums.get(question.forum_id)
        return forum is not None and forum.technological

    def questions(
        self, source: Source | str | None = None, technological_only: bool = False
    ) -> list[PostRecord]:
        source = Source(source) if source is not None else None
        out = [
            p
            for p in self.posts.values()
            if p.kind is PostKind.QUESTION
            and (source is None or p.source is source)
            and (not technological_only or self.is_technological(p))
        ]
        out.sort(key=lambda p: (p.source.value, id_sort_key(p.id)))
        return out

    def answers(self, source: Source | str | None = None) -> list[PostRecord]:
        source = Source(source) if source is not None else None
        out = [
            p
            for p in self.posts.values()
            if p.kind is PostKind.ANSWER and (source is None or p.source is source)
        ]
        out.sort(key=lambda p: (p.source.value, id_sort_key(p.id)))
        return out

    def iter_question_tags(self, source: Source | str) -> Iterator[tuple[str, tuple[str, ...]]]:
        for q in self.questions(source):
            yield q.id, q.tags

    # -- operations ----------------------------------------------------

    def classify_forums(self, technological_names: Iterable[str]) -> list[str]:
        """Mark forums whose name appears in the configured set.

        Returns warnings for configured names that match no forum; questions
        pick up the flag through their forum_id at query time.
        """
        names = set(technological_names)
        known = {f.name for f in self.forums.values()}
        for forum_id, forum in self.forums.items():
            self.forums[forum_id] = replace(forum, technological=forum.name in names)
        warnings = [f"technological forum name not found in archive: {name!r}"
                    for name in sorted(names - known)]
        for message in warnings:
            log.warning(message)
        if self.autosave:
            self.save()
        return warnings

    def compute_stats(
        self, source: Source | str, technological_only: bool = False
    ) -> CorpusStats:
        """Aggregate question/answer/view counts for one source.

        Averages divide by the question count and are 0.0 for an empty
        corpus. Technological splits only apply to forum questions; dump
        questions have no forum and report 0/0.
        """
        source = Source(source)
        questions = self.questions(source, technological_only)
        question_keys = {q.id for q in questions}

        answer_count = 0
        answered: set[str] = set()
        accepted: set[str] = set()
        for post in self.posts.values():
            if post.kind is not PostKind.ANSWER or post.source is not source:
                continue
            if post.parent_id in question_keys:
                answer_count += 1
                answered.add(post.parent_id)
                if post.accepted:
                    accepted.add(post.parent_id)

        total = len(questions)
        answered_count = len(answered)
        accepted_count = len(accepted)
        total_views = sum(q.view_count or 0 for q in questions)
        if source is Source.FORUM:
            technological_count = sum(1 for q in questions if self.is_technological(q))
            non_technological_count = total - technological_count
        else:
            technological_count = 0
            non_technological_count = 0
        return CorpusStats(
            question_count=total,
            answered_count=answered_count,
            accepted_count=accepted_count,
            answered_not_accepted_count=answered_count - accepted_count,
            unanswered_count=total - answered_count,
            avg_answers_per_question=answer_count / total if total else 0.0,
            total_views=total_views,
            avg_views_per_question=total_views / total if total else 0.0,
            technological_count=technological_count,
            non_technological_count=non_technological_count,
        )
