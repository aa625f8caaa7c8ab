"""Record types shared by every ingest source and the corpus store.

All records are immutable values: they can be handed between threads and
reused across stores without defensive copying.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from enum import Enum
from typing import Any


class RecordError(ValueError):
    """A record violates one of its type invariants."""


class Source(str, Enum):
    """Where a post came from."""

    DUMP = "dump"    # Stack-Exchange-style XML data dump
    FORUM = "forum"  # archived forum HTML pages


class PostKind(str, Enum):
    QUESTION = "question"
    ANSWER = "answer"


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 timestamp, always returning an aware UTC datetime.

    Dump files use naive timestamps ("2013-01-29T14:02:31.143"); the forum
    fixture dialect uses a trailing "Z". Both are treated as UTC.
    """
    raw = value.strip()
    if raw.endswith("Z"):
        raw = raw[:-1]
    dt = datetime.fromisoformat(raw)
    if dt.tzinfo is None:
        return dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%f").rstrip("0").rstrip(".") + "Z"


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise RecordError(message)


@dataclass(frozen=True)
class PostRecord:
    """One question or answer, from either source."""

    id: str
    source: Source
    kind: PostKind
    creation_date: datetime
    title: str | None = None
    body: str = ""
    tags: tuple[str, ...] = ()
    parent_id: str | None = None
    view_count: int | None = None
    score: int | None = None
    accepted: bool = False
    forum_id: str | None = None
    author_id: str | None = None

    @property
    def scoped_id(self) -> str:
        """Identifier unique across sources, e.g. ``dump:4512``."""
        return f"{self.source.value}:{self.id}"

    def validate(self) -> None:
        _require(bool(self.id), "post id must be non-empty")
        if self.kind is PostKind.QUESTION:
            _require(self.title is not None and self.title.strip() != "",
                     f"question {self.id}: title must be non-empty")
            _require(self.parent_id is None, f"question {self.id}: parent_id not allowed")
            _require(not self.accepted, f"question {self.id}: accepted applies to answers only")
        else:
            _require(bool(self.parent_id), f"answer {self.id}: parent_id is required")
            _require(self.title is None, f"answer {self.id}: title not allowed")
            _require(not self.tags, f"answer {self.id}: tags apply to questions only")
            _require(self.view_count is None, f"answer {self.id}: view_count applies to questions only")
        if self.source is Source.FORUM:
            _require(self.score is None, f"forum post {self.id}: score not available")
        else:
            _require(self.forum_id is None, f"dump post {self.id}: forum_id not applicable")
        if self.view_count is not None:
            _require(self.view_count >= 0, f"post {self.id}: view_count must be >= 0")
        seen = set()
        for tag in self.tags:
            _require(bool(tag) and tag == tag.lower(), f"post {self.id}: tag {tag!r} must be lowercase")
            _require(tag not in seen, f"post {self.id}: duplicate tag {tag!r}")
            seen.add(tag)


@dataclass(frozen=True)
class ForumRecord:
    """A forum or sub-forum from the archived site."""

    id: str
    name: str
    parent_name: str | None = None
    technological: bool = False

    def validate(self) -> None:
        _require(bool(self.id), "forum id must be non-empty")
        _require(bool(self.name.strip()), f"forum {self.id}: name must be non-empty")


@dataclass(frozen=True)
class CommentRecord:
    """A comment attached to a forum post."""

    id: str
    post_id: str
    date: datetime
    author_id: str | None = None
    labels: tuple[str, ...] = ()

    def validate(self) -> None:
        _require(bool(self.id), "comment id must be non-empty")
        _require(bool(self.post_id), f"comment {self.id}: post_id is required")
        _require(len(set(self.labels)) == len(self.labels),
                 f"comment {self.id}: duplicate labels")


@dataclass(frozen=True)
class UserRecord:
    """A forum user; every registered user holds at least the Member role."""

    id: str
    name: str
    roles: tuple[str, ...] = ("Member",)

    def validate(self) -> None:
        _require(bool(self.id), "user id must be non-empty")
        _require(bool(self.name), f"user {self.id}: name must be non-empty")
        _require(len(self.roles) > 0, f"user {self.id}: roles must be non-empty")


Record = PostRecord | ForumRecord | CommentRecord | UserRecord

_ENTITY_NAMES = {
    PostRecord: "post",
    ForumRecord: "forum",
    CommentRecord: "comment",
    UserRecord: "user",
}
_ENTITY_TYPES = {name: cls for cls, name in _ENTITY_NAMES.items()}


def record_to_dict(record: Record) -> dict[str, Any]:
    """Self-describing JSON-compatible mapping for one record."""
    out: dict[str, Any] = {"entity": _ENTITY_NAMES[type(record)]}
    for f in fields(record):
        value = getattr(record, f.name)
        if isinstance(value, datetime):
            value = format_timestamp(value)
        elif isinstance(value, Enum):
            value = value.value
        elif isinstance(value, tuple):
            value = list(value)
        out[f.name] = value
    return out


def record_from_dict(obj: dict[str, Any]) -> Record:
    data = dict(obj)
    entity = data.pop("entity", None)
    cls = _ENTITY_TYPES.get(entity)
    if cls is None:
        raise RecordError(f"unknown entity kind: {entity!r}")
    kwargs: dict[str, Any] = {}
    for f in fields(cls):
        if f.name not in data:
            continue
        value = data[f.name]
        if f.name in ("creation_date", "date") and isinstance(value, str):
            value = parse_timestamp(value)
        elif f.name == "source":
            value = Source(value)
        elif f.name == "kind":
            value = PostKind(value)
        elif isinstance(value, list):
            value = tuple(value)
        kwargs[f.name] = value
    return cls(**kwargs)


def id_sort_key(raw_id: str) -> tuple[int, int, str]:
    """Sort numeric ids numerically, everything else lexically after them."""
    if raw_id.isdigit():
        return (0, int(raw_id), "")
    return (1, 0, raw_id)
