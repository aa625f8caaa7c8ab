"""Parse phase for archived forum pages: index listings and thread pages.

Live fetching is out of scope; the input is a directory of previously
saved HTML pages plus a ``forums.json`` manifest. The page dialect is the
class-annotated markup documented in ``docs/forum-archive-format.md``:
index pages carry a ``thread-list`` of ``thread`` items, thread pages
carry a ``thread-page`` article with ``post`` and ``comment`` blocks.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from html.parser import HTMLParser
from pathlib import Path

from .records import (
    CommentRecord,
    ForumRecord,
    PostKind,
    PostRecord,
    Record,
    Source,
    UserRecord,
    parse_timestamp,
)
from .store import CorpusStore, IngestSummary

log = logging.getLogger(__name__)


class ForumParseError(Exception):
    """A page does not match the documented archive dialect."""


class PageKind(Enum):
    INDEX = "index"
    THREAD = "thread"
    UNRECOGNIZED = "unrecognized"


@dataclass(frozen=True)
class ArchivedPage:
    path: Path
    kind: PageKind
    raw: str


@dataclass(frozen=True)
class ThreadStub:
    """One row of an index page listing."""

    id: str
    title: str
    view_count: int | None
    answer_count: int | None
    labels: tuple[str, ...]


@dataclass
class ThreadParse:
    question: PostRecord
    answers: list[PostRecord]
    comments: list[CommentRecord]
    users: list[UserRecord]


# -- minimal DOM ------------------------------------------------------


class _Node:
    __slots__ = ("tag", "attrs", "children", "_text")

    def __init__(self, tag: str, attrs: dict[str, str]):
        self.tag = tag
        self.attrs = attrs
        self.children: list[_Node] = []
        self._text: list[str] = []

    @property
    def classes(self) -> set[str]:
        return set(self.attrs.get("class", "").split())

    def text(self) -> str:
        parts = list(self._text)
        for child in self.children:
            parts.append(child.text())
        return " ".join(" ".join(parts).split())

    def find_all(self, cls: str) -> list["_Node"]:
        found = []
        for child in self.children:
            if cls in child.classes:
                found.append(child)
            found.extend(child.find_all(cls))
        return found

    def find_children(self, cls: str) -> list["_Node"]:
        return [child for child in self.children if cls in child.classes]

    def find_first(self, cls: str) -> "_Node | None":
        hits = self.find_all(cls)
        return hits[0] if hits else None


_VOID_TAGS = {"br", "hr", "img", "meta", "link", "input"}


class _TreeBuilder(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.root = _Node("#root", {})
        self._stack = [self.root]

    def handle_starttag(self, tag, attrs):
        node = _Node(tag, dict(attrs))
        self._stack[-1].children.append(node)
        if tag not in _VOID_TAGS:
            self._stack.append(node)

    def handle_endtag(self, tag):
        for i in range(len(self._stack) - 1, 0, -1):
            if self._stack[i].tag == tag:
                del self._stack[i:]
                break

    def handle_data(self, data):
        if data.strip():
            self._stack[-1]._text.append(data.strip())


def _parse_html(raw: str) -> _Node:
    builder = _TreeBuilder()
    builder.feed(raw)
    builder.close()
    return builder.root


def load_page(path: str | Path) -> ArchivedPage:
    """Read a page and detect its kind from the markup (deterministic)."""
    path = Path(path)
    raw = path.read_text(encoding="utf-8")
    tree = _parse_html(raw)
    if tree.find_first("thread-page") is not None:
        kind = PageKind.THREAD
    elif tree.find_first("thread-list") is not None:
        kind = PageKind.INDEX
    else:
        kind = PageKind.UNRECOGNIZED
    return ArchivedPage(path=path, kind=kind, raw=raw)


_VIEW_RE = re.compile(r"^([0-9][0-9,]*(?:\.[0-9]+)?)\s*([kKmM]?)$")


def parse_view_count(text: str) -> int:
    """Normalize a displayed view counter: '523', '1,234', '1.2K', '3M'."""
    match = _VIEW_RE.match(text.strip())
    if not match:
        raise ForumParseError(f"unrecognized view count: {text!r}")
    number = float(match.group(1).replace(",", ""))
    multiplier = {"": 1, "k": 1_000, "m": 1_000_000}[match.group(2).lower()]
    return int(round(number * multiplier))


def _unmatched_region(raw: str) -> str:
    snippet = " ".join(raw.split())[:120]
    return snippet or "<empty page>"


def parse_index_page(page: ArchivedPage) -> list[ThreadStub]:
    """Extract the thread stubs listed on an index page, in page order."""
    if page.kind is not PageKind.INDEX:
        raise ForumParseError(
            f"{page.path}: not an index page; first unmatched region: "
            f"{_unmatched_region(page.raw)}"
        )
    tree = _parse_html(page.raw)
    listing = tree.find_first("thread-list")
    stubs: list[ThreadStub] = []
    for item in listing.find_children("thread"):
        thread_id = item.attrs.get("data-thread-id")
        title_node = item.find_first("title")
        if not thread_id or title_node is None:
            raise ForumParseError(
                f"{page.path}: thread item without id or title; first unmatched "
                f"region: {_unmatched_region(page.raw)}"
            )
        views_node = item.find_first("views")
        answers_node = item.find_first("answers")
        stubs.append(
            ThreadStub(
                id=thread_id,
                title=title_node.text(),
                view_count=parse_view_count(views_node.text()) if views_node else None,
                answer_count=int(answers_node.text()) if answers_node else None,
                labels=tuple(node.text() for node in item.find_all("label")),
            )
        )
    return stubs


ACCEPTED_LABEL = "Accepted answer"


def _post_author(node: _Node) -> tuple[str | None, tuple[str, ...]]:
    author_node = node.find_first("author")
    name = author_node.text() if author_node else None
    badges = tuple(role.text() for role in node.find_all("role"))
    return name, badges


def parse_thread_page(page: ArchivedPage) -> ThreadParse:
    """Extract the question, its answers, comments and users from a thread.

    An answer is accepted iff one of its labels is "Accepted answer" (forum
    authors may accept several answers per question). Users are deduplicated
    by name within the page; every user holds Member plus any role badges.
    """
    if page.kind is not PageKind.THREAD:
        raise ForumParseError(
            f"{page.path}: not a thread page; first unmatched region: "
            f"{_unmatched_region(page.raw)}"
        )
    tree = _parse_html(page.raw)
    article = tree.find_first("thread-page")
    thread_id = article.attrs.get("data-thread-id")
    forum_id = article.attrs.get("data-forum-id")
    title_node = article.find_first("title")
    question_node = None
    answer_nodes = []
    for node in article.find_all("post"):
        if "question" in node.classes:
            question_node = node
        elif "answer" in node.classes:
            answer_nodes.append(node)
    if not thread_id or title_node is None or question_node is None:
        raise ForumParseError(
            f"{page.path}: thread without id, title or question; first unmatched "
            f"region: {_unmatched_region(page.raw)}"
        )

    roles_by_name: dict[str, set[str]] = {}

    def note_user(name: str | None, badges: tuple[str, ...]) -> str | None:
        if not name:
            return None
        roles_by_name.setdefault(name, {"Member"}).update(badges)
        return name

    views_node = next(
        (child for child in article.children if "views" in child.classes), None
    )
    q_author, q_badges = _post_author(question_node)
    body_node = question_node.find_first("body")
    question = PostRecord(
        id=thread_id,
        source=Source.FORUM,
        kind=PostKind.QUESTION,
        creation_date=parse_timestamp(question_node.attrs["data-date"]),
        title=title_node.text(),
        body=body_node.text() if body_node else "",
        view_count=parse_view_count(views_node.text()) if views_node else None,
        forum_id=forum_id,
        author_id=note_user(q_author, q_badges),
    )

    answers: list[PostRecord] = []
    for node in answer_nodes:
        name, badges = _post_author(node)
        labels = tuple(label.text() for label in node.find_children("label"))
        body_node = node.find_first("body")
        answers.append(
            PostRecord(
                id=node.attrs["data-post-id"],
                source=Source.FORUM,
                kind=PostKind.ANSWER,
                creation_date=parse_timestamp(node.attrs["data-date"]),
                body=body_node.text() if body_node else "",
                parent_id=thread_id,
                accepted=ACCEPTED_LABEL in labels,
                forum_id=forum_id,
                author_id=note_user(name, badges),
            )
        )

    comments: list[CommentRecord] = []
    for node in article.find_all("comment"):
        name, badges = _post_author(node)
        comments.append(
            CommentRecord(
                id=node.attrs["data-comment-id"],
                post_id=node.attrs["data-post-id"],
                date=parse_timestamp(node.attrs["data-date"]),
                author_id=note_user(name, badges),
                labels=tuple(label.text() for label in node.find_children("label")),
            )
        )

    users = [
        UserRecord(id=name, name=name, roles=tuple(sorted(roles)))
        for name, roles in sorted(roles_by_name.items())
    ]
    return ThreadParse(question=question, answers=answers, comments=comments, users=users)


# -- archive import ----------------------------------------------------


@dataclass
class ForumImportSummary:
    ingest: IngestSummary = field(default_factory=IngestSummary)
    pages_parsed: int = 0
    pages_skipped: list[tuple[str, str]] = field(default_factory=list)
    view_conflicts: list[str] = field(default_factory=list)
    stubs: dict[str, ThreadStub] = field(default_factory=dict)


def load_manifest(archive_dir: str | Path) -> list[ForumRecord]:
    manifest_path = Path(archive_dir) / "forums.json"
    if not manifest_path.exists():
        raise ForumParseError(f"missing forum manifest: {manifest_path}")
    entries = json.loads(manifest_path.read_text(encoding="utf-8"))
    return [
        ForumRecord(
            id=str(entry["id"]),
            name=entry["name"],
            parent_name=entry.get("parent_name"),
            technological=bool(entry.get("technological", False)),
        )
        for entry in entries
    ]


def import_archive(archive_dir: str | Path, store: CorpusStore) -> ForumImportSummary:
    """Parse every archived page and load the records into the store.

    Index pages provide view counts for threads whose page omits them; when
    the two disagree the larger value wins and the conflict is logged.
    Unrecognized pages are skipped with a diagnostic, the import continues.
    """
    archive_dir = Path(archive_dir)
    summary = ForumImportSummary()
    forums = load_manifest(archive_dir)

    stubs: dict[str, ThreadStub] = {}
    threads: list[ThreadParse] = []
    for path in sorted(archive_dir.glob("*.html")):
        page = load_page(path)
        try:
            if page.kind is PageKind.INDEX:
                for stub in parse_index_page(page):
                    stubs[stub.id] = stub
            elif page.kind is PageKind.THREAD:
                threads.append(parse_thread_page(page))
            else:
                raise ForumParseError(
                    f"{path}: unrecognized markup; first unmatched region: "
                    f"{_unmatched_region(page.raw)}"
                )
            summary.pages_parsed += 1
        except ForumParseError as exc:
            summary.pages_skipped.append((str(path), str(exc)))
            log.warning("skipping page: %s", exc)
    summary.stubs = stubs

    roles_by_name: dict[str, set[str]] = {}
    records: list[Record] = list(forums)
    for thread in threads:
        question = thread.question
        stub = stubs.get(question.id)
        if stub is not None and stub.view_count is not None:
            if question.view_count is None:
                question = _with_views(question, stub.view_count)
            elif question.view_count != stub.view_count:
                winner = max(question.view_count, stub.view_count)
                summary.view_conflicts.append(
                    f"thread {question.id}: index reports {stub.view_count} views, "
                    f"page reports {question.view_count}; keeping {winner}"
                )
                question = _with_views(question, winner)
        records.append(question)
        records.extend(thread.answers)
        records.extend(thread.comments)
        for user in thread.users:
            roles_by_name.setdefault(user.name, set()).update(user.roles)
    records.extend(
        UserRecord(id=name, name=name, roles=tuple(sorted(roles)))
        for name, roles in sorted(roles_by_name.items())
    )

    for conflict in summary.view_conflicts:
        log.warning(conflict)
    summary.ingest = store.put_records(records)
    return summary


def _with_views(question: PostRecord, views: int) -> PostRecord:
    return replace(question, view_count=views)
