"""Streaming parsers for Stack-Exchange-style XML dump files.

Files are read incrementally and parsed elements are released as soon as a
row has been emitted, so a multi-gigabyte Posts file never has to fit in
memory. Accepted-answer flags need the parent question's declared accepted
answer id, and dumps do not order parents before children, so posts are
parsed in two passes: the first indexes question -> accepted-answer id,
the second emits records.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterator

from .records import PostKind, PostRecord, Source, parse_timestamp


class DumpParseError(Exception):
    """Malformed XML; carries the approximate byte offset of the failure."""

    def __init__(self, message: str, byte_offset: int | None = None):
        super().__init__(message)
        self.byte_offset = byte_offset


@dataclass
class DumpCounts:
    """Row bookkeeping filled in while a parse stream is consumed."""

    rows: int = 0
    questions: int = 0
    answers: int = 0
    ignored: int = 0
    skipped: int = 0
    skipped_reasons: list[str] = field(default_factory=list)

    def _skip(self, reason: str) -> None:
        self.skipped += 1
        self.skipped_reasons.append(reason)


class _CountingReader:
    """File wrapper that tracks how many bytes the XML parser consumed."""

    def __init__(self, fh: IO[bytes]):
        self._fh = fh
        self.bytes_read = 0

    def read(self, size: int = -1) -> bytes:
        data = self._fh.read(size)
        self.bytes_read += len(data)
        return data


def iter_rows(path: str | Path) -> Iterator[dict[str, str]]:
    """Yield the attribute map of every ``<row .../>`` element in the file.

    The element tree is cleared after each row, keeping memory use flat.
    Malformed XML raises DumpParseError with the byte offset reached.
    """
    path = Path(path)
    with path.open("rb") as fh:
        reader = _CountingReader(fh)
        try:
            context = ET.iterparse(reader, events=("start", "end"))
            _, root = next(context)
            for event, elem in context:
                if event == "end" and elem.tag == "row":
                    yield dict(elem.attrib)
                    root.clear()
        except ET.ParseError as exc:
            raise DumpParseError(
                f"{path}: malformed XML near byte {reader.bytes_read}: {exc}",
                byte_offset=reader.bytes_read,
            ) from exc
        except StopIteration:
            return  # empty file


_ANGLE_TAG_RE = re.compile(r"<([^<>]+)>")


def parse_tag_string(raw: str) -> tuple[str, ...]:
    """Split a dump tag string into lowercase unique tag names.

    Both delimiter styles that appeared across dump releases are accepted:
    ``<a><b>`` and ``|a|b|``.
    """
    if "<" in raw:
        parts = _ANGLE_TAG_RE.findall(raw)
    else:
        parts = [p for p in raw.split("|") if p]
    out: list[str] = []
    seen: set[str] = set()
    for part in parts:
        tag = part.strip().lower()
        if tag and tag not in seen:
            seen.add(tag)
            out.append(tag)
    return tuple(out)


def _opt_int(attrs: dict[str, str], name: str) -> int | None:
    value = attrs.get(name)
    if value is None:
        return None
    try:
        return int(value)
    except ValueError:
        return None


def parse_posts(path: str | Path, counts: DumpCounts | None = None) -> Iterator[PostRecord]:
    """Stream PostRecords out of a Posts XML file.

    Rows with PostTypeId 1 become questions, 2 become answers with the
    accepted flag resolved against the parent's AcceptedAnswerId; any other
    PostTypeId (wiki, moderator rows) is counted as ignored. Rows missing a
    required attribute are skipped and counted, the stream continues.
    """
    counts = counts if counts is not None else DumpCounts()

    # int-keyed to stay compact: only questions that declare an accepted
    # answer get an entry
    accepted_by_question: dict[int, int] = {}
    for attrs in iter_rows(path):
        if attrs.get("PostTypeId") == "1":
            accepted = attrs.get("AcceptedAnswerId")
            row_id = attrs.get("Id")
            if row_id and accepted:
                try:
                    accepted_by_question[int(row_id)] = int(accepted)
                except ValueError:
                    pass

    for attrs in iter_rows(path):
        counts.rows += 1
        row_id = attrs.get("Id")
        if not row_id or not row_id.lstrip("-").isdigit():
            counts._skip(f"row {counts.rows}: missing or non-integer Id")
            continue
        post_type = attrs.get("PostTypeId")
        if post_type not in ("1", "2"):
            counts.ignored += 1
            continue
        raw_date = attrs.get("CreationDate")
        if not raw_date:
            counts._skip(f"row Id={row_id}: missing CreationDate")
            continue
        try:
            created = parse_timestamp(raw_date)
        except ValueError:
            counts._skip(f"row Id={row_id}: unparsable CreationDate {raw_date!r}")
            continue

        if post_type == "1":
            title = attrs.get("Title", "")
            if not title.strip():
                counts._skip(f"row Id={row_id}: question without Title")
                continue
            counts.questions += 1
            yield PostRecord(
                id=row_id,
                source=Source.DUMP,
                kind=PostKind.QUESTION,
                creation_date=created,
                title=title,
                body=attrs.get("Body", ""),
                tags=parse_tag_string(attrs.get("Tags", "")),
                view_count=_opt_int(attrs, "ViewCount"),
                score=_opt_int(attrs, "Score"),
            )
        else:
            parent_id = attrs.get("ParentId")
            if not parent_id:
                counts._skip(f"row Id={row_id}: answer without ParentId")
                continue
            try:
                accepted_here = accepted_by_question.get(int(parent_id)) == int(row_id)
            except ValueError:
                accepted_here = False
            counts.answers += 1
            yield PostRecord(
                id=row_id,
                source=Source.DUMP,
                kind=PostKind.ANSWER,
                creation_date=created,
                body=attrs.get("Body", ""),
                parent_id=parent_id,
                score=_opt_int(attrs, "Score"),
                accepted=accepted_here,
            )


def parse_tags(path: str | Path, counts: DumpCounts | None = None) -> Iterator[tuple[str, int]]:
    """Stream (tag name, dump-declared count) pairs from a Tags XML file.

    The parser is transparent: duplicate rows are emitted as-is and left to
    the consumer. Declared counts are only used for validation reports.
    """
    counts = counts if counts is not None else DumpCounts()
    for attrs in iter_rows(path):
        counts.rows += 1
        name = attrs.get("TagName")
        declared = _opt_int(attrs, "Count")
        if not name or declared is None:
            counts._skip(f"tag row {counts.rows}: missing TagName or Count")
            continue
        yield name.strip().lower(), declared
