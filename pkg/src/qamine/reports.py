"""Writers and readers for every pipeline artifact.

Every report embeds the tool version, the seed (when one applies) and the
configuration that produced it: CSV and text files carry '#' header
lines, NDJSON files carry a first-line meta record. Nothing here writes a
timestamp, so artifacts are byte-identical across repeated runs.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .lda import TopicSummary
from .records import PostRecord
from .store import CorpusStats
from .tag_filter import QuestionSet, TagStats
from .text_prep import Document
from .topic_analysis import TopicMatch


def _meta(config: dict | None = None, seed: int | None = None) -> dict:
    meta: dict = {"tool": "qamine", "version": __version__}
    if seed is not None:
        meta["seed"] = seed
    if config is not None:
        meta["config"] = config
    return meta


def header_lines(config: dict | None = None, seed: int | None = None) -> list[str]:
    meta = _meta(config, seed)
    lines = [f"# qamine {meta['version']}"]
    if "seed" in meta:
        lines.append(f"# seed={meta['seed']}")
    if "config" in meta:
        lines.append(f"# config={json.dumps(meta['config'], sort_keys=True)}")
    return lines


def _write_csv(
    path: Path,
    columns: Sequence[str],
    rows: Iterable[Sequence],
    config: dict | None,
    seed: int | None = None,
) -> None:
    buffer = io.StringIO()
    for line in header_lines(config, seed):
        buffer.write(line + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(row)
    path.write_text(buffer.getvalue(), encoding="utf-8")


def _write_ndjson(
    path: Path, rows: Iterable[dict], config: dict | None, seed: int | None = None
) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"_meta": _meta(config, seed)}, sort_keys=True) + "\n")
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def read_ndjson(path: str | Path) -> list[dict]:
    """Data rows of an NDJSON artifact, meta line skipped."""
    rows = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if "_meta" in obj:
                continue
            rows.append(obj)
    return rows


# -- stats ---------------------------------------------------------------


def write_stats(
    txt_path: str | Path,
    json_path: str | Path,
    stats: CorpusStats,
    source: str,
    technological_only: bool,
    config: dict | None = None,
) -> None:
    lines = header_lines(config)
    lines.append(f"source: {source}")
    lines.append(f"technological_only: {str(technological_only).lower()}")
    lines.append(stats.format_text())
    Path(txt_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    payload = {
        "_meta": _meta(config),
        "source": source,
        "technological_only": technological_only,
        **stats.as_dict(),
    }
    Path(json_path).write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


# -- tag filtering -------------------------------------------------------


def write_tagstats_csv(
    path: str | Path, stats: Sequence[TagStats], config: dict | None = None
) -> None:
    _write_csv(
        Path(path),
        ["tag", "occ_all", "occ_dom", "trt", "tst"],
        (
            [s.tag, s.occ_all, s.occ_dom, f"{s.trt:.6f}", f"{s.tst:.6f}"]
            for s in stats
        ),
        config,
    )


def write_wordlist(path: str | Path, words: Sequence[str], config: dict | None = None) -> None:
    lines = header_lines(config) + list(words)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_question_set(
    path: str | Path, question_set: QuestionSet, config: dict | None = None
) -> None:
    rows = [
        {"id": qid, "matched_by": provenance.value}
        for qid, provenance in question_set.provenance().items()
    ]
    rows.sort(key=lambda r: (r["matched_by"], r["id"]))
    _write_ndjson(Path(path), rows, config)


def read_question_set(path: str | Path) -> QuestionSet:
    tag_matched = []
    keyword_matched = []
    for row in read_ndjson(path):
        if row["matched_by"] == "tag":
            tag_matched.append(row["id"])
        else:
            keyword_matched.append(row["id"])
    return QuestionSet(
        tag_matched=tuple(tag_matched), keyword_matched=tuple(keyword_matched)
    )


# -- documents -----------------------------------------------------------


def write_documents(
    path: str | Path,
    documents: Sequence[Document],
    config: dict | None = None,
) -> None:
    _write_ndjson(
        Path(path),
        ({"question_id": d.question_id, "tokens": list(d.tokens)} for d in documents),
        config,
    )


def read_documents(path: str | Path) -> list[Document]:
    return [
        Document(question_id=row["question_id"], tokens=tuple(row["tokens"]))
        for row in read_ndjson(path)
    ]


def write_excluded(
    path: str | Path, excluded_ids: Sequence[str], config: dict | None = None
) -> None:
    _write_ndjson(Path(path), ({"question_id": qid} for qid in excluded_ids), config)


# -- topics ----------------------------------------------------------------


def write_topics_csv(
    path: str | Path,
    summaries: Sequence[TopicSummary],
    config: dict | None = None,
    seed: int | None = None,
) -> None:
    """Word table: one row per (topic, rank), ranks starting at 1."""
    rows = []
    for summary in summaries:
        for rank, (word, prob) in enumerate(summary.top_words, start=1):
            rows.append([summary.topic_id, rank, word, f"{prob:.6f}"])
    _write_csv(Path(path), ["topic_id", "rank", "word", "probability"], rows, config, seed)


def write_topic_index(
    csv_path: str | Path,
    txt_path: str | Path,
    summaries: Sequence[TopicSummary],
    config: dict | None = None,
    seed: int | None = None,
) -> None:
    """Topic overview sorted by decreasing NDDT, as CSV and a text table."""
    _write_csv(
        Path(csv_path),
        ["topic_id", "nddt", "label"],
        ([s.topic_id, s.nddt, s.label or ""] for s in summaries),
        config,
        seed,
    )
    lines = header_lines(config, seed)
    lines.append(f"{'Id':>4}  {'NDDT':>6}  Label")
    for s in summaries:
        lines.append(f"{s.topic_id:>4}  {s.nddt:>6}  {s.label or '(unlabeled)'}")
    Path(txt_path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_topics_json(
    path: str | Path,
    summaries: Sequence[TopicSummary],
    config: dict | None = None,
    seed: int | None = None,
) -> None:
    payload = {
        "_meta": _meta(config, seed),
        "topics": [
            {
                "topic_id": s.topic_id,
                "nddt": s.nddt,
                "label": s.label,
                "words": [[w, p] for w, p in s.top_words],
            }
            for s in summaries
        ],
    }
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def read_topics_json(path: str | Path) -> list[TopicSummary]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return [
        TopicSummary(
            topic_id=t["topic_id"],
            nddt=t["nddt"],
            label=t["label"],
            top_words=tuple((w, p) for w, p in t["words"]),
        )
        for t in payload["topics"]
    ]


# -- matching / relevant ---------------------------------------------------


def write_matches_csv(
    path: str | Path, matches: Sequence[TopicMatch], config: dict | None = None
) -> None:
    _write_csv(
        Path(path),
        ["left_id", "right_id", "matched_by", "score", "shared_words"],
        (
            [m.left_id, m.right_id, m.matched_by.value, f"{m.score:.6f}",
             ";".join(m.shared_words)]
            for m in matches
        ),
        config,
    )


def write_relevant_csv(
    path: str | Path,
    rows: Sequence[tuple[str, int, PostRecord]],
    config: dict | None = None,
) -> None:
    """Rows are (source label, topic id, question record)."""
    _write_csv(
        Path(path),
        ["source", "topic", "question_id", "views", "score", "title"],
        (
            [
                source,
                topic,
                q.id,
                q.view_count if q.view_count is not None else "",
                q.score if q.score is not None else "",
                q.title or "",
            ]
            for source, topic, q in rows
        ),
        config,
    )
