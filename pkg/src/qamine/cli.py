"""Command line interface: individual stages plus a declarative pipeline.

Every subcommand exits 0 on success, 2 on usage errors, and 1 with a
single-line error message on anything else. Artifact files embed the
configuration and seed that produced them, and contain no timestamps, so
a stage re-run with the same inputs writes byte-identical output.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import click

from . import __version__
from .dump_ingest import DumpCounts, DumpParseError, parse_posts, parse_tags
from .forum_ingest import ForumParseError, import_archive
from .lda import (
    LdaConfig,
    ModelError,
    load_model,
    save_model,
    summarize,
    train,
)
from .records import RecordError, Source
from .store import CorpusStore
from . import reports
from .tag_filter import FilterConfig, TagFilterError, build_question_set
from .text_prep import build_documents, default_stopwords, load_wordlist
from .topic_analysis import (
    ExternalTopicSet,
    LabelError,
    LabelFile,
    apply_labels,
    load_decisions,
    match_summary,
    match_topics,
    relevant_questions,
)

log = logging.getLogger(__name__)

_DOMAIN_ERRORS = (
    RecordError,
    DumpParseError,
    ForumParseError,
    TagFilterError,
    ModelError,
    LabelError,
    ValueError,
    OSError,
)


def _guard(fn: Callable) -> Callable:
    """Turn domain errors into a single-line message and exit status 1."""

    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except _DOMAIN_ERRORS as exc:
            raise click.ClickException(" ".join(str(exc).split())) from exc

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@click.group()
@click.version_option(__version__, prog_name="qamine")
def main() -> None:
    """Build technology-specific Q&A corpora and mine their topics."""
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")


_STORE_OPTION = click.option(
    "--store",
    "store_dir",
    envvar="QAMINE_STORE",
    required=True,
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    help="Corpus store directory (or set QAMINE_STORE).",
)


# -- ingest ----------------------------------------------------------------


@main.command("ingest-dump")
@click.option("--posts", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--tags", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", "store_dir", envvar="QAMINE_STORE", required=True,
              type=click.Path(file_okay=False, path_type=Path))
@_guard
def ingest_dump(posts: Path, tags: Path | None, store_dir: Path) -> None:
    """Stream a Posts XML dump (and optionally Tags) into the store."""
    store = CorpusStore(store_dir)
    counts = DumpCounts()
    summary = store.put_records(parse_posts(posts, counts))
    tag_rows = 0
    if tags is not None:
        tag_rows = sum(1 for _ in parse_tags(tags))
    for key, value in summary.as_dict().items():
        click.echo(f"{key}: {value}")
    click.echo(f"rows: {counts.rows}")
    click.echo(f"ignored: {counts.ignored}")
    click.echo(f"skipped: {counts.skipped}")
    if tags is not None:
        click.echo(f"tag_rows: {tag_rows}")


@main.command("ingest-forum")
@click.option("--archive", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--out", "store_dir", envvar="QAMINE_STORE", required=True,
              type=click.Path(file_okay=False, path_type=Path))
@click.option("--tech-forums", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="File with one technological forum name per line.")
@_guard
def ingest_forum(archive: Path, store_dir: Path, tech_forums: Path | None) -> None:
    """Parse an archived forum directory into the store."""
    store = CorpusStore(store_dir)
    summary = import_archive(archive, store)
    if tech_forums is not None:
        names = [
            line.split("#", 1)[0].strip()
            for line in tech_forums.read_text(encoding="utf-8").splitlines()
        ]
        warnings = store.classify_forums([n for n in names if n])
        for message in warnings:
            click.echo(f"warning: {message}", err=True)
    for key, value in summary.ingest.as_dict().items():
        click.echo(f"{key}: {value}")
    click.echo(f"pages_parsed: {summary.pages_parsed}")
    click.echo(f"pages_skipped: {len(summary.pages_skipped)}")
    for path, reason in summary.pages_skipped:
        click.echo(f"skipped: {path}: {reason}", err=True)
    for conflict in summary.view_conflicts:
        click.echo(f"view conflict: {conflict}", err=True)


# -- stats -------------------------------------------------------------------


@main.command("stats")
@_STORE_OPTION
@click.option("--source", type=click.Choice(["dump", "forum"]), required=True)
@click.option("--technological-only", is_flag=True, default=False)
@click.option("--out-dir", type=click.Path(file_okay=False, path_type=Path))
@_guard
def stats(store_dir: Path, source: str, technological_only: bool, out_dir: Path | None) -> None:
    """Corpus statistics (questions, answers, acceptance, views)."""
    store = CorpusStore(store_dir, autosave=False)
    result = store.compute_stats(source, technological_only)
    click.echo(f"source: {source}")
    click.echo(f"technological_only: {str(technological_only).lower()}")
    click.echo(result.format_text())
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        suffix = f"-{source}" + ("-technological" if technological_only else "")
        reports.write_stats(
            out_dir / f"stats{suffix}.txt",
            out_dir / f"stats{suffix}.json",
            result,
            source,
            technological_only,
            config={"source": source, "technological_only": technological_only},
        )


# -- tag filtering -------------------------------------------------------------


@main.command("filter")
@_STORE_OPTION
@click.option("--pattern", default="xamarin", show_default=True)
@click.option("--trt", default=0.25, show_default=True)
@click.option("--tst", default=0.001, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False, path_type=Path),
              help="Question set NDJSON output.")
@click.option("--tagstats", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--final-tags", "final_tags_path", type=click.Path(dir_okay=False, path_type=Path))
@_guard
def filter_cmd(store_dir: Path, pattern: str, trt: float, tst: float,
               out: Path, tagstats: Path | None, final_tags_path: Path | None) -> None:
    """Select the technology question set by snowball tags plus keywords."""
    store = CorpusStore(store_dir, autosave=False)
    config = FilterConfig(initial_pattern=pattern, trt_min=trt, tst_min=tst)
    triples = [(q.id, q.title or "", q.tags) for q in store.questions(Source.DUMP)]
    result = build_question_set(triples, config)
    config_dict = {"pattern": pattern, "trt_min": trt, "tst_min": tst}
    out.parent.mkdir(parents=True, exist_ok=True)
    reports.write_question_set(out, result.question_set, config_dict)
    reports.write_tagstats_csv(tagstats or out.parent / "tagstats.csv", result.stats, config_dict)
    reports.write_wordlist(
        final_tags_path or out.parent / "final-tags.txt", result.final_tags, config_dict
    )
    for key, value in result.question_set.counts().items():
        click.echo(f"{key}: {value}")
    click.echo(f"initial_tags: {len(result.initial_tags)}")
    click.echo(f"final_tags: {len(result.final_tags)}")


# -- document preparation -------------------------------------------------------


@main.command("prep")
@_STORE_OPTION
@click.option("--questions", "questions_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Question set NDJSON (dump side).")
@click.option("--source", type=click.Choice(["dump", "forum"]),
              help="Take every stored question of this source instead.")
@click.option("--technological-only", is_flag=True, default=False)
@click.option("--stoplist", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--protected", "protected_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Protected word list (defaults to no protected words).")
@click.option("--out", required=True, type=click.Path(dir_okay=False, path_type=Path))
@click.option("--excluded-out", type=click.Path(dir_okay=False, path_type=Path))
@_guard
def prep(store_dir: Path, questions_path: Path | None, source: str | None,
         technological_only: bool, stoplist: Path | None, protected_path: Path | None,
         out: Path, excluded_out: Path | None) -> None:
    """Turn question titles into LDA documents."""
    if (questions_path is None) == (source is None):
        raise click.UsageError("pass exactly one of --questions or --source")
    store = CorpusStore(store_dir, autosave=False)
    if questions_path is not None:
        ids = [row["id"] for row in reports.read_ndjson(questions_path)]
        titled = []
        for qid in ids:
            question = store.get_post(Source.DUMP, qid)
            if question is None:
                raise click.ClickException(f"question {qid} not found in store")
            titled.append((question.scoped_id, question.title or ""))
    else:
        titled = [
            (q.scoped_id, q.title or "")
            for q in store.questions(source, technological_only)
        ]
    stop = load_wordlist(stoplist) if stoplist else default_stopwords()
    protected = load_wordlist(protected_path) if protected_path else frozenset()
    documents, excluded = build_documents(titled, protected, stop)
    config_dict = {
        "stoplist": str(stoplist) if stoplist else "builtin",
        "protected": str(protected_path) if protected_path else None,
        "questions": str(questions_path) if questions_path else f"source={source}",
        "technological_only": technological_only,
    }
    out.parent.mkdir(parents=True, exist_ok=True)
    reports.write_documents(out, documents, config_dict)
    reports.write_excluded(
        excluded_out or out.with_name(out.stem + "-excluded" + out.suffix),
        excluded,
        config_dict,
    )
    click.echo(f"documents: {len(documents)}")
    click.echo(f"excluded_empty: {len(excluded)}")


# -- training / reporting ----------------------------------------------------------


@main.command("train")
@click.option("--docs", "docs_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--topics", "num_topics", default=40, show_default=True)
@click.option("--alpha", type=float, default=None, help="Defaults to 1/topics.")
@click.option("--beta", default=0.1, show_default=True)
@click.option("--iterations", default=1000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--min-count", default=1, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False, path_type=Path))
@_guard
def train_cmd(docs_path: Path, num_topics: int, alpha: float | None, beta: float,
              iterations: int, seed: int, min_count: int, out: Path) -> None:
    """Train the topic model by collapsed Gibbs sampling."""
    documents = reports.read_documents(docs_path)
    config = LdaConfig(
        num_topics=num_topics, alpha=alpha, beta=beta,
        iterations=iterations, seed=seed, min_count=min_count,
    )
    model = train(documents, config)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, out)
    click.echo(f"documents: {model.num_documents}")
    click.echo(f"vocabulary: {model.vocab_size}")
    click.echo(f"tokens: {len(model.z)}")
    click.echo(f"seed: {seed}")


@main.command("report")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--top-words", default=20, show_default=True)
@click.option("--labels", "labels_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out-dir", required=True, type=click.Path(file_okay=False, path_type=Path))
@click.option("--prefix", default="topics", show_default=True,
              help="Artifact base name (word table, index, JSON).")
@_guard
def report(model_path: Path, top_words: int, labels_path: Path | None,
           out_dir: Path, prefix: str) -> None:
    """Export topic tables (word/probability CSV, NDDT index, JSON)."""
    model = load_model(model_path)
    summaries = summarize(model, top_n=top_words)
    if labels_path is not None:
        summaries = apply_labels(summaries, LabelFile.load(labels_path, source=prefix))
    out_dir.mkdir(parents=True, exist_ok=True)
    config_dict = {"model": model.config.as_dict(), "top_words": top_words}
    seed = model.config.seed
    index_name = "topic-index" if prefix == "topics" else f"topic-index-{prefix.removeprefix('topics-')}"
    reports.write_topics_csv(out_dir / f"{prefix}.csv", summaries, config_dict, seed)
    reports.write_topic_index(
        out_dir / f"{index_name}.csv", out_dir / f"{index_name}.txt",
        summaries, config_dict, seed,
    )
    reports.write_topics_json(out_dir / f"{prefix}.json", summaries, config_dict, seed)
    click.echo(f"topics: {model.num_topics}")
    click.echo(f"documents: {model.num_documents}")


# -- matching / relevant -------------------------------------------------------------


def _load_topic_side(path: Path):
    if path.suffix.lower() == ".csv":
        return ExternalTopicSet.load_csv(path)
    return reports.read_topics_json(path)


@main.command("match")
@click.option("--left", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="topics.json of the left side.")
@click.option("--right", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="topics.json, or a CSV of external reference topics.")
@click.option("--top-m", default=20, show_default=True)
@click.option("--min-shared", default=3, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False, path_type=Path))
@click.option("--decisions", "decisions_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--summary-out", type=click.Path(dir_okay=False, path_type=Path))
@_guard
def match(left: Path, right: Path, top_m: int, min_shared: int, out: Path,
          decisions_path: Path | None, summary_out: Path | None) -> None:
    """Propose topic matches; summarize analyst decisions when given."""
    left_side = _load_topic_side(left)
    right_side = _load_topic_side(right)
    matches = match_topics(left_side, right_side, top_m=top_m, min_shared=min_shared)
    config_dict = {"left": left.name, "right": right.name,
                   "top_m": top_m, "min_shared": min_shared}
    out.parent.mkdir(parents=True, exist_ok=True)
    reports.write_matches_csv(out, matches, config_dict)
    click.echo(f"candidates: {len(matches)}")
    if decisions_path is not None:
        decisions = load_decisions(decisions_path)
        left_ids = [t.topic_id if hasattr(t, "topic_id") else t.id for t in _iter_topics(left_side)]
        right_ids = [t.topic_id if hasattr(t, "topic_id") else t.id for t in _iter_topics(right_side)]
        summary = match_summary(decisions, left_ids, right_ids)
        click.echo(summary.format_text())
        if summary_out is not None:
            summary_out.write_text(
                "\n".join(reports.header_lines(config_dict)) + "\n"
                + summary.format_text() + "\n",
                encoding="utf-8",
            )


def _iter_topics(side):
    return side.topics if isinstance(side, ExternalTopicSet) else side


@main.command("relevant")
@_STORE_OPTION
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--topic", required=True, type=int)
@click.option("--min-views", default=10000, show_default=True)
@click.option("--min-score", default=10, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False, path_type=Path))
@_guard
def relevant(store_dir: Path, model_path: Path, topic: int, min_views: int,
             min_score: int, out: Path) -> None:
    """List the most viewed/upvoted questions dominated by one topic."""
    store = CorpusStore(store_dir, autosave=False)
    model = load_model(model_path)
    questions = relevant_questions(model, store, topic, min_views, min_score)
    config_dict = {"topic": topic, "min_views": min_views, "min_score": min_score}
    out.parent.mkdir(parents=True, exist_ok=True)
    reports.write_relevant_csv(
        out, [(q.source.value, topic, q) for q in questions], config_dict
    )
    click.echo(f"relevant: {len(questions)}")


# -- pipeline ------------------------------------------------------------------------


@dataclass
class PipelineConfig:
    """Validated pipeline description; paths resolve against the config file."""

    base: Path
    store_dir: Path
    out_dir: Path
    dump_posts: Path | None = None
    dump_tags: Path | None = None
    archive: Path | None = None
    technological: list[str] = field(default_factory=list)
    filter: FilterConfig = field(default_factory=FilterConfig)
    stoplist: Path | None = None
    protected: Path | None = None
    lda: LdaConfig = field(default_factory=LdaConfig)
    top_words: int = 20
    labels_dump: Path | None = None
    labels_forum: Path | None = None
    match_top_m: int = 20
    match_min_shared: int = 3
    match_external: Path | None = None
    relevant: list[dict] = field(default_factory=list)

    @classmethod
    def load(cls, path: Path, seed: int | None = None,
             store_dir: Path | None = None, out_dir: Path | None = None) -> "PipelineConfig":
        raw = json.loads(path.read_text(encoding="utf-8"))
        base = path.parent

        def resolve(value: str | None) -> Path | None:
            if value is None:
                return None
            p = Path(value)
            return p if p.is_absolute() else base / p

        dump = raw.get("dump") or {}
        forum = raw.get("forum") or {}
        filt = raw.get("filter") or {}
        prep_cfg = raw.get("prep") or {}
        lda_raw = raw.get("lda") or {}
        report_cfg = raw.get("report") or {}
        match_cfg = raw.get("match") or {}
        if seed is not None:
            lda_raw["seed"] = seed
        config = cls(
            base=base,
            store_dir=store_dir or resolve(raw.get("store_dir", "store")),
            out_dir=out_dir or resolve(raw.get("out_dir", "out")),
            dump_posts=resolve(dump.get("posts")),
            dump_tags=resolve(dump.get("tags")),
            archive=resolve(forum.get("archive")),
            technological=list(forum.get("technological") or []),
            filter=FilterConfig(
                initial_pattern=filt.get("pattern", "xamarin"),
                trt_min=filt.get("trt_min", 0.25),
                tst_min=filt.get("tst_min", 0.001),
            ),
            stoplist=resolve(prep_cfg.get("stoplist")),
            protected=resolve(prep_cfg.get("protected")),
            lda=LdaConfig(
                num_topics=lda_raw.get("topics", 40),
                alpha=lda_raw.get("alpha"),
                beta=lda_raw.get("beta", 0.1),
                iterations=lda_raw.get("iterations", 1000),
                seed=lda_raw.get("seed", 0),
                min_count=lda_raw.get("min_count", 1),
            ),
            top_words=report_cfg.get("top_words", 20),
            labels_dump=resolve(report_cfg.get("labels")),
            labels_forum=resolve(report_cfg.get("labels_forum")),
            match_top_m=match_cfg.get("top_m", 20),
            match_min_shared=match_cfg.get("min_shared", 3),
            match_external=resolve(match_cfg.get("external")),
            relevant=list(raw.get("relevant") or []),
        )
        config.validate()
        return config

    def validate(self) -> None:
        for name, p in (
            ("dump.posts", self.dump_posts),
            ("dump.tags", self.dump_tags),
            ("forum.archive", self.archive),
            ("prep.stoplist", self.stoplist),
            ("prep.protected", self.protected),
            ("report.labels", self.labels_dump),
            ("report.labels_forum", self.labels_forum),
            ("match.external", self.match_external),
        ):
            if p is not None and not p.exists():
                raise click.UsageError(f"pipeline config: {name} does not exist: {p}")
        if self.dump_posts is None and self.archive is None:
            raise click.UsageError("pipeline config: need at least one of dump or forum inputs")


def _stage(out_dir: Path, name: str, outputs: list[Path], run: Callable[[], None]) -> None:
    if outputs and all(p.exists() for p in outputs):
        click.echo(f"[{name}] up to date", err=True)
        return
    click.echo(f"[{name}] running", err=True)
    run()


@main.command("pipeline")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--seed", type=int, default=None, help="Override the configured seed.")
@click.option("--store", "store_dir", type=click.Path(file_okay=False, path_type=Path))
@click.option("--out-dir", type=click.Path(file_okay=False, path_type=Path))
@_guard
def pipeline(config_path: Path, seed: int | None, store_dir: Path | None,
             out_dir: Path | None) -> None:
    """Run every configured stage; stages with existing outputs are skipped."""
    cfg = PipelineConfig.load(config_path, seed=seed, store_dir=store_dir, out_dir=out_dir)
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    lda_dict = cfg.lda.as_dict()

    if cfg.dump_posts is not None:
        def run_ingest_dump() -> None:
            store = CorpusStore(cfg.store_dir)
            counts = DumpCounts()
            summary = store.put_records(parse_posts(cfg.dump_posts, counts))
            tag_rows = sum(1 for _ in parse_tags(cfg.dump_tags)) if cfg.dump_tags else 0
            marker = {
                "_meta": {"tool": "qamine", "version": __version__},
                "summary": summary.as_dict(),
                "rows": counts.rows,
                "ignored": counts.ignored,
                "skipped": counts.skipped,
                "tag_rows": tag_rows,
            }
            (out / "ingest-dump.json").write_text(
                json.dumps(marker, sort_keys=True, indent=2) + "\n", encoding="utf-8"
            )

        _stage(out, "ingest-dump", [out / "ingest-dump.json"], run_ingest_dump)

    if cfg.archive is not None:
        def run_ingest_forum() -> None:
            store = CorpusStore(cfg.store_dir)
            summary = import_archive(cfg.archive, store)
            if cfg.technological:
                store.classify_forums(cfg.technological)
            marker = {
                "_meta": {"tool": "qamine", "version": __version__},
                "summary": summary.ingest.as_dict(),
                "pages_parsed": summary.pages_parsed,
                "pages_skipped": sorted(summary.pages_skipped),
                "view_conflicts": sorted(summary.view_conflicts),
            }
            (out / "ingest-forum.json").write_text(
                json.dumps(marker, sort_keys=True, indent=2) + "\n", encoding="utf-8"
            )

        _stage(out, "ingest-forum", [out / "ingest-forum.json"], run_ingest_forum)

    def open_store() -> CorpusStore:
        if not cfg.store_dir.exists():
            raise click.UsageError(f"store directory does not exist: {cfg.store_dir}")
        return CorpusStore(cfg.store_dir, autosave=False)

    if cfg.dump_posts is not None:
        def run_stats_dump() -> None:
            store = open_store()
            reports.write_stats(
                out / "stats-dump.txt", out / "stats-dump.json",
                store.compute_stats(Source.DUMP), "dump", False,
                config={"source": "dump"},
            )

        _stage(out, "stats-dump", [out / "stats-dump.txt", out / "stats-dump.json"], run_stats_dump)

    if cfg.archive is not None:
        def run_stats_forum() -> None:
            store = open_store()
            technological_only = bool(cfg.technological)
            reports.write_stats(
                out / "stats-forum.txt", out / "stats-forum.json",
                store.compute_stats(Source.FORUM, technological_only),
                "forum", technological_only,
                config={"source": "forum", "technological_only": technological_only},
            )

        _stage(out, "stats-forum", [out / "stats-forum.txt", out / "stats-forum.json"], run_stats_forum)

    filter_outputs = [out / "questionset.ndjson", out / "tagstats.csv", out / "final-tags.txt"]
    if cfg.dump_posts is not None:
        def run_filter() -> None:
            store = open_store()
            triples = [(q.id, q.title or "", q.tags) for q in store.questions(Source.DUMP)]
            result = build_question_set(triples, cfg.filter)
            config_dict = {
                "pattern": cfg.filter.initial_pattern,
                "trt_min": cfg.filter.trt_min,
                "tst_min": cfg.filter.tst_min,
            }
            reports.write_question_set(out / "questionset.ndjson", result.question_set, config_dict)
            reports.write_tagstats_csv(out / "tagstats.csv", result.stats, config_dict)
            reports.write_wordlist(out / "final-tags.txt", result.final_tags, config_dict)

        _stage(out, "filter", filter_outputs, run_filter)

    def load_protected() -> frozenset[str]:
        if cfg.protected is not None:
            return load_wordlist(cfg.protected)
        final_tags = out / "final-tags.txt"
        if final_tags.exists():
            return load_wordlist(final_tags)
        return frozenset()

    stop = load_wordlist(cfg.stoplist) if cfg.stoplist else default_stopwords()
    prep_config = {
        "stoplist": str(cfg.stoplist) if cfg.stoplist else "builtin",
        "protected": str(cfg.protected) if cfg.protected else "final-tags",
    }

    sides: list[tuple[str, str]] = []  # (side key, artifact suffix)
    if cfg.dump_posts is not None:
        sides.append(("dump", ""))
    if cfg.archive is not None:
        sides.append(("forum", "-forum"))

    for side, suffix in sides:
        docs_path = out / f"documents{suffix}.ndjson"
        excluded_path = out / f"documents{suffix}-excluded.ndjson"

        def run_prep(side=side, docs_path=docs_path, excluded_path=excluded_path) -> None:
            store = open_store()
            if side == "dump":
                ids = [row["id"] for row in reports.read_ndjson(out / "questionset.ndjson")]
                titled = []
                for qid in ids:
                    question = store.get_post(Source.DUMP, qid)
                    if question is None:
                        raise click.ClickException(f"question {qid} not found in store")
                    titled.append((question.scoped_id, question.title or ""))
            else:
                titled = [
                    (q.scoped_id, q.title or "")
                    for q in store.questions(Source.FORUM, technological_only=bool(cfg.technological))
                ]
            documents, excluded = build_documents(titled, load_protected(), stop)
            reports.write_documents(docs_path, documents, {**prep_config, "side": side})
            reports.write_excluded(excluded_path, excluded, {**prep_config, "side": side})

        _stage(out, f"prep-{side}", [docs_path, excluded_path], run_prep)

        model_path = out / f"model{suffix}.json"

        def run_train(docs_path=docs_path, model_path=model_path) -> None:
            documents = reports.read_documents(docs_path)
            model = train(documents, cfg.lda)
            save_model(model, model_path)

        _stage(out, f"train-{side}", [model_path], run_train)

        prefix = f"topics{suffix}"
        index = f"topic-index{suffix}"
        report_outputs = [
            out / f"{prefix}.csv", out / f"{prefix}.json",
            out / f"{index}.csv", out / f"{index}.txt",
        ]

        def run_report(side=side, model_path=model_path, prefix=prefix, index=index) -> None:
            model = load_model(model_path)
            summaries = summarize(model, top_n=cfg.top_words)
            labels_path = cfg.labels_dump if side == "dump" else cfg.labels_forum
            if labels_path is not None:
                summaries = apply_labels(summaries, LabelFile.load(labels_path, source=side))
            config_dict = {"model": model.config.as_dict(), "top_words": cfg.top_words}
            reports.write_topics_csv(out / f"{prefix}.csv", summaries, config_dict, cfg.lda.seed)
            reports.write_topic_index(
                out / f"{index}.csv", out / f"{index}.txt", summaries, config_dict, cfg.lda.seed
            )
            reports.write_topics_json(out / f"{prefix}.json", summaries, config_dict, cfg.lda.seed)

        _stage(out, f"report-{side}", report_outputs, run_report)

    match_pair: tuple[Path, Path] | None = None
    if len(sides) == 2:
        match_pair = (out / "topics.json", out / "topics-forum.json")
    elif cfg.match_external is not None:
        match_pair = (out / f"topics{sides[0][1]}.json", cfg.match_external)

    if match_pair is not None:
        def run_match() -> None:
            left_side = reports.read_topics_json(match_pair[0])
            right_side = _load_topic_side(match_pair[1])
            matches = match_topics(
                left_side, right_side,
                top_m=cfg.match_top_m, min_shared=cfg.match_min_shared,
            )
            config_dict = {
                "left": match_pair[0].name, "right": match_pair[1].name,
                "top_m": cfg.match_top_m, "min_shared": cfg.match_min_shared,
            }
            reports.write_matches_csv(out / "matches.csv", matches, config_dict)

        _stage(out, "match", [out / "matches.csv"], run_match)

    if cfg.relevant:
        def run_relevant() -> None:
            store = open_store()
            rows = []
            for entry in cfg.relevant:
                side = entry.get("source", "dump")
                suffix = "" if side == "dump" else "-forum"
                model = load_model(out / f"model{suffix}.json")
                questions = relevant_questions(
                    model, store, entry["topic"],
                    entry.get("min_views", 10000), entry.get("min_score", 10),
                )
                rows.extend((side, entry["topic"], q) for q in questions)
            reports.write_relevant_csv(out / "relevant.csv", rows, {"relevant": cfg.relevant})

        _stage(out, "relevant", [out / "relevant.csv"], run_relevant)

    click.echo(f"pipeline complete: {out}")


if __name__ == "__main__":
    main()
