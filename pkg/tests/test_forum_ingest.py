import json

import pytest

from qamine.forum_ingest import (
    ForumParseError,
    PageKind,
    import_archive,
    load_page,
    parse_index_page,
    parse_thread_page,
    parse_view_count,
)
from qamine.store import CorpusStore

INDEX_PAGE = """<html><body>
<ul class="thread-list" data-forum-id="f1">
  <li class="thread" data-thread-id="100">
    <a class="title" href="thread-100.html">ListView ripple effect</a>
    <span class="views">1.2K</span>
    <span class="answers">3</span>
    <span class="label">Question</span>
    <span class="label">Accepted answer</span>
  </li>
  <li class="thread" data-thread-id="101">
    <a class="title" href="thread-101.html">Sqlite migration fails</a>
    <span class="views">87</span>
    <span class="answers">0</span>
    <span class="label">Question</span>
  </li>
</ul>
</body></html>
"""

THREAD_100 = """<html><body>
<article class="thread-page" data-thread-id="100" data-forum-id="f1">
  <h1 class="title">ListView ripple effect</h1>
  <div class="post question" data-post-id="100" data-date="2016-03-01T10:00:00Z">
    <span class="author">alice</span>
    <div class="body">How do I remove it?</div>
  </div>
  <div class="post answer" data-post-id="900" data-date="2016-03-02T11:00:00Z">
    <span class="author">bob</span>
    <span class="role">Xamurai</span>
    <span class="label">Accepted answer</span>
    <div class="body">Use a custom renderer.</div>
  </div>
  <div class="post answer" data-post-id="901" data-date="2016-03-03T11:00:00Z">
    <span class="author">carol</span>
    <div class="body">Try this instead.</div>
  </div>
  <div class="post answer" data-post-id="902" data-date="2016-03-04T11:00:00Z">
    <span class="author">bob</span>
    <div class="body">Also works.</div>
  </div>
  <div class="comment" data-comment-id="c1" data-post-id="900" data-date="2016-03-02T12:00:00Z">
    <span class="author">alice</span>
    <span class="label">Thanks</span>
  </div>
</article>
</body></html>
"""

THREAD_101 = """<html><body>
<article class="thread-page" data-thread-id="101" data-forum-id="f1">
  <h1 class="title">Sqlite migration fails</h1>
  <span class="views">90</span>
  <div class="post question" data-post-id="101" data-date="2016-03-05T10:00:00Z">
    <span class="author">dave</span>
    <div class="body">Why?</div>
  </div>
</article>
</body></html>
"""


@pytest.fixture
def archive(tmp_path):
    root = tmp_path / "archive"
    root.mkdir()
    (root / "forums.json").write_text(
        json.dumps([{"id": "f1", "name": "Xamarin.Forms"}]), encoding="utf-8"
    )
    (root / "index-f1.html").write_text(INDEX_PAGE, encoding="utf-8")
    (root / "thread-100.html").write_text(THREAD_100, encoding="utf-8")
    (root / "thread-101.html").write_text(THREAD_101, encoding="utf-8")
    return root


class TestViewCount:
    @pytest.mark.parametrize(
        "text,expected",
        [("523", 523), ("1,234", 1234), ("1.2K", 1200), ("3M", 3_000_000), ("2.5m", 2_500_000)],
    )
    def test_suffixes(self, text, expected):
        assert parse_view_count(text) == expected

    def test_garbage_rejected(self):
        with pytest.raises(ForumParseError):
            parse_view_count("a lot")


class TestKindDetection:
    def test_deterministic_kinds(self, archive):
        assert load_page(archive / "index-f1.html").kind is PageKind.INDEX
        assert load_page(archive / "thread-100.html").kind is PageKind.THREAD

    def test_unrecognized(self, tmp_path):
        page_path = tmp_path / "other.html"
        page_path.write_text("<html><body><p>hello</p></body></html>", encoding="utf-8")
        assert load_page(page_path).kind is PageKind.UNRECOGNIZED


class TestIndexPage:
    def test_one_stub_per_listed_thread(self, archive):
        stubs = parse_index_page(load_page(archive / "index-f1.html"))
        assert [s.id for s in stubs] == ["100", "101"]

    def test_labels_captured_verbatim(self, archive):
        stubs = parse_index_page(load_page(archive / "index-f1.html"))
        assert "Accepted answer" in stubs[0].labels
        assert stubs[1].labels == ("Question",)

    def test_view_suffix_normalized(self, archive):
        stubs = parse_index_page(load_page(archive / "index-f1.html"))
        assert stubs[0].view_count == 1200

    def test_wrong_kind_rejected(self, archive):
        with pytest.raises(ForumParseError, match="unmatched region"):
            parse_index_page(load_page(archive / "thread-100.html"))


class TestThreadPage:
    def test_answers_and_accepted(self, archive):
        parsed = parse_thread_page(load_page(archive / "thread-100.html"))
        assert len(parsed.answers) == 3
        assert [a.accepted for a in parsed.answers] == [True, False, False]
        assert all(a.parent_id == "100" for a in parsed.answers)

    def test_role_badges(self, archive):
        parsed = parse_thread_page(load_page(archive / "thread-100.html"))
        users = {u.name: u for u in parsed.users}
        assert set(users["bob"].roles) >= {"Xamurai", "Member"}
        assert users["alice"].roles == ("Member",)

    def test_zero_replies(self, archive):
        parsed = parse_thread_page(load_page(archive / "thread-101.html"))
        assert parsed.answers == []
        assert parsed.question.view_count == 90

    def test_comments(self, archive):
        parsed = parse_thread_page(load_page(archive / "thread-100.html"))
        assert len(parsed.comments) == 1
        assert parsed.comments[0].post_id == "900"
        assert parsed.comments[0].labels == ("Thanks",)


class TestImportArchive:
    def test_summary_and_view_merge(self, archive, tmp_path):
        store = CorpusStore(tmp_path / "store")
        summary = import_archive(archive, store)
        assert summary.pages_parsed == 3
        assert summary.ingest.questions == 2
        assert summary.ingest.answers == 3
        assert summary.ingest.comments == 1
        # thread 100 has no on-page views: the index stub fills them in
        assert store.get_post("forum", "100").view_count == 1200
        # thread 101 reports 90 on-page vs 87 on the index: larger wins
        assert store.get_post("forum", "101").view_count == 90
        assert len(summary.view_conflicts) == 1

    def test_index_answer_counts_match_parsed_answers(self, archive, tmp_path):
        stubs = {s.id: s for s in parse_index_page(load_page(archive / "index-f1.html"))}
        for path in ("thread-100.html", "thread-101.html"):
            parsed = parse_thread_page(load_page(archive / path))
            assert stubs[parsed.question.id].answer_count == len(parsed.answers)

    def test_unrecognized_page_skipped_with_diagnostic(self, archive, tmp_path):
        (archive / "junk.html").write_text("<html><body>nothing here</body></html>")
        store = CorpusStore(tmp_path / "store")
        summary = import_archive(archive, store)
        assert len(summary.pages_skipped) == 1
        assert "unmatched region" in summary.pages_skipped[0][1]
        assert summary.pages_parsed == 3

    def test_reimport_is_idempotent(self, archive, tmp_path):
        store = CorpusStore(tmp_path / "store")
        import_archive(archive, store)
        before = (dict(store.posts), dict(store.comments), dict(store.users))
        import_archive(archive, store)
        assert (dict(store.posts), dict(store.comments), dict(store.users)) == before

    def test_missing_manifest_fatal(self, archive, tmp_path):
        (archive / "forums.json").unlink()
        with pytest.raises(ForumParseError, match="manifest"):
            import_archive(archive, CorpusStore(tmp_path / "store"))
