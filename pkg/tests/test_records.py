from datetime import datetime, timezone

import pytest

from qamine.records import (
    CommentRecord,
    ForumRecord,
    PostKind,
    PostRecord,
    RecordError,
    Source,
    UserRecord,
    format_timestamp,
    parse_timestamp,
    record_from_dict,
    record_to_dict,
)

TS = datetime(2016, 3, 1, 10, 0, 0, tzinfo=timezone.utc)


def make_question(**overrides):
    base = dict(
        id="1",
        source=Source.DUMP,
        kind=PostKind.QUESTION,
        creation_date=TS,
        title="How to bind a ListView",
        tags=("xamarin", "c#"),
        view_count=120,
        score=3,
    )
    base.update(overrides)
    return PostRecord(**base)


def make_answer(**overrides):
    base = dict(
        id="2",
        source=Source.DUMP,
        kind=PostKind.ANSWER,
        creation_date=TS,
        parent_id="1",
        score=1,
    )
    base.update(overrides)
    return PostRecord(**base)


class TestPostInvariants:
    def test_valid_question_and_answer(self):
        make_question().validate()
        make_answer().validate()

    def test_answer_requires_parent(self):
        with pytest.raises(RecordError, match="parent_id"):
            make_answer(parent_id=None).validate()

    def test_question_requires_title(self):
        with pytest.raises(RecordError, match="title"):
            make_question(title="   ").validate()

    def test_forum_posts_have_no_score(self):
        record = make_question(source=Source.FORUM, score=5, forum_id="f1")
        with pytest.raises(RecordError, match="score"):
            record.validate()

    def test_dump_posts_have_no_forum(self):
        with pytest.raises(RecordError, match="forum_id"):
            make_question(forum_id="f1").validate()

    def test_tags_lowercase_and_unique(self):
        with pytest.raises(RecordError, match="lowercase"):
            make_question(tags=("Xamarin",)).validate()
        with pytest.raises(RecordError, match="duplicate"):
            make_question(tags=("xamarin", "xamarin")).validate()

    def test_view_count_non_negative(self):
        with pytest.raises(RecordError, match="view_count"):
            make_question(view_count=-1).validate()


class TestOtherRecords:
    def test_forum_record(self):
        ForumRecord(id="f1", name="Xamarin.Forms").validate()
        with pytest.raises(RecordError):
            ForumRecord(id="f1", name=" ").validate()

    def test_comment_record(self):
        CommentRecord(id="c1", post_id="1", date=TS, labels=("Accepted answer",)).validate()
        with pytest.raises(RecordError):
            CommentRecord(id="c1", post_id="", date=TS).validate()

    def test_user_default_role(self):
        user = UserRecord(id="alice", name="alice")
        user.validate()
        assert user.roles == ("Member",)
        with pytest.raises(RecordError):
            UserRecord(id="alice", name="alice", roles=()).validate()


class TestSerialization:
    @pytest.mark.parametrize(
        "record",
        [
            make_question(),
            make_answer(accepted=True),
            ForumRecord(id="f1", name="Events", parent_name="Community"),
            CommentRecord(id="c1", post_id="9", date=TS, author_id="bob", labels=("x",)),
            UserRecord(id="bob", name="bob", roles=("Member", "Xamurai")),
        ],
    )
    def test_round_trip(self, record):
        assert record_from_dict(record_to_dict(record)) == record

    def test_timestamps(self):
        assert parse_timestamp("2016-03-01T10:00:00Z") == TS
        assert parse_timestamp("2016-03-01T10:00:00.000") == TS
        assert parse_timestamp(format_timestamp(TS)) == TS
