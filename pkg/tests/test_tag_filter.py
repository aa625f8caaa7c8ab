import random

import pytest

from qamine.tag_filter import (
    FilterConfig,
    TagFilterError,
    TagSnowballSelector,
    build_question_set,
    compute_tag_stats,
    expand_initial_tags,
    filter_by_keywords,
    keyword_pattern,
    select_final_tags,
)


def questions_from_plan(plan):
    """plan: list of (count, tags) -> [(id, title, tags), ...]"""
    out = []
    qid = 0
    for count, tags in plan:
        for _ in range(count):
            qid += 1
            out.append((str(qid), f"question {qid}", tuple(tags)))
    return out


class TestExpandInitialTags:
    def test_substring_rule(self):
        config = FilterConfig()
        tags = {"xamarin", "xamarin.ios", "android"}
        assert expand_initial_tags(config, tags) == {"xamarin", "xamarin.ios"}

    def test_case_insensitive(self):
        assert expand_initial_tags(FilterConfig(initial_pattern="XAMARIN"), {"xamarin"}) == {
            "xamarin"
        }

    def test_no_match_is_fatal(self):
        with pytest.raises(TagFilterError, match="nothing to snowball"):
            expand_initial_tags(FilterConfig(), {"android", "java"})


class TestComputeTagStats:
    def test_ratios(self):
        plan = [
            (50, ("xamarin",)),
            (20, ("xamarin", "mvvmcross")),
            (10, ("mvvmcross",)),
        ]
        questions = [(qid, tags) for qid, _, tags in questions_from_plan(plan)]
        stats = {s.tag: s for s in compute_tag_stats(questions, {"xamarin"})}
        assert stats["mvvmcross"].occ_all == 30
        assert stats["mvvmcross"].occ_dom == 20
        assert stats["mvvmcross"].trt == pytest.approx(20 / 30)
        assert stats["mvvmcross"].tst == pytest.approx(20 / 70)
        assert stats["xamarin"].trt == 1.0
        assert stats["xamarin"].tst == 1.0  # the anchor tag is its own maximum

    def test_sorted_by_occ_dom_then_name(self):
        plan = [(5, ("xamarin", "aa")), (5, ("xamarin", "bb")), (9, ("xamarin", "cc"))]
        questions = [(qid, tags) for qid, _, tags in questions_from_plan(plan)]
        stats = compute_tag_stats(questions, {"xamarin"})
        assert [s.tag for s in stats] == ["xamarin", "cc", "aa", "bb"]

    def test_initial_tags_have_trt_one_exactly(self):
        plan = [(3, ("xamarin",)), (2, ("xamarin.ios", "c#"))]
        questions = [(qid, tags) for qid, _, tags in questions_from_plan(plan)]
        stats = compute_tag_stats(questions, {"xamarin", "xamarin.ios"})
        for s in stats:
            if "xamarin" in s.tag:
                assert s.trt == 1.0


class TestSelectFinalTags:
    def build_stats(self):
        plan = [
            (40, ("xamarin",)),
            (10, ("xamarin", "mvvmcross")),
            (2, ("mvvmcross",)),      # trt 10/12, tst 10/50
            (1, ("xamarin", "rare")),  # trt 1.0, tst 1/50 = 0.02
            (5, ("xamarin", "android")),
            (200, ("android",)),       # trt 5/205, rejected
        ]
        questions = [(qid, tags) for qid, _, tags in questions_from_plan(plan)]
        return compute_tag_stats(questions, {"xamarin"})

    def test_thresholds(self):
        stats = self.build_stats()
        final = select_final_tags(stats, FilterConfig(trt_min=0.25, tst_min=0.001))
        assert "mvvmcross" in final
        assert "android" not in final
        assert "xamarin" in final

    def test_initial_always_kept_even_if_rare(self):
        plan = [(1000, ("xamarin",)), (1, ("xamarin.rare-one",))]
        questions = [(qid, tags) for qid, _, tags in questions_from_plan(plan)]
        stats = compute_tag_stats(questions, {"xamarin", "xamarin.rare-one"})
        final = select_final_tags(stats, FilterConfig(tst_min=0.01))
        assert "xamarin.rare-one" in final  # tst 0.001 < 0.01, but it is initial

    def test_boundary_inclusive(self):
        plan = [(75, ("xamarin",)), (25, ("xamarin", "edge")), (75, ("edge",))]
        questions = [(qid, tags) for qid, _, tags in questions_from_plan(plan)]
        stats = {s.tag: s for s in compute_tag_stats(questions, {"xamarin"})}
        assert stats["edge"].trt == pytest.approx(0.25)
        final = select_final_tags(stats.values(), FilterConfig(trt_min=0.25))
        assert "edge" in final

    def test_monotone_in_thresholds(self):
        stats = self.build_stats()
        rng = random.Random(3)
        for _ in range(50):
            trt_a, trt_b = sorted([rng.uniform(0.01, 1), rng.uniform(0.01, 1)])
            tst_a, tst_b = sorted([rng.uniform(0.001, 1), rng.uniform(0.001, 1)])
            loose = select_final_tags(stats, FilterConfig(trt_min=trt_a, tst_min=tst_a))
            tight = select_final_tags(stats, FilterConfig(trt_min=trt_b, tst_min=tst_b))
            assert tight <= loose


class TestKeywordMatching:
    def test_separator_rule(self):
        pattern = keyword_pattern("xamarin.forms")
        assert pattern.search("Xamarin Forms ListView")
        assert pattern.search("xamarin.forms crash")
        assert pattern.search("XamarinForms help")
        assert not pattern.search("xamarin list forms")

    def test_dash_rule(self):
        pattern = keyword_pattern("xamarin-studio")
        assert pattern.search("Xamarin Studio will not start")
        assert pattern.search("xamarinstudio broken")

    def test_fallback_is_disjoint_from_already(self):
        questions = [("1", "Xamarin Android Save sms"), ("2", "Pure java"), ("3", "Xamarin help")]
        extra = filter_by_keywords(questions, {"xamarin"}, already={"3"})
        assert extra == {"1"}


class TestBuildQuestionSet:
    PLAN = [
        (30, ("xamarin",)),
        (10, ("xamarin", "mvvmcross")),
        (3, ("mvvmcross",)),
        (40, ("android",)),
    ]

    def test_partitions_disjoint_and_complete(self):
        questions = questions_from_plan(self.PLAN)
        questions.append(("999", "Xamarin Android Save sms", ("c#", "android", "datetime")))
        result = build_question_set(questions, FilterConfig())
        tag_set = set(result.question_set.tag_matched)
        keyword_set = set(result.question_set.keyword_matched)
        assert tag_set.isdisjoint(keyword_set)
        assert tag_set | keyword_set == set(result.question_set.ids)
        assert "999" in keyword_set

    def test_matches_brute_force_oracle(self):
        rng = random.Random(11)
        vocabulary = ["xamarin", "xamarin.forms", "mvvmcross", "android", "java", "c#", "sql"]
        for trial in range(10):
            n = rng.randrange(50, 10_000 if trial == 0 else 800)
            questions = []
            for qid in range(n):
                tags = tuple(sorted(rng.sample(vocabulary, k=rng.randint(1, 3))))
                title = " ".join(rng.sample(
                    ["xamarin", "forms", "listview", "java", "crash", "build"],
                    k=rng.randint(2, 4),
                ))
                questions.append((str(qid), title, tags))
            config = FilterConfig()
            result = build_question_set(questions, config)

            # brute force: one scan per question with the final tags/keywords
            final = set(result.final_tags)
            patterns = [keyword_pattern(t) for t in final]
            expected_tagged, expected_keyword = set(), set()
            for qid, title, tags in questions:
                if any(t in final for t in tags):
                    expected_tagged.add(qid)
                elif any(p.search(title) for p in patterns):
                    expected_keyword.add(qid)
            assert set(result.question_set.tag_matched) == expected_tagged, f"trial {trial}"
            assert set(result.question_set.keyword_matched) == expected_keyword, f"trial {trial}"


class TestEstimator:
    def test_fit_and_predict(self):
        questions = questions_from_plan(TestBuildQuestionSet.PLAN)
        selector = TagSnowballSelector().fit(questions)
        assert "xamarin" in selector.final_tags_
        flags = selector.predict(
            [("x", "Xamarin Forms", ("java",)), ("y", "pure sql", ("sql",))]
        )
        assert flags == [True, False]

    def test_get_params_round_trip(self):
        selector = TagSnowballSelector(trt_min=0.3)
        params = selector.get_params()
        assert params["trt_min"] == 0.3
        selector.set_params(tst_min=0.01)
        assert selector.tst_min == 0.01
