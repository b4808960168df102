import json
from datetime import datetime, timezone

import pytest
from hypothesis import given, strategies as hst

from solsent.ingest import (
    DEFAULT_KEYWORDS,
    DEFAULT_STOPPHRASES,
    RawPost,
    dedupe,
    exclude_irrelevant,
    exclude_profile_only,
    keyword_filter,
    load_phrase_list,
    parse_record,
    phrase_in,
    read_jsonl,
    run_filter_chain,
)


def post(id="p", text="solar panel news", **kw):
    return RawPost(id=id, text=text, **kw)


class TestKeywordFilter:
    def test_retains_keyword_hit(self):
        assert list(keyword_filter([post(text="New solar panel install today")]))

    def test_drops_without_keyword(self):
        assert not list(keyword_filter([post(text="Wind turbines are great")]))

    def test_case_insensitive(self):
        # brute-force oracle: lowercase substring scan
        text = "SOLAR ENERGY rocks"
        assert any(k.lower() in text.lower() for k in DEFAULT_KEYWORDS)
        assert list(keyword_filter([post(text=text)]))

    def test_quoted_and_extended_count(self):
        assert list(keyword_filter([post(text="look at this", quoted_text="solar PV array")]))
        assert list(keyword_filter([post(text="look", extended_text="the solar battery hums")]))

    def test_hyphen_matches_space_both_ways(self):
        assert phrase_in("solar-powered", "a solar powered lamp")
        assert phrase_in("solar-powered", "a solar-powered lamp")
        assert phrase_in("solar power", "great solar-power idea")

    def test_whitespace_runs_collapse(self):
        assert phrase_in("solar energy", "solar \t\n energy forever")

    def test_empty_keywords_rejected(self):
        with pytest.raises(ValueError):
            list(keyword_filter([post()], keywords=[]))


class TestExcludeIrrelevant:
    def test_stopphrase_dropped(self):
        assert not list(exclude_irrelevant([post(text="my solar plexus hurts after yoga")]))

    def test_clean_post_retained(self):
        assert list(exclude_irrelevant([post(text="solar power is the future")]))

    def test_eclipse_dropped(self):
        assert not list(exclude_irrelevant([post(text="Solar eclipse glasses for sale")]))

    def test_user_extension(self):
        extended = list(DEFAULT_STOPPHRASES) + ["crypto"]
        assert not list(exclude_irrelevant([post(text="solar crypto mining rig")], extended))


class TestExcludeProfileOnly:
    def test_profile_only_dropped(self):
        p = post(text="great weather today", screen_name="SolarPanelPro")
        assert not list(exclude_profile_only([p]))

    def test_keyword_in_text_retained(self):
        p = post(text="our solar panel output doubled", screen_name="SolarPanelPro")
        assert list(exclude_profile_only([p]))

    def test_plain_user_retained(self):
        p = post(text="love my solar battery", screen_name="jdoe")
        assert list(exclude_profile_only([p]))

    def test_description_counts_as_profile(self):
        p = post(text="nothing relevant", user_description="solar energy evangelist")
        assert not list(exclude_profile_only([p]))


class TestDedupe:
    def test_first_occurrence_kept(self):
        posts = [post(id="a", text="1"), post(id="b"), post(id="a", text="2")]
        kept = list(dedupe(posts))
        assert [p.id for p in kept] == ["a", "b"]
        assert kept[0].text == "1"

    def test_all_distinct_unchanged(self):
        posts = [post(id=str(i)) for i in range(5)]
        assert list(dedupe(posts)) == posts


class TestChain:
    def build_corpus(self):
        corpus = [
            post(id="k1"),                                        # retained
            post(id="k2", text="solar power!"),                   # retained
            post(id="none", text="nothing relevant here"),        # keyword stage drop
            post(id="stop", text="solar panel eclipse combo"),    # irrelevant drop
            post(id="prof", text="plain words", screen_name="solar energy fan"),  # keyword drop
            post(id="k1", text="solar panel duplicate"),          # dedupe drop
        ]
        return corpus

    def test_counts_reconcile(self):
        retained, report = run_filter_chain(self.build_corpus())
        assert [p.id for p in retained] == ["k1", "k2"]
        assert report.n_input == 6
        assert report.n_keyword_matched == 4
        assert report.n_excluded_irrelevant == 1
        assert report.n_excluded_profile_only == 0
        assert report.n_deduped == 1
        assert report.n_retained == 2
        assert report.reconciles()

    def test_idempotent(self):
        retained, _ = run_filter_chain(self.build_corpus())
        again, report = run_filter_chain(retained)
        assert again == retained
        assert report.n_input == report.n_retained == len(retained)
        assert report.n_excluded_irrelevant == report.n_deduped == 0

    @given(hst.lists(hst.tuples(hst.integers(0, 5), hst.booleans(), hst.booleans()), max_size=40))
    def test_report_reconciles_on_random_corpora(self, spec):
        posts = []
        for i, (dup_group, has_kw, has_stop) in enumerate(spec):
            text = "hello world"
            if has_kw:
                text += " solar energy"
            if has_stop:
                text += " eclipse"
            posts.append(post(id=f"g{dup_group}", text=text))
        retained, report = run_filter_chain(posts)
        assert report.reconciles()
        assert report.n_input == len(posts)
        assert report.n_retained == len(retained)
        assert len({p.id for p in retained}) == len(retained)


class TestReadJsonl:
    def test_malformed_lines_skipped(self, tmp_path):
        lines = [
            json.dumps({"id": "a", "text": "solar power", "created_at": "2020-03-01T10:00:00Z"}),
            "{broken json",
            json.dumps({"id": "b", "text": "   "}),
            json.dumps({"text": "no id"}),
            json.dumps({"id": "c", "text": "ok", "lat": 95.0, "lon": 0.0}),
            json.dumps({"id": "d", "text": "ok", "lat": 10.0}),
            json.dumps({"id": "e", "text": "ok", "created_at": "not a date"}),
            json.dumps({"id": "f", "text": "fine", "lat": 40.0, "lon": -100.0}),
        ]
        path = tmp_path / "corpus.jsonl"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        result = read_jsonl(path)
        assert [p.id for p in result.posts] == ["a", "f"]
        assert len(result.rejects) == 6
        assert result.posts[0].created_at == datetime(2020, 3, 1, 10, tzinfo=timezone.utc)

    def test_timezone_offsets_normalized_to_utc(self):
        p = parse_record({"id": "x", "text": "t", "created_at": "2020-03-01T05:00:00-05:00"})
        assert p.created_at == datetime(2020, 3, 1, 10, tzinfo=timezone.utc)

    def test_boundary_coordinates_accepted(self):
        p = parse_record({"id": "x", "text": "t", "lat": -90.0, "lon": 180.0})
        assert p.latitude == -90.0 and p.longitude == 180.0


def test_load_phrase_list(tmp_path):
    path = tmp_path / "phrases.txt"
    path.write_text("# comment\nsolar energy\n\nsolar panel  # trailing\n", encoding="utf-8")
    assert load_phrase_list(path) == ["solar energy", "solar panel"]
