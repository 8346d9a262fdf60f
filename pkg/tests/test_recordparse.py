import datetime as dt

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from legisrgcn.corpus import Party, Speech
from legisrgcn.recordparse import (
    AmbiguousName,
    DailyEdition,
    MASK_TOKEN,
    NameNotFound,
    Tag,
    TargetNotCited,
    count_sentences,
    extract_citations,
    filter_speeches,
    mask_citation,
    match_name,
    parse_editions,
    segment_edition,
    tag_text,
)

from conftest import make_legislator
from parser_fixture import ROSTER_SPEC, build_editions, build_roster


class TestTagText:
    def test_poe_of_texas_pattern(self):
        spans = tag_text("Mr. POE of Texas. Mrs. President.")
        assert [s.tag for s in spans] == [Tag.SAL, Tag.PERSON, Tag.GPE, Tag.SAL, Tag.ROLE]

    def test_boehner_pattern(self):
        spans = tag_text("Mr. BOEHNER. Mr. Speaker")
        assert [s.tag for s in spans] == [Tag.SAL, Tag.PERSON, Tag.SAL, Tag.ROLE]

    def test_empty_string(self):
        assert tag_text("") == []

    def test_spans_sorted_and_in_bounds(self):
        text = "Mr. POE of Texas. Mrs. President. I thank Mr. SMITH."
        spans = tag_text(text)
        starts = [s.start for s in spans]
        assert starts == sorted(starts)
        for s in spans:
            assert 0 <= s.start < s.end <= len(text)


class TestSegmentEdition:
    def test_three_openings(self):
        text = (
            "Mr. POE of Texas. Mr. Speaker. I rise today.\n"
            "Mr. BOEHNER. Madam President. I object to this.\n"
            "Ms. WATERS of California. Mr. Speaker. I support it.\n"
        )
        edition = DailyEdition(dt.date(2011, 6, 1), text)
        speeches = segment_edition(edition)
        attributed = [s for s in speeches if s.speaker_surname]
        assert [s.speaker_surname for s in attributed] == ["POE", "BOEHNER", "WATERS"]
        assert attributed[0].speaker_gpe == "Texas"
        assert attributed[1].speaker_gpe is None

    def test_preamble_kept_separate(self):
        text = "The House met at noon.\nMr. BOEHNER. Mr. Speaker. I yield back.\n"
        speeches = segment_edition(DailyEdition(dt.date(2011, 6, 1), text))
        assert speeches[0].speaker_surname is None
        assert speeches[1].speaker_surname == "BOEHNER"

    def test_coverage_reconstructs_raw_text(self):
        editions, _ = build_editions()
        for edition in editions:
            speeches = segment_edition(edition)
            rebuilt = "".join(s.opening + s.body for s in speeches)
            assert rebuilt == edition.raw_text

    def test_empty_edition(self):
        assert segment_edition(DailyEdition(dt.date(2011, 6, 1), "")) == []


class TestSentenceCount:
    def test_simple(self):
        assert count_sentences("One. Two. Three.") == 3

    def test_abbreviations_not_boundaries(self):
        assert count_sentences("Mr. Smith voted for H.R. 123 in the U.S. Senate.") == 1

    def test_question_and_exclamation(self):
        assert count_sentences("Really? Yes! Indeed.") == 3

    def test_empty(self):
        assert count_sentences("   ") == 0


class TestMatchName:
    def setup_method(self):
        self.roster = build_roster()

    def test_surname_and_state(self):
        key = match_name("POE", "Texas", self.roster)
        assert key == "P000"

    def test_unique_surname_without_gpe(self):
        assert match_name("BOEHNER", None, self.roster) == "P001"

    def test_ambiguous_without_gpe(self):
        roster = self.roster + [make_legislator("P999", last_name="Poe", state="OH")]
        with pytest.raises(AmbiguousName):
            match_name("POE", None, roster)

    def test_state_disambiguates(self):
        roster = self.roster + [make_legislator("P999", last_name="Poe", state="OH")]
        assert match_name("POE", "Texas", roster) == "P000"

    def test_not_found(self):
        with pytest.raises(NameNotFound):
            match_name("NOBODY", None, self.roster)

    def test_alias_table_wins(self):
        assert match_name("TEX", None, self.roster, {"TEX": "P000"}) == "P000"


class TestFilterSpeeches:
    def test_filters_and_counters(self):
        editions, expected = build_editions()
        roster = build_roster()
        speeches, citations, report = parse_editions(editions, roster, 112)
        assert report.kept == len(expected) == 25
        # One preamble and one too-short fodder speech per edition.
        assert report.no_author == len(editions)
        assert report.too_short == len(editions)
        assert report.too_long == 0

    def test_too_long_dropped(self):
        roster = build_roster()
        body = "This is a sentence number one of many. " * 501
        text = f"Mr. BOEHNER. Mr. Speaker. {body}"
        speeches = segment_edition(DailyEdition(dt.date(2011, 6, 1), text))
        kept = filter_speeches(speeches, roster, 112)
        assert kept == []

    def test_attribution_on_fixture_is_complete(self):
        editions, expected = build_editions()
        roster = build_roster()
        speeches, _, _ = parse_editions(editions, roster, 112)
        authors = [s.author_id for s in speeches]
        assert authors == [f"P{a:03d}" for a, _ in expected]


class TestCitations:
    def test_extraction_on_fixture(self):
        editions, expected = build_editions()
        roster = build_roster()
        speeches, citations, _ = parse_editions(editions, roster, 112)
        for speech, (_, cited) in zip(speeches, expected):
            if cited is None:
                assert speech.cited_ids == ()
            else:
                assert speech.cited_ids == (f"P{cited:03d}",)

    def test_lowercase_names_ignored(self):
        roster = build_roster()
        speech = Speech("s", "P001", dt.date(2011, 6, 1),
                        "Yesterday I met John Smith in the hall.", (), 112)
        assert extract_citations(speech, roster) == []

    def test_self_citation_excluded(self):
        roster = build_roster()
        speech = Speech("s", "P000", dt.date(2011, 6, 1),
                        "As Mr. POE of Texas said before.", (), 112)
        assert extract_citations(speech, roster) == []

    def test_duplicates_deduplicated(self):
        roster = build_roster()
        speech = Speech(
            "s", "P001", dt.date(2011, 6, 1),
            "I thank Mr. FARR for this. Again I thank Mr. FARR warmly.", (), 112,
        )
        assert extract_citations(speech, roster) == ["P005"]


class TestMaskCitation:
    def setup_method(self):
        self.roster = build_roster()
        self.speech = Speech(
            "s", "P001", dt.date(2011, 6, 1),
            "I agree with Mr. FARR. Mr. FARR is right.", ("P005",), 112,
        )

    def test_masks_every_mention(self):
        masked = mask_citation(self.speech, "P005", self.roster)
        assert masked.text == f"I agree with Mr. {MASK_TOKEN}. Mr. {MASK_TOKEN} is right."
        assert "FARR" not in masked.text

    def test_idempotent(self):
        once = mask_citation(self.speech, "P005", self.roster)
        twice = mask_citation(once, "P005", self.roster)
        assert once.text == twice.text

    def test_uncited_target_raises(self):
        with pytest.raises(TargetNotCited):
            mask_citation(self.speech, "P002", self.roster)

    @given(repeats=st.integers(min_value=1, max_value=8))
    @settings(deadline=None)
    def test_no_residual_mentions(self, repeats):
        text = "Mr. FARR spoke. " * repeats
        speech = Speech("s", "P001", dt.date(2011, 6, 1), text, ("P005",), 112)
        masked = mask_citation(speech, "P005", self.roster)
        assert "FARR" not in masked.text
        assert masked.text.count(MASK_TOKEN) == repeats
