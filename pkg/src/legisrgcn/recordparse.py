"""Daily-edition segmentation, speaker attribution, citations, and masking."""

from __future__ import annotations

import datetime as dt
import enum
import re
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Protocol, Sequence

from .corpus import Legislator, Speech


class ParseError(Exception):
    pass


class AmbiguousName(ParseError):
    """A surname (with optional state) matches two or more roster members."""


class NameNotFound(ParseError):
    """A surname matches nobody on the roster."""


class TargetNotCited(ParseError):
    """Masking was requested for a legislator the speech does not cite."""


class Tag(str, enum.Enum):
    PERSON = "PERSON"
    GPE = "GPE"
    SAL = "SAL"
    ROLE = "ROLE"


@dataclass(frozen=True)
class TaggedSpan:
    start: int
    end: int
    tag: Tag

    def text(self, source: str) -> str:
        return source[self.start : self.end]


@dataclass(frozen=True)
class DailyEdition:
    date: dt.date
    raw_text: str


@dataclass(frozen=True)
class SegmentedSpeech:
    speaker_surname: Optional[str]  # None for the author-less preamble
    speaker_gpe: Optional[str]
    opening: str
    body: str
    source_date: dt.date


class EntityTagger(Protocol):
    def tag(self, text: str) -> list[TaggedSpan]: ...


SALUTATIONS = ("Mr", "Mrs", "Ms", "Madam")
ROLES = ("Speaker", "President", "Chairman", "Chairwoman", "Clerk")

_SAL_RE = re.compile(r"\b(?:%s)\.?(?=\s)" % "|".join(SALUTATIONS))
_ROLE_RE = re.compile(r"\b(?:%s)\b" % "|".join(ROLES))
# Upper-case token runs: legislator names are printed in upper case.
_PERSON_RE = re.compile(r"[A-Z][A-Z'’-]+(?:\s+[A-Z][A-Z'’-]+)*")
_GPE_RE = re.compile(r"\s+of\s+([A-Z][a-z]+(?:\s+[A-Z][a-z]+)*)")


class RuleBasedTagger:
    """Lexicon/pattern tagger used when no external entity recognizer is wired in.

    PERSON spans are all-caps token runs following a salutation; GPE is the
    "of <State>" continuation right after a PERSON span.
    """

    def tag(self, text: str) -> list[TaggedSpan]:
        spans: list[TaggedSpan] = []
        for match in _SAL_RE.finditer(text):
            spans.append(TaggedSpan(match.start(), match.end(), Tag.SAL))
            person = self._person_after(text, match.end())
            if person is not None:
                spans.append(person)
                gpe = _GPE_RE.match(text, person.end)
                if gpe is not None:
                    spans.append(TaggedSpan(gpe.start(1), gpe.end(1), Tag.GPE))
        for match in _ROLE_RE.finditer(text):
            spans.append(TaggedSpan(match.start(), match.end(), Tag.ROLE))
        spans.sort(key=lambda s: (s.start, s.end))
        return spans

    @staticmethod
    def _person_after(text: str, offset: int) -> Optional[TaggedSpan]:
        ws = re.match(r"\s+", text[offset:])
        if ws is None:
            return None
        start = offset + ws.end()
        match = _PERSON_RE.match(text, start)
        if match is None:
            return None
        return TaggedSpan(match.start(), match.end(), Tag.PERSON)


def tag_text(text: str, tagger: EntityTagger | None = None) -> list[TaggedSpan]:
    """Tag salutations, persons, geopolitical entities, and roles in `text`."""
    tagger = tagger if tagger is not None else RuleBasedTagger()
    return tagger.tag(text)


def _find_openings(text: str, spans: Sequence[TaggedSpan]) -> list[tuple[int, int, str, Optional[str]]]:
    """Locate speech openings: SAL PERSON (GPE)? SAL ROLE with only
    punctuation/whitespace between consecutive spans.

    Returns (start, end, surname, gpe) tuples sorted by start.
    """
    openings = []
    spans = sorted(spans, key=lambda s: (s.start, s.end))
    n = len(spans)
    i = 0
    while i < n:
        window = spans[i : i + 5]
        tags = [s.tag for s in window]
        matched = None
        if tags[:5] == [Tag.SAL, Tag.PERSON, Tag.GPE, Tag.SAL, Tag.ROLE]:
            matched = window[:5]
            gpe = window[2].text(text)
        elif tags[:4] == [Tag.SAL, Tag.PERSON, Tag.SAL, Tag.ROLE]:
            matched = window[:4]
            gpe = None
        if matched is not None and _gaps_are_punctuation(text, matched):
            end = matched[-1].end
            # Consume the sentence-final period of the opening when present.
            if end < len(text) and text[end] == ".":
                end += 1
            openings.append((matched[0].start, end, matched[1].text(text), gpe))
            i += len(matched)
        else:
            i += 1
    return openings


def _gaps_are_punctuation(text: str, spans: Sequence[TaggedSpan]) -> bool:
    for prev, cur in zip(spans, spans[1:]):
        gap = text[prev.end : cur.start]
        if re.fullmatch(r"[\s.,;:]*(?:of\s+)?", gap) is None:
            return False
    return True


def segment_edition(
    edition: DailyEdition, tagger: EntityTagger | None = None
) -> list[SegmentedSpeech]:
    """Split a daily edition into speaker-attributed speeches.

    Text before the first opening becomes an author-less preamble speech.
    Concatenating openings and bodies (plus preamble) reproduces the raw text.
    """
    text = edition.raw_text
    spans = tag_text(text, tagger)
    openings = _find_openings(text, spans)
    speeches: list[SegmentedSpeech] = []
    if not openings:
        if text:
            speeches.append(SegmentedSpeech(None, None, "", text, edition.date))
        return speeches
    first_start = openings[0][0]
    if first_start > 0:
        speeches.append(
            SegmentedSpeech(None, None, "", text[:first_start], edition.date)
        )
    for idx, (start, end, surname, gpe) in enumerate(openings):
        body_end = openings[idx + 1][0] if idx + 1 < len(openings) else len(text)
        speeches.append(
            SegmentedSpeech(
                speaker_surname=surname,
                speaker_gpe=gpe,
                opening=text[start:end],
                body=text[end:body_end],
                source_date=edition.date,
            )
        )
    return speeches


# Tokens that end with a period without ending a sentence.
_ABBREVIATIONS = frozenset({"Mr.", "Mrs.", "Ms.", "U.S.", "H.R.", "S."})

_BOUNDARY_RE = re.compile(r"[.?!]+(?=\s+[A-Z\"'(])")


def count_sentences(text: str) -> int:
    """Sentence count: terminal punctuation before whitespace and an upper-case
    letter, with an abbreviation stop-list."""
    if not text.strip():
        return 0
    boundaries = 0
    for match in _BOUNDARY_RE.finditer(text):
        prefix = text[: match.end()]
        last_token = prefix.rsplit(None, 1)[-1]
        if last_token in _ABBREVIATIONS:
            continue
        boundaries += 1
    return boundaries + 1 if _has_trailing_content(text) else boundaries


def _has_trailing_content(text: str) -> bool:
    matches = list(_BOUNDARY_RE.finditer(text))
    tail_start = matches[-1].end() if matches else 0
    tail = text[tail_start:]
    return bool(re.search(r"\w", tail)) or not matches


# Full state names as printed in "of Texas" openings, mapped to USPS codes.
STATE_CODES = {
    "Alabama": "AL", "Alaska": "AK", "Arizona": "AZ", "Arkansas": "AR",
    "California": "CA", "Colorado": "CO", "Connecticut": "CT", "Delaware": "DE",
    "Florida": "FL", "Georgia": "GA", "Hawaii": "HI", "Idaho": "ID",
    "Illinois": "IL", "Indiana": "IN", "Iowa": "IA", "Kansas": "KS",
    "Kentucky": "KY", "Louisiana": "LA", "Maine": "ME", "Maryland": "MD",
    "Massachusetts": "MA", "Michigan": "MI", "Minnesota": "MN",
    "Mississippi": "MS", "Missouri": "MO", "Montana": "MT", "Nebraska": "NE",
    "Nevada": "NV", "New Hampshire": "NH", "New Jersey": "NJ",
    "New Mexico": "NM", "New York": "NY", "North Carolina": "NC",
    "North Dakota": "ND", "Ohio": "OH", "Oklahoma": "OK", "Oregon": "OR",
    "Pennsylvania": "PA", "Rhode Island": "RI", "South Carolina": "SC",
    "South Dakota": "SD", "Tennessee": "TN", "Texas": "TX", "Utah": "UT",
    "Vermont": "VT", "Virginia": "VA", "Washington": "WA",
    "West Virginia": "WV", "Wisconsin": "WI", "Wyoming": "WY",
}


def _state_matches(roster_state: str, gpe: str) -> bool:
    code = STATE_CODES.get(gpe, gpe)
    return roster_state.upper() in (code.upper(), gpe.upper())


def match_name(
    surname: str,
    gpe: Optional[str],
    roster: Sequence[Legislator],
    aliases: Mapping[str, str] | None = None,
) -> str:
    """Resolve a printed surname (and optional state) to a bioguide_id.

    Precedence: alias table, then (surname, state), then surname alone; the
    first rule yielding a unique candidate wins.
    """
    surname_uc = surname.upper()
    if aliases and surname_uc in {k.upper() for k in aliases}:
        for key, value in aliases.items():
            if key.upper() == surname_uc:
                return value
    by_surname = [l for l in roster if l.last_name.upper() == surname_uc]
    if gpe is not None:
        by_state = [l for l in by_surname if _state_matches(l.state, gpe)]
        if len(by_state) == 1:
            return by_state[0].bioguide_id
        if len(by_state) > 1:
            raise AmbiguousName(f"{surname} of {gpe}: {len(by_state)} candidates")
    if len(by_surname) == 1:
        return by_surname[0].bioguide_id
    if len(by_surname) > 1:
        raise AmbiguousName(f"{surname}: {len(by_surname)} candidates")
    raise NameNotFound(surname)


@dataclass
class DropReport:
    no_author: int = 0
    too_short: int = 0
    too_long: int = 0
    unresolved_citations: int = 0
    kept: int = 0

    def to_json(self) -> dict:
        return {
            "no-author": self.no_author,
            "too-short": self.too_short,
            "too-long": self.too_long,
            "unresolved-citations": self.unresolved_citations,
            "kept": self.kept,
        }


def filter_speeches(
    segmented: Sequence[SegmentedSpeech],
    roster: Sequence[Legislator],
    congress: int,
    aliases: Mapping[str, str] | None = None,
    min_sentences: int = 10,
    max_sentences: int = 500,
    tagger: EntityTagger | None = None,
    report: DropReport | None = None,
    id_prefix: str = "",
) -> list[Speech]:
    """Keep speeches with a resolved author and an in-range sentence count.

    Citations are extracted from retained speeches only.
    """
    report = report if report is not None else DropReport()
    kept: list[Speech] = []
    for index, seg in enumerate(segmented):
        if seg.speaker_surname is None:
            report.no_author += 1
            continue
        try:
            author = match_name(seg.speaker_surname, seg.speaker_gpe, roster, aliases)
        except (AmbiguousName, NameNotFound):
            report.no_author += 1
            continue
        sentences = count_sentences(seg.body)
        if sentences < min_sentences:
            report.too_short += 1
            continue
        if sentences > max_sentences:
            report.too_long += 1
            continue
        speech_id = f"{id_prefix}{seg.source_date.isoformat()}-{index:04d}"
        speech = Speech(
            speech_id=speech_id,
            author_id=author,
            date=seg.source_date,
            text=seg.body,
            cited_ids=(),
            congress=congress,
        )
        cited = extract_citations(speech, roster, aliases, tagger, report)
        kept.append(replace(speech, cited_ids=tuple(cited)))
        report.kept += 1
    return kept


def extract_citations(
    speech: Speech,
    roster: Sequence[Legislator],
    aliases: Mapping[str, str] | None = None,
    tagger: EntityTagger | None = None,
    report: DropReport | None = None,
) -> list[str]:
    """Roster keys of upper-case name mentions in the speech body.

    Self-citations are excluded; repeat mentions are deduplicated; names that
    resolve to nobody are counted and skipped.
    """
    spans = tag_text(speech.text, tagger)
    cited: list[str] = []
    span_by_start = {s.start: s for s in spans if s.tag == Tag.GPE}
    for span in spans:
        if span.tag != Tag.PERSON:
            continue
        gpe_span = _gpe_following(spans, span)
        surname = span.text(speech.text)
        gpe = gpe_span.text(speech.text) if gpe_span else None
        try:
            key = match_name(surname, gpe, roster, aliases)
        except (AmbiguousName, NameNotFound):
            if report is not None:
                report.unresolved_citations += 1
            continue
        if key == speech.author_id or key in cited:
            continue
        cited.append(key)
    return cited


def _gpe_following(
    spans: Sequence[TaggedSpan], person: TaggedSpan
) -> Optional[TaggedSpan]:
    for span in spans:
        if span.tag == Tag.GPE and 0 <= span.start - person.end <= 6:
            return span
    return None


MASK_TOKEN = "<LEG>"


def mask_citation(speech: Speech, target: str, roster: Sequence[Legislator]) -> Speech:
    """Replace every surface mention of the cited target's name with <LEG>."""
    if target not in speech.cited_ids:
        raise TargetNotCited(f"{target} not cited in {speech.speech_id}")
    surnames = {l.last_name.upper() for l in roster if l.bioguide_id == target}
    if not surnames:
        raise NameNotFound(target)
    text = speech.text
    for surname in surnames:
        text = re.sub(r"\b%s\b" % re.escape(surname), MASK_TOKEN, text)
    return replace(speech, text=text)


def parse_editions(
    editions: Sequence[DailyEdition],
    roster: Sequence[Legislator],
    congress: int,
    aliases: Mapping[str, str] | None = None,
    tagger: EntityTagger | None = None,
) -> tuple[list[Speech], list[tuple[str, str, str]], DropReport]:
    """Full parse pipeline: segment, attribute, filter, extract citations.

    Returns (speeches, citation rows (citing_id, cited_id, speech_id), report).
    """
    report = DropReport()
    speeches: list[Speech] = []
    for edition in sorted(editions, key=lambda e: e.date):
        segmented = segment_edition(edition, tagger)
        speeches.extend(
            filter_speeches(
                segmented, roster, congress, aliases,
                tagger=tagger, report=report,
                id_prefix="",
            )
        )
    citations = [
        (s.author_id, cited, s.speech_id) for s in speeches for cited in s.cited_ids
    ]
    return speeches, citations, report
