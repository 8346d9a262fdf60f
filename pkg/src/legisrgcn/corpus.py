"""Domain data model, JSONL corpus loading, labeling, and time-based splits."""

from __future__ import annotations

import datetime as dt
import enum
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, Mapping

log = logging.getLogger(__name__)


class CorpusError(Exception):
    pass


class SchemaError(CorpusError):
    """Malformed record in an input file."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class DanglingReference(CorpusError):
    """A record references an unknown legislator or bill key."""


class InvalidTimeline(CorpusError):
    """A cosponsorship signature precedes the bill's introduction."""


class EmptyCongress(CorpusError):
    """A Congress present in the corpus carries no splittable events."""


class Party(str, enum.Enum):
    DEMOCRAT = "Democrat"
    REPUBLICAN = "Republican"
    OTHER = "Other"

    @classmethod
    def parse(cls, value: str) -> "Party":
        # Real rosters contain independents and third parties; map them to OTHER.
        try:
            return cls(value)
        except ValueError:
            return cls.OTHER


class SignatureKind(str, enum.Enum):
    ACTIVE = "active"
    PASSIVE = "passive"


class Split(str, enum.Enum):
    TRAIN = "train"
    VALIDATION = "validation"
    TEST = "test"


@dataclass(frozen=True)
class Legislator:
    bioguide_id: str
    first_name: str
    last_name: str
    gender: str
    age: int
    party: Party
    state: str
    district: str
    congress: int


@dataclass(frozen=True)
class Bill:
    bill_id: str
    title: str
    introduction_date: dt.date
    text: str
    topic: str
    sponsor_id: str
    congress: int


@dataclass(frozen=True)
class CosponsorshipRecord:
    bill_id: str
    legislator_id: str
    signature_date: dt.date
    kind: SignatureKind

    @property
    def pair(self) -> tuple[str, str]:
        return (self.bill_id, self.legislator_id)


@dataclass(frozen=True)
class Speech:
    speech_id: str
    author_id: str
    date: dt.date
    text: str
    cited_ids: tuple[str, ...]
    congress: int


@dataclass(frozen=True)
class RollCallVote:
    bill_id: str
    legislator_id: str
    vote: str  # "yea" | "nay"


@dataclass
class Corpus:
    legislators: dict[str, Legislator] = field(default_factory=dict)
    bills: dict[str, Bill] = field(default_factory=dict)
    speeches: dict[str, Speech] = field(default_factory=dict)
    cosponsorships: list[CosponsorshipRecord] = field(default_factory=list)
    votes: list[RollCallVote] = field(default_factory=list)

    def congresses(self) -> list[int]:
        sessions = {l.congress for l in self.legislators.values()}
        sessions |= {b.congress for b in self.bills.values()}
        return sorted(sessions)

    def roster(self, congress: int) -> list[Legislator]:
        return [l for l in self.legislators.values() if l.congress == congress]

    def cosponsors_of(self, bill_id: str) -> set[str]:
        return {c.legislator_id for c in self.cosponsorships if c.bill_id == bill_id}

    def stats(self) -> dict:
        per_congress = {}
        for congress in self.congresses():
            bills = [b for b in self.bills.values() if b.congress == congress]
            bill_ids = {b.bill_id for b in bills}
            cosp = [c for c in self.cosponsorships if c.bill_id in bill_ids]
            per_congress[congress] = {
                "bills": len(bills),
                "active": sum(1 for c in cosp if c.kind == SignatureKind.ACTIVE),
                "passive": sum(1 for c in cosp if c.kind == SignatureKind.PASSIVE),
                "speeches": sum(
                    1 for s in self.speeches.values() if s.congress == congress
                ),
            }
        return {
            "legislators": len(self.legislators),
            "bills": len(self.bills),
            "speeches": len(self.speeches),
            "cosponsorships": len(self.cosponsorships),
            "votes": len(self.votes),
            "per_congress": per_congress,
        }


def assign_kind(signature_date: dt.date, introduction_date: dt.date) -> SignatureKind:
    """Label a signature: active iff recorded on the bill's introduction date."""
    if signature_date < introduction_date:
        raise InvalidTimeline(
            f"signature {signature_date} precedes introduction {introduction_date}"
        )
    if signature_date == introduction_date:
        return SignatureKind.ACTIVE
    return SignatureKind.PASSIVE


def _parse_date(value, path, line_no) -> dt.date:
    try:
        return dt.date.fromisoformat(value)
    except (TypeError, ValueError):
        raise SchemaError(path, line_no, f"bad ISO-8601 date: {value!r}")


def _read_jsonl(path: Path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(path, line_no, f"invalid JSON: {exc}")
            if not isinstance(obj, dict):
                raise SchemaError(path, line_no, "record is not an object")
            yield line_no, obj


def _require(obj: dict, keys: Iterable[str], path, line_no) -> None:
    missing = [k for k in keys if k not in obj]
    if missing:
        raise SchemaError(path, line_no, f"missing fields: {missing}")


def _load_legislators(path: Path, congress: int, corpus: Corpus) -> None:
    for line_no, obj in _read_jsonl(path):
        _require(
            obj,
            ["bioguide_id", "first_name", "last_name", "gender", "age", "party",
             "state", "district"],
            path,
            line_no,
        )
        age = obj["age"]
        if not isinstance(age, int) or age <= 0:
            raise SchemaError(path, line_no, f"age must be a positive integer: {age!r}")
        leg = Legislator(
            bioguide_id=obj["bioguide_id"],
            first_name=obj["first_name"],
            last_name=obj["last_name"],
            gender=obj["gender"],
            age=age,
            party=Party.parse(obj["party"]),
            state=obj["state"],
            district=str(obj["district"]),
            congress=int(obj.get("congress", congress)),
        )
        key = (leg.bioguide_id, leg.congress)
        if any(
            l.bioguide_id == leg.bioguide_id and l.congress == leg.congress
            for l in corpus.legislators.values()
        ):
            raise SchemaError(path, line_no, f"duplicate bioguide_id {leg.bioguide_id}")
        corpus.legislators[leg.bioguide_id] = leg


def _load_bills(path: Path, congress: int, corpus: Corpus) -> None:
    for line_no, obj in _read_jsonl(path):
        _require(
            obj,
            ["bill_id", "title", "introduction_date", "text", "topic", "sponsor_id"],
            path,
            line_no,
        )
        if not obj["text"]:
            raise SchemaError(path, line_no, f"bill {obj['bill_id']} has empty text")
        bill = Bill(
            bill_id=obj["bill_id"],
            title=obj["title"],
            introduction_date=_parse_date(obj["introduction_date"], path, line_no),
            text=obj["text"],
            topic=obj["topic"],
            sponsor_id=obj["sponsor_id"],
            congress=int(obj.get("congress", congress)),
        )
        if bill.bill_id in corpus.bills:
            raise SchemaError(path, line_no, f"duplicate bill_id {bill.bill_id}")
        corpus.bills[bill.bill_id] = bill


def _load_speeches(path: Path, congress: int, corpus: Corpus) -> None:
    for line_no, obj in _read_jsonl(path):
        _require(obj, ["speech_id", "author_id", "date", "text"], path, line_no)
        speech = Speech(
            speech_id=obj["speech_id"],
            author_id=obj["author_id"],
            date=_parse_date(obj["date"], path, line_no),
            text=obj["text"],
            cited_ids=tuple(obj.get("cited_ids", [])),
            congress=int(obj.get("congress", congress)),
        )
        if speech.speech_id in corpus.speeches:
            raise SchemaError(path, line_no, f"duplicate speech_id {speech.speech_id}")
        corpus.speeches[speech.speech_id] = speech


def _load_cosponsorships(path: Path, corpus: Corpus) -> None:
    for line_no, obj in _read_jsonl(path):
        _require(obj, ["bill_id", "legislator_id", "signature_date"], path, line_no)
        bill = corpus.bills.get(obj["bill_id"])
        if bill is None:
            raise DanglingReference(
                f"{path}:{line_no}: cosponsorship references unknown bill "
                f"{obj['bill_id']!r}"
            )
        if obj["legislator_id"] not in corpus.legislators:
            raise DanglingReference(
                f"{path}:{line_no}: cosponsorship references unknown legislator "
                f"{obj['legislator_id']!r}"
            )
        signature = _parse_date(obj["signature_date"], path, line_no)
        kind = assign_kind(signature, bill.introduction_date)
        declared = obj.get("kind")
        if declared is not None and declared != kind.value:
            # Kind is recomputed from the two dates; the upstream field is advisory.
            log.warning(
                "%s:%d: declared kind %r disagrees with recomputed %r; using recomputed",
                path, line_no, declared, kind.value,
            )
        if obj["legislator_id"] == bill.sponsor_id:
            raise SchemaError(
                path, line_no, f"sponsor {bill.sponsor_id} cosponsoring own bill"
            )
        corpus.cosponsorships.append(
            CosponsorshipRecord(
                bill_id=obj["bill_id"],
                legislator_id=obj["legislator_id"],
                signature_date=signature,
                kind=kind,
            )
        )


def _load_votes(path: Path, corpus: Corpus) -> None:
    seen = set()
    for line_no, obj in _read_jsonl(path):
        _require(obj, ["bill_id", "legislator_id", "vote"], path, line_no)
        if obj["bill_id"] not in corpus.bills:
            raise DanglingReference(
                f"{path}:{line_no}: vote references unknown bill {obj['bill_id']!r}"
            )
        if obj["legislator_id"] not in corpus.legislators:
            raise DanglingReference(
                f"{path}:{line_no}: vote references unknown legislator "
                f"{obj['legislator_id']!r}"
            )
        if obj["vote"] not in ("yea", "nay"):
            raise SchemaError(path, line_no, f"vote must be yea/nay: {obj['vote']!r}")
        pair = (obj["bill_id"], obj["legislator_id"])
        if pair in seen:
            raise SchemaError(path, line_no, f"duplicate vote for pair {pair}")
        seen.add(pair)
        corpus.votes.append(
            RollCallVote(
                bill_id=obj["bill_id"],
                legislator_id=obj["legislator_id"],
                vote=obj["vote"],
            )
        )


_FILE_KEYS = ("legislators", "bills", "speeches", "cosponsorships", "votes")


def load_corpus_files(
    paths: Mapping[str, Path], congress: int, corpus: Corpus | None = None
) -> Corpus:
    """Load one Congress worth of JSONL files into a corpus.

    `paths` maps file kinds ("legislators", "bills", ...) to paths; speeches
    and votes are optional.
    """
    corpus = corpus if corpus is not None else Corpus()
    if "legislators" in paths:
        _load_legislators(Path(paths["legislators"]), congress, corpus)
    if "bills" in paths:
        _load_bills(Path(paths["bills"]), congress, corpus)
    if "speeches" in paths:
        _load_speeches(Path(paths["speeches"]), congress, corpus)
    if "cosponsorships" in paths:
        _load_cosponsorships(Path(paths["cosponsorships"]), corpus)
    if "votes" in paths:
        _load_votes(Path(paths["votes"]), corpus)
    return corpus


def load_corpus(manifest_path: Path) -> Corpus:
    """Load a multi-Congress corpus described by a manifest.json file.

    The manifest maps Congress numbers to file paths, relative to the
    manifest's directory.
    """
    manifest_path = Path(manifest_path)
    with open(manifest_path, encoding="utf-8") as handle:
        manifest = json.load(handle)
    base = manifest_path.parent
    corpus = Corpus()
    for congress_str in sorted(manifest, key=int):
        entry = manifest[congress_str]
        paths = {k: base / v for k, v in entry.items() if k in _FILE_KEYS}
        load_corpus_files(paths, int(congress_str), corpus)
    report = integrity_report(corpus)
    log.info("loaded corpus: %s", report)
    return corpus


def integrity_report(corpus: Corpus) -> dict:
    """Cross-reference check; raises DanglingReference on failure."""
    for bill in corpus.bills.values():
        if bill.sponsor_id not in corpus.legislators:
            raise DanglingReference(
                f"bill {bill.bill_id} sponsored by unknown {bill.sponsor_id!r}"
            )
    for speech in corpus.speeches.values():
        if speech.author_id not in corpus.legislators:
            raise DanglingReference(
                f"speech {speech.speech_id} authored by unknown {speech.author_id!r}"
            )
        for cited in speech.cited_ids:
            if cited not in corpus.legislators:
                raise DanglingReference(
                    f"speech {speech.speech_id} cites unknown {cited!r}"
                )
    return {"records_checked": len(corpus.bills) + len(corpus.speeches), "ok": True}


def filter_bills(corpus: Corpus, min_cosponsors: int = 1) -> Corpus:
    """Drop bills with fewer than `min_cosponsors` signatures; prune dependents."""
    if min_cosponsors < 1:
        raise ValueError("min_cosponsors must be >= 1")
    counts: dict[str, int] = {}
    for record in corpus.cosponsorships:
        counts[record.bill_id] = counts.get(record.bill_id, 0) + 1
    kept = {
        bid: bill
        for bid, bill in corpus.bills.items()
        if counts.get(bid, 0) >= min_cosponsors
    }
    return Corpus(
        legislators=dict(corpus.legislators),
        bills=kept,
        speeches=dict(corpus.speeches),
        cosponsorships=[c for c in corpus.cosponsorships if c.bill_id in kept],
        votes=[v for v in corpus.votes if v.bill_id in kept],
    )


@dataclass
class SplitAssignment:
    """Per-Congress chronological partition of corpus events."""

    cosponsorships: dict[tuple[str, str], Split] = field(default_factory=dict)
    bills: dict[str, Split] = field(default_factory=dict)
    speeches: dict[str, Split] = field(default_factory=dict)

    def cosponsorship_records(
        self, corpus: Corpus, split: Split
    ) -> list[CosponsorshipRecord]:
        return [c for c in corpus.cosponsorships if self.cosponsorships[c.pair] == split]

    def to_json(self) -> dict:
        return {
            "cosponsorships": {
                f"{b}|{l}": s.value for (b, l), s in self.cosponsorships.items()
            },
            "bills": {k: s.value for k, s in self.bills.items()},
            "speeches": {k: s.value for k, s in self.speeches.items()},
        }


def _split_counts(n: int, fractions: tuple[float, float, float]) -> list[int]:
    # Floor each share, then hand leftovers to the earliest split first.
    counts = [math.floor(f * n) for f in fractions]
    leftover = n - sum(counts)
    for i in range(leftover):
        counts[i % 3] += 1
    return counts


def _chronological_cut(
    items: list[tuple[dt.date, str]], fractions: tuple[float, float, float]
) -> dict[str, Split]:
    ordered = sorted(items)  # (timestamp, stable key)
    counts = _split_counts(len(ordered), fractions)
    out: dict[str, Split] = {}
    idx = 0
    for split, count in zip((Split.TRAIN, Split.VALIDATION, Split.TEST), counts):
        for _, key in ordered[idx : idx + count]:
            out[key] = split
        idx += count
    return out


def time_split(
    corpus: Corpus, fractions: tuple[float, float, float] = (0.6, 0.2, 0.2)
) -> SplitAssignment:
    """Chronological per-Congress partition of events into train/val/test.

    Cosponsorships split by signature date, bills by introduction date, and
    speeches by speech date, all within their Congress.
    """
    if any(f <= 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"fractions must be positive and sum to 1: {fractions}")
    assignment = SplitAssignment()
    for congress in corpus.congresses():
        bill_ids = {b.bill_id for b in corpus.bills.values() if b.congress == congress}
        cosp = [c for c in corpus.cosponsorships if c.bill_id in bill_ids]
        bills = [corpus.bills[b] for b in bill_ids]
        speeches = [s for s in corpus.speeches.values() if s.congress == congress]
        if not (cosp or bills or speeches):
            raise EmptyCongress(f"Congress {congress} has no events to split")
        cut = _chronological_cut(
            [(c.signature_date, f"{c.bill_id}|{c.legislator_id}") for c in cosp],
            fractions,
        )
        for c in cosp:
            assignment.cosponsorships[c.pair] = cut[f"{c.bill_id}|{c.legislator_id}"]
        bill_cut = _chronological_cut(
            [(b.introduction_date, b.bill_id) for b in bills], fractions
        )
        assignment.bills.update({k: bill_cut[k] for k in bill_cut})
        speech_cut = _chronological_cut(
            [(s.date, s.speech_id) for s in speeches], fractions
        )
        assignment.speeches.update(speech_cut)
    return assignment
