import datetime as dt
import json

import numpy as np
import pytest

from legisrgcn.corpus import (
    Bill,
    Corpus,
    CosponsorshipRecord,
    Legislator,
    Party,
    SignatureKind,
    Speech,
)


def make_legislator(
    lid="L001",
    last_name="SMITH",
    party=Party.DEMOCRAT,
    state="TX",
    congress=112,
    **kwargs,
):
    defaults = dict(
        bioguide_id=lid,
        first_name="Jane",
        last_name=last_name,
        gender="F",
        age=50,
        party=party,
        state=state,
        district="1",
        congress=congress,
    )
    defaults.update(kwargs)
    return Legislator(**defaults)


@pytest.fixture
def tiny_corpus():
    """Two legislators, one bill, one speech, one cosponsorship."""
    corpus = Corpus()
    corpus.legislators["L001"] = make_legislator("L001", "SMITH", Party.DEMOCRAT)
    corpus.legislators["L002"] = make_legislator("L002", "JONES", Party.REPUBLICAN)
    corpus.bills["B001"] = Bill(
        bill_id="B001",
        title="An act",
        introduction_date=dt.date(2011, 3, 4),
        text="A bill to improve hospital insurance coverage for patients.",
        topic="healthcare",
        sponsor_id="L001",
        congress=112,
    )
    corpus.speeches["S001"] = Speech(
        speech_id="S001",
        author_id="L001",
        date=dt.date(2011, 3, 5),
        text="I rise in support of this measure. " * 12,
        cited_ids=("L002",),
        congress=112,
    )
    corpus.cosponsorships.append(
        CosponsorshipRecord(
            bill_id="B001",
            legislator_id="L002",
            signature_date=dt.date(2011, 3, 4),
            kind=SignatureKind.ACTIVE,
        )
    )
    return corpus


def write_corpus_files(corpus: Corpus, directory, congress=112):
    """Serialize a corpus to the JSONL schema plus a manifest.json."""
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "legislators.jsonl", "w") as handle:
        for l in corpus.legislators.values():
            handle.write(json.dumps({
                "bioguide_id": l.bioguide_id, "first_name": l.first_name,
                "last_name": l.last_name, "gender": l.gender, "age": l.age,
                "party": l.party.value, "state": l.state, "district": l.district,
                "congress": l.congress,
            }) + "\n")
    with open(directory / "bills.jsonl", "w") as handle:
        for b in corpus.bills.values():
            handle.write(json.dumps({
                "bill_id": b.bill_id, "title": b.title,
                "introduction_date": b.introduction_date.isoformat(),
                "text": b.text, "topic": b.topic, "sponsor_id": b.sponsor_id,
                "congress": b.congress,
            }) + "\n")
    with open(directory / "speeches.jsonl", "w") as handle:
        for s in corpus.speeches.values():
            handle.write(json.dumps({
                "speech_id": s.speech_id, "author_id": s.author_id,
                "date": s.date.isoformat(), "text": s.text,
                "cited_ids": list(s.cited_ids), "congress": s.congress,
            }) + "\n")
    with open(directory / "cosponsorships.jsonl", "w") as handle:
        for c in corpus.cosponsorships:
            handle.write(json.dumps({
                "bill_id": c.bill_id, "legislator_id": c.legislator_id,
                "signature_date": c.signature_date.isoformat(),
                "kind": c.kind.value,
            }) + "\n")
    with open(directory / "votes.jsonl", "w") as handle:
        for v in corpus.votes:
            handle.write(json.dumps({
                "bill_id": v.bill_id, "legislator_id": v.legislator_id,
                "vote": v.vote,
            }) + "\n")
    manifest = {
        str(congress): {
            "legislators": "legislators.jsonl",
            "bills": "bills.jsonl",
            "speeches": "speeches.jsonl",
            "cosponsorships": "cosponsorships.jsonl",
            "votes": "votes.jsonl",
        }
    }
    with open(directory / "manifest.json", "w") as handle:
        json.dump(manifest, handle)
    return directory / "manifest.json"


@pytest.fixture(scope="session")
def planted_corpus():
    from legisrgcn.synthetic import make_planted_corpus

    return make_planted_corpus(seed=7)


@pytest.fixture(scope="session")
def planted_split(planted_corpus):
    from legisrgcn.corpus import time_split

    return time_split(planted_corpus)


@pytest.fixture(scope="session")
def planted_embeddings(planted_corpus):
    from legisrgcn.encoder import DocumentEncoder, EncoderConfig, HashingBackend

    enc = DocumentEncoder(HashingBackend(seed=0), EncoderConfig(seed=0))
    bills = enc.encode_corpus(
        {b.bill_id: b.text for b in planted_corpus.bills.values()}, "bill"
    )
    speeches = enc.encode_corpus(
        {s.speech_id: s.text for s in planted_corpus.speeches.values()}, "speech"
    )
    return bills, speeches


@pytest.fixture(scope="session")
def planted_graph(planted_corpus, planted_split, planted_embeddings):
    from legisrgcn.graph import build_graph

    bills, speeches = planted_embeddings
    return build_graph(planted_corpus, planted_split, bills, speeches)
