"""Planted-pattern synthetic corpus for end-to-end learnability checks.

Bills are sponsored by the majority party. Active cosponsors share the
sponsor's party; passive cosponsors share the bill's topic and come from
across the aisle. Party is visible through legislator metadata; topic is
visible through bill texts and each legislator's speeches, so both planted
signals are recoverable by the pipeline.
"""

from __future__ import annotations

import datetime as dt

import numpy as np

from .corpus import (
    Bill,
    Corpus,
    CosponsorshipRecord,
    Legislator,
    Party,
    RollCallVote,
    SignatureKind,
    Speech,
)

TOPICS = {
    "healthcare": [
        "hospital", "insurance", "medicare", "patient", "clinic", "coverage",
        "physician", "premium", "treatment", "prescription",
    ],
    "defense": [
        "military", "armed", "veteran", "deployment", "missile", "readiness",
        "procurement", "base", "navy", "battalion",
    ],
    "energy": [
        "pipeline", "solar", "grid", "refinery", "renewable", "drilling",
        "emissions", "reactor", "fuel", "turbine",
    ],
    "education": [
        "school", "teacher", "tuition", "curriculum", "student", "literacy",
        "scholarship", "classroom", "district", "graduation",
    ],
}

_STATES = ["TX", "CA", "NY", "OH", "FL", "WA"]
_FILLER = [
    "the", "committee", "measure", "today", "support", "important", "members",
    "consider", "amendment", "national", "policy", "provide", "program",
]


def _topic_text(rng, topic: str, sentences: int, words_per_sentence: int = 9) -> str:
    vocab = TOPICS[topic]
    out = []
    for _ in range(sentences):
        words = [
            vocab[rng.integers(len(vocab))] if rng.random() < 0.5
            else _FILLER[rng.integers(len(_FILLER))]
            for _ in range(words_per_sentence)
        ]
        words[0] = words[0].capitalize()
        out.append(" ".join(words) + ".")
    return " ".join(out)


def make_planted_corpus(
    n_legislators: int = 30,
    n_bills: int = 100,
    n_speeches: int = 200,
    seed: int = 7,
    congress: int = 900,
    n_active: int = 4,
    n_passive: int = 4,
    with_votes: bool = True,
) -> Corpus:
    rng = np.random.default_rng(seed)
    topics = sorted(TOPICS)
    corpus = Corpus()

    parties = [Party.DEMOCRAT, Party.REPUBLICAN]
    leg_topic: dict[str, str] = {}
    for i in range(n_legislators):
        lid = f"L{i:03d}"
        party = parties[i % 2]
        topic = topics[i % len(topics)]
        leg_topic[lid] = topic
        corpus.legislators[lid] = Legislator(
            bioguide_id=lid,
            first_name=f"First{i}",
            last_name=f"SURNAME{i}",
            gender="F" if i % 3 == 0 else "M",
            age=int(35 + rng.integers(40)),
            party=party,
            state=_STATES[i % len(_STATES)],
            district=str(i % 9 + 1),
            congress=congress,
        )
    leg_ids = sorted(corpus.legislators)

    majority = [
        l for l in leg_ids if corpus.legislators[l].party == Party.DEMOCRAT
    ]
    start = dt.date(2011, 1, 3)
    for i in range(n_bills):
        bid = f"B{i:04d}"
        sponsor = majority[int(rng.integers(len(majority)))]
        topic = topics[int(rng.integers(len(topics)))]
        intro = start + dt.timedelta(days=int(i * (660 / n_bills)))
        corpus.bills[bid] = Bill(
            bill_id=bid,
            title=f"A bill about {topic} ({bid})",
            introduction_date=intro,
            text=_topic_text(rng, topic, sentences=12),
            topic=topic,
            sponsor_id=sponsor,
            congress=congress,
        )

    for i in range(n_speeches):
        sid = f"S{i:04d}"
        author = leg_ids[i % n_legislators]
        author_leg = corpus.legislators[author]
        # Cite a same-party colleague so the citation network is non-trivial.
        same_party = [
            l for l in leg_ids
            if l != author and corpus.legislators[l].party == author_leg.party
        ]
        cited = (same_party[int(rng.integers(len(same_party)))],) if same_party else ()
        corpus.speeches[sid] = Speech(
            speech_id=sid,
            author_id=author,
            date=start + dt.timedelta(days=int(i * (660 / n_speeches))),
            text=_topic_text(rng, leg_topic[author], sentences=12),
            cited_ids=cited,
            congress=congress,
        )

    for bill in corpus.bills.values():
        sponsor = corpus.legislators[bill.sponsor_id]
        active_pool = [
            l for l in leg_ids
            if l != bill.sponsor_id
            and corpus.legislators[l].party == sponsor.party
        ]
        passive_pool = [
            l for l in leg_ids
            if l != bill.sponsor_id
            and leg_topic[l] == bill.topic
            and corpus.legislators[l].party != sponsor.party
        ]
        rng.shuffle(active_pool)
        rng.shuffle(passive_pool)
        for l in active_pool[:n_active]:
            corpus.cosponsorships.append(
                CosponsorshipRecord(
                    bill_id=bill.bill_id,
                    legislator_id=l,
                    signature_date=bill.introduction_date,
                    kind=SignatureKind.ACTIVE,
                )
            )
        for l in passive_pool[:n_passive]:
            corpus.cosponsorships.append(
                CosponsorshipRecord(
                    bill_id=bill.bill_id,
                    legislator_id=l,
                    signature_date=bill.introduction_date
                    + dt.timedelta(days=int(1 + rng.integers(20))),
                    kind=SignatureKind.PASSIVE,
                )
            )

    if with_votes:
        cosponsor_pairs = {(c.bill_id, c.legislator_id) for c in corpus.cosponsorships}
        for bill in corpus.bills.values():
            sponsor = corpus.legislators[bill.sponsor_id]
            for l in leg_ids:
                if l == bill.sponsor_id or (bill.bill_id, l) in cosponsor_pairs:
                    continue
                if rng.random() > 0.3:
                    continue
                aligned = (
                    corpus.legislators[l].party == sponsor.party
                    or leg_topic[l] == bill.topic
                )
                vote = "yea" if (aligned or rng.random() < 0.15) else "nay"
                corpus.votes.append(
                    RollCallVote(bill_id=bill.bill_id, legislator_id=l, vote=vote)
                )
    return corpus
