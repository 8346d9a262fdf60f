"""Multi-relational heterogeneous graph over speeches, legislators, and bills."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .corpus import Corpus, Legislator, Split, SplitAssignment


class GraphError(Exception):
    pass


class MissingEmbedding(GraphError):
    pass


class NodeType(str, enum.Enum):
    SPEECH = "S"
    LEGISLATOR = "L"
    BILL = "B"


class Relation(str, enum.Enum):
    AUTHORSHIP = "R1"           # L -> S
    CITATION = "R2"             # L -> L (directed)
    SPONSORSHIP = "R3"          # L -> B
    ACTIVE_COSPONSORSHIP = "R4"   # L -> B
    PASSIVE_COSPONSORSHIP = "R5"  # L -> B


# Endpoint typing table per relation.
RELATION_TYPES: dict[Relation, tuple[NodeType, NodeType]] = {
    Relation.AUTHORSHIP: (NodeType.LEGISLATOR, NodeType.SPEECH),
    Relation.CITATION: (NodeType.LEGISLATOR, NodeType.LEGISLATOR),
    Relation.SPONSORSHIP: (NodeType.LEGISLATOR, NodeType.BILL),
    Relation.ACTIVE_COSPONSORSHIP: (NodeType.LEGISLATOR, NodeType.BILL),
    Relation.PASSIVE_COSPONSORSHIP: (NodeType.LEGISLATOR, NodeType.BILL),
}

# Citation stays directed; all other relations get reverse copies with their
# own weights inside the message-passing model.
SYMMETRIZED = (
    Relation.AUTHORSHIP,
    Relation.SPONSORSHIP,
    Relation.ACTIVE_COSPONSORSHIP,
    Relation.PASSIVE_COSPONSORSHIP,
)


@dataclass(frozen=True)
class NodeRef:
    node_type: NodeType
    key: str


@dataclass(frozen=True)
class TypedEdge:
    source: NodeRef
    target: NodeRef
    relation: Relation

    def __post_init__(self):
        expected = RELATION_TYPES[self.relation]
        actual = (self.source.node_type, self.target.node_type)
        if actual != expected:
            raise GraphError(
                f"{self.relation.value} expects {expected}, got {actual}"
            )


class FeatureCodec:
    """Concatenated one-hot encoding of legislator metadata.

    Blocks: party, state, gender, district bucket (state+district string),
    and age decile. Vocabularies are built once per corpus roster so all
    vectors share one width.
    """

    N_BLOCKS = 5

    def __init__(self, roster: list[Legislator]):
        if not roster:
            raise GraphError("empty roster")
        self.parties = ["Democrat", "Republican", "Other"]
        self.states = sorted({l.state for l in roster})
        self.genders = sorted({l.gender for l in roster})
        self.districts = sorted({f"{l.state}-{l.district}" for l in roster})
        ages = np.array([l.age for l in roster], dtype=float)
        # Decile boundaries over the corpus roster's age distribution.
        self.age_edges = np.percentile(ages, np.arange(10, 100, 10))
        self.width = (
            len(self.parties)
            + len(self.states)
            + len(self.genders)
            + len(self.districts)
            + 10
        )

    def encode(self, legislator: Legislator) -> np.ndarray:
        vec = np.zeros(self.width, dtype=np.float32)
        offset = 0
        for vocab, value in (
            (self.parties, legislator.party.value),
            (self.states, legislator.state),
            (self.genders, legislator.gender),
            (self.districts, f"{legislator.state}-{legislator.district}"),
        ):
            vec[offset + vocab.index(value)] = 1.0
            offset += len(vocab)
        decile = int(np.searchsorted(self.age_edges, legislator.age, side="right"))
        vec[offset + decile] = 1.0
        return vec


def encode_legislator_features(
    legislator: Legislator, codec: FeatureCodec
) -> np.ndarray:
    return codec.encode(legislator)


@dataclass
class HeteroGraph:
    node_keys: dict[NodeType, list[str]]
    features: dict[NodeType, np.ndarray]
    edges: list[TypedEdge]
    index: dict[NodeType, dict[str, int]] = field(init=False)

    def __post_init__(self):
        self.index = {
            t: {k: i for i, k in enumerate(keys)} for t, keys in self.node_keys.items()
        }
        seen = set()
        for edge in self.edges:
            triple = (edge.source, edge.target, edge.relation)
            if triple in seen:
                raise GraphError(f"duplicate edge {triple}")
            seen.add(triple)
            for ref in (edge.source, edge.target):
                if ref.key not in self.index[ref.node_type]:
                    raise GraphError(f"edge references unknown node {ref}")

    def num_nodes(self) -> int:
        return sum(len(keys) for keys in self.node_keys.values())

    def edge_count(self, relation: Relation) -> int:
        return sum(1 for e in self.edges if e.relation == relation)

    def global_index(self, ref: NodeRef) -> int:
        offset = 0
        for node_type in (NodeType.SPEECH, NodeType.LEGISLATOR, NodeType.BILL):
            if node_type == ref.node_type:
                return offset + self.index[node_type][ref.key]
            offset += len(self.node_keys[node_type])
        raise GraphError(f"unknown node type {ref.node_type}")

    def edge_arrays(self, reverse: bool = True) -> dict[str, tuple[np.ndarray, np.ndarray]]:
        """Per-relation (source, target) global-index arrays.

        With `reverse`, symmetrized relations contribute an extra
        "<relation>_rev" entry with swapped endpoints.
        """
        out: dict[str, tuple[list[int], list[int]]] = {}
        for edge in self.edges:
            src = self.global_index(edge.source)
            tgt = self.global_index(edge.target)
            out.setdefault(edge.relation.value, ([], []))
            out[edge.relation.value][0].append(src)
            out[edge.relation.value][1].append(tgt)
            if reverse and edge.relation in SYMMETRIZED:
                name = edge.relation.value + "_rev"
                out.setdefault(name, ([], []))
                out[name][0].append(tgt)
                out[name][1].append(src)
        return {
            name: (np.array(srcs, dtype=np.int64), np.array(tgts, dtype=np.int64))
            for name, (srcs, tgts) in sorted(out.items())
        }

    def stacked_features(self) -> dict[NodeType, np.ndarray]:
        return self.features

    def type_slices(self) -> dict[NodeType, slice]:
        offset = 0
        slices = {}
        for node_type in (NodeType.SPEECH, NodeType.LEGISLATOR, NodeType.BILL):
            count = len(self.node_keys[node_type])
            slices[node_type] = slice(offset, offset + count)
            offset += count
        return slices


def relation_names(reverse: bool = True) -> list[str]:
    names = [r.value for r in Relation]
    if reverse:
        names += [r.value + "_rev" for r in SYMMETRIZED]
    return sorted(names)


def build_graph(
    corpus: Corpus,
    split: SplitAssignment,
    bill_embeddings: Mapping[str, np.ndarray],
    speech_embeddings: Mapping[str, np.ndarray],
    codec: FeatureCodec | None = None,
    include_eval_speeches: bool = True,
) -> HeteroGraph:
    """Assemble the typed graph from a corpus and its split assignment.

    Cosponsorship edges come from the training split only; validation and
    test pairs must never appear (they are the labels). Speeches dated in
    evaluation periods are inputs, not labels, and are included by default.
    """
    codec = codec if codec is not None else FeatureCodec(list(corpus.legislators.values()))
    speech_ids = sorted(
        s.speech_id
        for s in corpus.speeches.values()
        if include_eval_speeches or split.speeches.get(s.speech_id) == Split.TRAIN
    )
    legislator_ids = sorted(corpus.legislators)
    bill_ids = sorted(corpus.bills)

    for bid in bill_ids:
        if bid not in bill_embeddings:
            raise MissingEmbedding(f"bill {bid}")
    for sid in speech_ids:
        if sid not in speech_embeddings:
            raise MissingEmbedding(f"speech {sid}")

    features = {
        NodeType.SPEECH: (
            np.stack([bill_like(speech_embeddings[s]) for s in speech_ids])
            if speech_ids
            else np.zeros((0, 128), dtype=np.float32)
        ),
        NodeType.LEGISLATOR: np.stack(
            [codec.encode(corpus.legislators[l]) for l in legislator_ids]
        ),
        NodeType.BILL: np.stack([bill_like(bill_embeddings[b]) for b in bill_ids]),
    }

    edges: list[TypedEdge] = []
    speech_set = set(speech_ids)
    for sid in speech_ids:
        speech = corpus.speeches[sid]
        edges.append(
            TypedEdge(
                NodeRef(NodeType.LEGISLATOR, speech.author_id),
                NodeRef(NodeType.SPEECH, sid),
                Relation.AUTHORSHIP,
            )
        )
    citation_pairs = set()
    for sid in speech_ids:
        speech = corpus.speeches[sid]
        for cited in speech.cited_ids:
            if cited == speech.author_id:
                continue
            pair = (speech.author_id, cited)
            if pair in citation_pairs:
                continue
            citation_pairs.add(pair)
            edges.append(
                TypedEdge(
                    NodeRef(NodeType.LEGISLATOR, speech.author_id),
                    NodeRef(NodeType.LEGISLATOR, cited),
                    Relation.CITATION,
                )
            )
    for bill in corpus.bills.values():
        edges.append(
            TypedEdge(
                NodeRef(NodeType.LEGISLATOR, bill.sponsor_id),
                NodeRef(NodeType.BILL, bill.bill_id),
                Relation.SPONSORSHIP,
            )
        )
    from .corpus import SignatureKind

    for record in corpus.cosponsorships:
        if split.cosponsorships.get(record.pair) != Split.TRAIN:
            continue
        relation = (
            Relation.ACTIVE_COSPONSORSHIP
            if record.kind == SignatureKind.ACTIVE
            else Relation.PASSIVE_COSPONSORSHIP
        )
        edges.append(
            TypedEdge(
                NodeRef(NodeType.LEGISLATOR, record.legislator_id),
                NodeRef(NodeType.BILL, record.bill_id),
                relation,
            )
        )

    return HeteroGraph(
        node_keys={
            NodeType.SPEECH: speech_ids,
            NodeType.LEGISLATOR: legislator_ids,
            NodeType.BILL: bill_ids,
        },
        features=features,
        edges=edges,
    )


def bill_like(vec: np.ndarray) -> np.ndarray:
    return np.asarray(vec, dtype=np.float32)
