"""Baselines, ablation harness, zero-shot roll-call task, and analyses."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np
import torch
from torch import nn

from .corpus import Corpus, SignatureKind, Split, SplitAssignment
from .graph import FeatureCodec, HeteroGraph, NodeType, build_graph
from .heads import LossWeights
from .metrics import F1Report, f1_report
from .trainer import TrainConfig, TrainResult, cosponsorship_examples, evaluate, train

BASELINE_NAMES = ("B1", "B2", "B3", "B4", "B5", "B6", "B7")

# Full-scale results reported for the complete 112th-115th corpus; kept as
# reference constants only, not desk-scale assertions.
REFERENCE_F1 = {
    "B1": 0.746, "B2": 0.734, "B3": 0.768, "B4": 0.840,
    "B5": 0.847, "B6": 0.765, "B7": 0.800, "full_model": 0.884,
}
REFERENCE_ROLLCALL_F1 = {
    "Majority": 0.774, "IV": 0.873, "CNN+Meta": 0.879,
    "LSTM+GCN": 0.886, "Ours": 0.893,
}
REFERENCE_ABLATION_F1 = {
    "cosp_only": 0.853, "no_auth": 0.870, "no_cit": 0.867, "full": 0.884,
}


class EvalError(Exception):
    pass


class MissingResource(EvalError):
    """A baseline's external input file (scores, word vectors) is absent."""


class LeakageDetected(EvalError):
    """A cosponsored pair entered the roll-call dataset."""


@dataclass
class BaselineReport:
    name: str
    validation: F1Report
    test: F1Report


def load_score_file(path: Path) -> dict[str, np.ndarray]:
    """Whitespace-separated text: key then floats (ideology scores, word vectors)."""
    path = Path(path)
    if not path.exists():
        raise MissingResource(str(path))
    out: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            parts = line.split()
            if not parts:
                continue
            out[parts[0]] = np.array([float(x) for x in parts[1:]], dtype=np.float32)
    return out


# A compact stop-word list for unigram ranking; punctuation is stripped first.
_STOP_WORDS = frozenset(
    """a an and are as at be by for from has have i in is it its of on or that
    the this to was we were will with not mr mrs ms madam speaker president"""
    .split()
)


def top_unigrams(text: str, k: int = 200) -> list[str]:
    """The k most frequent non-stop-word unigrams, ties broken alphabetically."""
    counts: dict[str, int] = {}
    for token in text.lower().split():
        token = token.strip(".,;:!?()[]\"'")
        if not token or token in _STOP_WORDS:
            continue
        counts[token] = counts.get(token, 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [w for w, _ in ranked[:k]]


def _mean_word_vector(words: Sequence[str], vectors: Mapping[str, np.ndarray], dim: int) -> np.ndarray:
    hits = [vectors[w] for w in words if w in vectors]
    if not hits:
        return np.zeros(dim, dtype=np.float32)
    return np.mean(hits, axis=0).astype(np.float32)


def _topic_onehot(corpus: Corpus) -> dict[str, np.ndarray]:
    topics = sorted({b.topic for b in corpus.bills.values()})
    out = {}
    for bill in corpus.bills.values():
        vec = np.zeros(len(topics), dtype=np.float32)
        vec[topics.index(bill.topic)] = 1.0
        out[bill.bill_id] = vec
    return out


def _speech_texts_by_author(corpus: Corpus, split: SplitAssignment) -> dict[str, str]:
    texts: dict[str, list[str]] = {}
    for speech in corpus.speeches.values():
        if split.speeches.get(speech.speech_id) == Split.TRAIN:
            texts.setdefault(speech.author_id, []).append(speech.text)
    return {k: " ".join(v) for k, v in texts.items()}


class FeedForwardClassifier(nn.Module):
    """One affine layer with softmax, matching the task-head architecture."""

    def __init__(self, in_dim: int):
        super().__init__()
        self.affine = nn.Linear(in_dim, 2)

    def forward(self, x):
        return torch.softmax(self.affine(x), dim=-1)[..., 1]


def _train_ffnn(
    features: Mapping[Split, np.ndarray],
    labels: Mapping[Split, np.ndarray],
    seed: int,
    epochs: int = 60,
    lr: float = 1e-2,
) -> dict[Split, F1Report]:
    torch.manual_seed(seed)
    x_train = torch.from_numpy(features[Split.TRAIN])
    y_train = torch.from_numpy(labels[Split.TRAIN].astype(np.float32))
    model = FeedForwardClassifier(x_train.shape[1])
    optimizer = torch.optim.AdamW(model.parameters(), lr=lr)
    for _ in range(epochs):
        p = model(x_train).clamp(1e-12, 1 - 1e-12)
        loss = -(y_train * torch.log(p) + (1 - y_train) * torch.log(1 - p)).mean()
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
    reports = {}
    model.eval()
    with torch.no_grad():
        for split in (Split.VALIDATION, Split.TEST):
            preds = (model(torch.from_numpy(features[split])) >= 0.5).long().tolist()
            reports[split] = f1_report(labels[split].tolist(), preds, positive=1)
    return reports


def _train_random_forest(features, labels, seed) -> dict[Split, F1Report]:
    from sklearn.ensemble import RandomForestClassifier

    clf = RandomForestClassifier(n_estimators=100, random_state=seed)
    clf.fit(features[Split.TRAIN], labels[Split.TRAIN])
    reports = {}
    for split in (Split.VALIDATION, Split.TEST):
        preds = clf.predict(features[split]).tolist()
        reports[split] = f1_report(labels[split].tolist(), preds, positive=1)
    return reports


def _example_matrix(
    corpus: Corpus,
    split: SplitAssignment,
    legislator_reps: Mapping[str, np.ndarray],
    bill_reps: Mapping[str, np.ndarray],
) -> tuple[dict[Split, np.ndarray], dict[Split, np.ndarray]]:
    features: dict[Split, list[np.ndarray]] = {s: [] for s in Split}
    labels: dict[Split, list[int]] = {s: [] for s in Split}
    for record in corpus.cosponsorships:
        which = split.cosponsorships[record.pair]
        bill = corpus.bills[record.bill_id]
        row = np.concatenate(
            [
                legislator_reps[record.legislator_id],
                bill_reps[record.bill_id],
                legislator_reps[bill.sponsor_id],
            ]
        )
        features[which].append(row)
        labels[which].append(1 if record.kind == SignatureKind.ACTIVE else 0)
    return (
        {s: np.stack(v).astype(np.float32) for s, v in features.items() if v},
        {s: np.array(v) for s, v in labels.items() if v},
    )


@dataclass
class BaselineResources:
    """External inputs and precomputed embeddings consumed by baselines."""

    ideology_scores: Path | None = None
    word_vectors: Path | None = None
    bill_embeddings: Mapping[str, np.ndarray] | None = None
    speech_embeddings: Mapping[str, np.ndarray] | None = None
    seed: int = 0
    graph_epochs: int = 8


def run_baseline(
    name: str,
    corpus: Corpus,
    split: SplitAssignment,
    resources: BaselineResources | None = None,
) -> BaselineReport:
    """Train one baseline and report validation/test F1."""
    resources = resources if resources is not None else BaselineResources()
    if name not in BASELINE_NAMES:
        raise EvalError(f"unknown baseline {name!r}")
    seed = resources.seed
    topic_vecs = _topic_onehot(corpus)
    codec = FeatureCodec(list(corpus.legislators.values()))

    if name in ("B1", "B2"):
        if name == "B1":
            if resources.ideology_scores is None:
                raise MissingResource("B1 needs an ideology-score file")
            scores = load_score_file(resources.ideology_scores)
            missing = [l for l in corpus.legislators if l not in scores]
            if missing:
                raise MissingResource(f"no ideology score for {missing[:3]}")
            leg_reps = {l: scores[l] for l in corpus.legislators}
        else:
            leg_reps = {
                l: codec.encode(leg) for l, leg in corpus.legislators.items()
            }
        features, labels = _example_matrix(corpus, split, leg_reps, topic_vecs)
        reports = _train_random_forest(features, labels, seed)
    elif name == "B3":
        if resources.word_vectors is None:
            raise MissingResource("B3 needs a word-vector file")
        vectors = load_score_file(resources.word_vectors)
        dim = len(next(iter(vectors.values())))
        bill_reps = {
            b: _mean_word_vector(top_unigrams(bill.text), vectors, dim)
            for b, bill in corpus.bills.items()
        }
        speech_text = _speech_texts_by_author(corpus, split)
        leg_reps = {
            l: _mean_word_vector(top_unigrams(speech_text.get(l, "")), vectors, dim)
            for l in corpus.legislators
        }
        features, labels = _example_matrix(corpus, split, leg_reps, bill_reps)
        reports = _train_ffnn(features, labels, seed)
    elif name in ("B4", "B5"):
        if resources.bill_embeddings is None or resources.speech_embeddings is None:
            raise MissingResource(f"{name} needs precomputed document embeddings")
        bill_reps = resources.bill_embeddings
        by_author: dict[str, list[np.ndarray]] = {}
        for speech in corpus.speeches.values():
            if speech.speech_id in resources.speech_embeddings:
                by_author.setdefault(speech.author_id, []).append(
                    resources.speech_embeddings[speech.speech_id]
                )
        dim = len(next(iter(bill_reps.values())))
        leg_reps = {
            l: (
                np.mean(by_author[l], axis=0).astype(np.float32)
                if l in by_author
                else np.zeros(dim, dtype=np.float32)
            )
            for l in corpus.legislators
        }
        if name == "B5":
            leg_reps = {
                l: np.concatenate([leg_reps[l], codec.encode(corpus.legislators[l])])
                for l in leg_reps
            }
        features, labels = _example_matrix(corpus, split, leg_reps, bill_reps)
        reports = _train_ffnn(features, labels, seed)
    else:  # B6 / B7: graph models with random features, no speech nodes
        reports = _run_graph_baseline(name, corpus, split, resources)
    return BaselineReport(name, reports[Split.VALIDATION], reports[Split.TEST])


def _run_graph_baseline(
    name: str, corpus: Corpus, split: SplitAssignment, resources: BaselineResources
) -> dict[Split, F1Report]:
    rng = np.random.default_rng(resources.seed)
    bill_reps = {
        b: rng.standard_normal(128).astype(np.float32) for b in sorted(corpus.bills)
    }
    stripped = replace_speeches(corpus)
    graph = build_graph(stripped, split, bill_reps, {})
    # B6/B7 use randomly initialized node features for legislators too.
    graph.features[NodeType.LEGISLATOR] = rng.standard_normal(
        graph.features[NodeType.LEGISLATOR].shape
    ).astype(np.float32)
    if name == "B6":
        # Plain graph convolution: one shared relation for every edge.
        graph = _merge_relations(graph)
    config = TrainConfig(
        seed=resources.seed,
        max_epochs=resources.graph_epochs,
        weights=LossWeights(1.0, 0.0, 0.0),
        learning_rate=1e-3,
    )
    result = train(graph, stripped, split, config)
    reports = {}
    for which in (Split.VALIDATION, Split.TEST):
        examples = cosponsorship_examples(stripped, split, which)
        report, _ = evaluate(
            result.model, result.heads, result.tensors, result.graph, examples
        )
        reports[which] = report
    return reports


def replace_speeches(corpus: Corpus) -> Corpus:
    return Corpus(
        legislators=dict(corpus.legislators),
        bills=dict(corpus.bills),
        speeches={},
        cosponsorships=list(corpus.cosponsorships),
        votes=list(corpus.votes),
    )


class _MergedGraph(HeteroGraph):
    def edge_arrays(self, reverse: bool = True):
        arrays = super().edge_arrays(reverse=reverse)
        srcs = np.concatenate([a[0] for a in arrays.values()])
        tgts = np.concatenate([a[1] for a in arrays.values()])
        return {"ALL": (srcs, tgts)}


def _merge_relations(graph: HeteroGraph) -> HeteroGraph:
    return _MergedGraph(
        node_keys=graph.node_keys, features=graph.features, edges=graph.edges
    )


@dataclass
class AblationRow:
    config: str
    congress: int
    f1: float


ABLATION_CONFIGS = {
    "cosp_only": LossWeights(0.8, 0.0, 0.0),
    "no_auth": LossWeights(0.8, 0.0, 0.1),
    "no_cit": LossWeights(0.8, 0.1, 0.0),
    "full": LossWeights(0.8, 0.1, 0.1),
}


def run_ablation(
    graph: HeteroGraph,
    corpus: Corpus,
    split: SplitAssignment,
    base_config: TrainConfig | None = None,
) -> list[AblationRow]:
    """Train the four loss configurations and report test F1 per Congress."""
    base_config = base_config if base_config is not None else TrainConfig()
    rows: list[AblationRow] = []
    for config_name, weights in ABLATION_CONFIGS.items():
        config = replace(base_config, weights=weights)
        result = train(graph, corpus, split, config)
        for congress in corpus.congresses():
            bill_ids = {
                b.bill_id for b in corpus.bills.values() if b.congress == congress
            }
            examples = [
                e
                for e in cosponsorship_examples(corpus, split, Split.TEST)
                if e.refs[1] in bill_ids
            ]
            if not examples:
                continue
            report, _ = evaluate(
                result.model, result.heads, result.tensors, result.graph, examples
            )
            rows.append(AblationRow(config_name, congress, report.f1))
    return rows


class RollCallHead(nn.Module):
    """Three affine layers with rectifier activations and dropout."""

    def __init__(self, in_dim: int, dropout: float = 0.2):
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(in_dim, 64),
            nn.ReLU(),
            nn.Dropout(dropout),
            nn.Linear(64, 32),
            nn.ReLU(),
            nn.Dropout(dropout),
            nn.Linear(32, 2),
        )

    def forward(self, x):
        return torch.softmax(self.net(x), dim=-1)[..., 1]


@dataclass
class RollCallReport:
    model: dict[Split, F1Report]
    majority: dict[Split, F1Report]


def check_leakage(
    pairs_by_split: Mapping[Split, Sequence[tuple[str, str]]],
    cosponsored: set[tuple[str, str]],
) -> None:
    """Raise if any (bill, legislator) pair in the dataset was cosponsored."""
    for which, pairs in pairs_by_split.items():
        for pair in pairs:
            if pair in cosponsored:
                raise LeakageDetected(
                    f"cosponsored pair {pair} in roll-call {which.value} data"
                )


def build_rollcall_dataset(
    corpus: Corpus,
    split: SplitAssignment,
    legislator_reps: Mapping[str, np.ndarray],
    bill_reps: Mapping[str, np.ndarray],
) -> tuple[dict[Split, np.ndarray], dict[Split, np.ndarray]]:
    """(legislator, bill) vote pairs where the legislator did not cosponsor.

    Raises LeakageDetected if any cosponsored pair slips in; the check is
    exhaustive over the assembled dataset.
    """
    cosponsored = {(c.bill_id, c.legislator_id) for c in corpus.cosponsorships}
    features: dict[Split, list[np.ndarray]] = {s: [] for s in Split}
    labels: dict[Split, list[int]] = {s: [] for s in Split}
    pairs: dict[Split, list[tuple[str, str]]] = {s: [] for s in Split}
    for vote in corpus.votes:
        if (vote.bill_id, vote.legislator_id) in cosponsored:
            continue
        which = split.bills.get(vote.bill_id)
        if which is None:
            continue
        row = np.concatenate(
            [legislator_reps[vote.legislator_id], bill_reps[vote.bill_id]]
        )
        features[which].append(row)
        labels[which].append(1 if vote.vote == "yea" else 0)
        pairs[which].append((vote.bill_id, vote.legislator_id))
    check_leakage(pairs, cosponsored)
    return (
        {s: np.stack(v).astype(np.float32) for s, v in features.items() if v},
        {s: np.array(v) for s, v in labels.items() if v},
    )


def train_rollcall(
    corpus: Corpus,
    split: SplitAssignment,
    legislator_reps: Mapping[str, np.ndarray],
    bill_reps: Mapping[str, np.ndarray],
    seed: int = 0,
    epochs: int = 100,
) -> RollCallReport:
    features, labels = build_rollcall_dataset(corpus, split, legislator_reps, bill_reps)
    torch.manual_seed(seed)
    x_train = torch.from_numpy(features[Split.TRAIN])
    y_train = torch.from_numpy(labels[Split.TRAIN].astype(np.float32))
    head = RollCallHead(x_train.shape[1])
    optimizer = torch.optim.AdamW(head.parameters(), lr=1e-3)
    for _ in range(epochs):
        head.train()
        p = head(x_train).clamp(1e-12, 1 - 1e-12)
        loss = -(y_train * torch.log(p) + (1 - y_train) * torch.log(1 - p)).mean()
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
    model_reports = {}
    majority_reports = {}
    head.eval()
    for which in (Split.VALIDATION, Split.TEST):
        if which not in features:
            continue
        with torch.no_grad():
            preds = (head(torch.from_numpy(features[which])) >= 0.5).long().tolist()
        truth = labels[which].tolist()
        model_reports[which] = f1_report(truth, preds, positive=1)
        majority_reports[which] = f1_report(truth, [1] * len(truth), positive=1)
    return RollCallReport(model=model_reports, majority=majority_reports)


@dataclass(frozen=True)
class SimilarityRecord:
    cosponsor: str
    cosine_sponsor: float
    cosine_bill: float
    kind: SignatureKind


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def similarity_analysis(
    corpus: Corpus,
    split: SplitAssignment,
    legislator_reps: Mapping[str, np.ndarray],
    bill_reps: Mapping[str, np.ndarray],
    which: Split = Split.TEST,
) -> list[SimilarityRecord]:
    """Cosines between each cosponsor and the bill's sponsor and the bill."""
    records = []
    for record in corpus.cosponsorships:
        if split.cosponsorships.get(record.pair) != which:
            continue
        bill = corpus.bills[record.bill_id]
        e_l = legislator_reps[record.legislator_id]
        records.append(
            SimilarityRecord(
                cosponsor=record.legislator_id,
                cosine_sponsor=_cosine(e_l, legislator_reps[bill.sponsor_id]),
                cosine_bill=_cosine(e_l, bill_reps[record.bill_id]),
                kind=record.kind,
            )
        )
    return records


def kernel_density(
    values: Sequence[float], grid_points: int = 512
) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian-kernel density with Silverman bandwidth on a padded grid."""
    data = np.asarray(values, dtype=float)
    if data.size == 0:
        raise EvalError("no values for density estimation")
    std = data.std(ddof=1) if data.size > 1 else 0.0
    bandwidth = max(
        1.06 * std * data.size ** (-1 / 5) if std > 0 else 0.0, 1e-3
    )
    lo = data.min() - 6 * bandwidth
    hi = data.max() + 6 * bandwidth
    grid = np.linspace(lo, hi, grid_points)
    diffs = (grid[:, None] - data[None, :]) / bandwidth
    density = np.exp(-0.5 * diffs**2).sum(axis=1) / (
        data.size * bandwidth * math.sqrt(2 * math.pi)
    )
    return grid, density


def export_similarity(
    records: Sequence[SimilarityRecord], out_dir: Path
) -> dict[str, Path]:
    """Write the record CSV plus one density CSV per (kind x target)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}
    records_path = out_dir / "similarity_records.csv"
    with open(records_path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["cosponsor", "cosine_sponsor", "cosine_bill", "kind"])
        for r in records:
            writer.writerow([r.cosponsor, r.cosine_sponsor, r.cosine_bill, r.kind.value])
    paths["records"] = records_path
    for kind in SignatureKind:
        for target in ("sponsor", "bill"):
            values = [
                getattr(r, f"cosine_{target}") for r in records if r.kind == kind
            ]
            if not values:
                continue
            grid, density = kernel_density(values)
            path = out_dir / f"density_{kind.value}_{target}.csv"
            with open(path, "w", newline="") as handle:
                writer = csv.writer(handle)
                writer.writerow(["x", "density"])
                for x, d in zip(grid, density):
                    writer.writerow([x, d])
            paths[f"{kind.value}_{target}"] = path
    return paths


def pca_2d(matrix: np.ndarray) -> np.ndarray:
    centered = matrix - matrix.mean(axis=0, keepdims=True)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    return centered @ vt[:2].T


def project_embeddings(
    corpus: Corpus,
    legislator_reps: Mapping[str, np.ndarray],
    out_path: Path,
    routine: Callable[[np.ndarray], np.ndarray] | None = None,
) -> Path:
    """Write a 2D projection CSV (bioguide_id, x, y, party) of legislators."""
    keys = sorted(legislator_reps)
    if len(keys) < 3:
        raise EvalError("need at least 3 legislators to project")
    matrix = np.stack([legislator_reps[k] for k in keys])
    routine = routine if routine is not None else pca_2d
    coords = routine(matrix)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["bioguide_id", "x", "y", "party"])
        for key, (x, y) in zip(keys, coords):
            writer.writerow([key, x, y, corpus.legislators[key].party.value])
    return out_path
