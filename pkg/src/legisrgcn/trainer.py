"""Joint optimization of projections, convolutions, and task heads."""

from __future__ import annotations

import copy
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import torch

from .corpus import Corpus, SignatureKind, Split, SplitAssignment
from .graph import HeteroGraph, NodeRef, NodeType
from .heads import (
    LossWeights,
    NoCitationAvailable,
    NoSpeechAvailable,
    TaskHeads,
    TrainingExample,
    binary_cross_entropy,
    loss_total,
)
from .metrics import EmptySplit, F1Report, f1_report
from .rgcn import GraphTensors, RGCNModel

log = logging.getLogger(__name__)


class TrainerError(Exception):
    pass


class Divergence(TrainerError):
    """Non-finite loss; training aborts with the last good parameters."""


@dataclass
class TrainConfig:
    learning_rate: float = 1e-4
    batch_size: int = 64
    max_epochs: int = 8
    dropout: float = 0.2
    weights: LossWeights = field(default_factory=LossWeights)
    seed: int = 0
    patience: int = 2
    weight_decay: float = 0.01
    eval_interval: float = 0.5  # fraction of an epoch between validation checks
    authorship_positive_rate: float = 0.5
    citation_positive_rate: float = 0.5
    single_thread: bool = True

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass
class HistoryRow:
    epoch: float
    split: str
    task: str
    loss: float
    f1: float


@dataclass
class TrainResult:
    model: RGCNModel
    heads: TaskHeads
    tensors: GraphTensors
    graph: HeteroGraph
    history: list[HistoryRow]
    best_validation_f1: float
    config: TrainConfig


def cosponsorship_examples(
    corpus: Corpus, split: SplitAssignment, which: Split
) -> list[TrainingExample]:
    out = []
    for record in corpus.cosponsorships:
        if split.cosponsorships.get(record.pair) != which:
            continue
        bill = corpus.bills[record.bill_id]
        out.append(
            TrainingExample(
                "cosponsorship",
                (record.legislator_id, record.bill_id, bill.sponsor_id),
                1 if record.kind == SignatureKind.ACTIVE else 0,
            )
        )
    return out


def _gather(
    reps: torch.Tensor, graph: HeteroGraph, refs: Sequence[NodeRef]
) -> torch.Tensor:
    idx = torch.tensor([graph.global_index(r) for r in refs], dtype=torch.long)
    return reps[idx]


def _cosponsorship_probs(
    reps: torch.Tensor,
    graph: HeteroGraph,
    heads: TaskHeads,
    batch: Sequence[TrainingExample],
) -> torch.Tensor:
    e_l = _gather(reps, graph, [NodeRef(NodeType.LEGISLATOR, e.refs[0]) for e in batch])
    e_b = _gather(reps, graph, [NodeRef(NodeType.BILL, e.refs[1]) for e in batch])
    e_s = _gather(reps, graph, [NodeRef(NodeType.LEGISLATOR, e.refs[2]) for e in batch])
    return heads.predict_cosponsorship(e_l, e_b, e_s)


def _auxiliary_probs(
    reps: torch.Tensor,
    graph: HeteroGraph,
    heads: TaskHeads,
    batch: Sequence[TrainingExample],
    task: str,
) -> torch.Tensor:
    e_l = _gather(reps, graph, [NodeRef(NodeType.LEGISLATOR, e.refs[0]) for e in batch])
    if task == "authorship":
        e_x = _gather(reps, graph, [NodeRef(NodeType.SPEECH, e.refs[1]) for e in batch])
        return heads.predict_authorship(e_l, e_x)
    e_x = _gather(reps, graph, [NodeRef(NodeType.LEGISLATOR, e.refs[1]) for e in batch])
    return heads.predict_citation(e_l, e_x)


def _labels(batch: Sequence[TrainingExample]) -> torch.Tensor:
    return torch.tensor([float(e.label) for e in batch])


def _draw_batch(sampler, legislators, count, rng) -> list[TrainingExample]:
    batch = []
    attempts = 0
    while len(batch) < count and attempts < count * 20:
        attempts += 1
        leg = legislators[rng.integers(len(legislators))]
        try:
            batch.append(sampler.draw(leg))
        except (NoSpeechAvailable, NoCitationAvailable):
            continue
    return batch


def build_samplers(corpus: Corpus, split: SplitAssignment, config: TrainConfig):
    from .heads import AuthorshipSampler, CitationSampler

    rng_auth = np.random.default_rng(config.seed + 101)
    rng_cit = np.random.default_rng(config.seed + 202)
    speeches_by_author: dict[str, list[str]] = {}
    cited_by: dict[str, set[str]] = {}
    for speech in corpus.speeches.values():
        if split.speeches.get(speech.speech_id) != Split.TRAIN:
            continue
        speeches_by_author.setdefault(speech.author_id, []).append(speech.speech_id)
        for cited in speech.cited_ids:
            if cited != speech.author_id:
                cited_by.setdefault(speech.author_id, set()).add(cited)
    authorship = AuthorshipSampler(
        speeches_by_author, rng_auth, config.authorship_positive_rate
    )
    citation = CitationSampler(
        cited_by, sorted(corpus.legislators), rng_cit, config.citation_positive_rate
    )
    return authorship, citation


def evaluate(
    model: RGCNModel,
    heads: TaskHeads,
    tensors: GraphTensors,
    graph: HeteroGraph,
    examples: Sequence[TrainingExample],
) -> tuple[F1Report, float]:
    """Binary F1 with active as the positive class, plus mean loss."""
    if not examples:
        raise EmptySplit("no cosponsorship examples in this split")
    model.eval()
    heads.eval()
    with torch.no_grad():
        reps = model(tensors)
        probs = _cosponsorship_probs(reps, graph, heads, examples)
        loss = binary_cross_entropy(probs, _labels(examples)).item()
    preds = (probs >= 0.5).long().tolist()
    report = f1_report([e.label for e in examples], preds, positive=1)
    return report, loss


def train(
    graph: HeteroGraph,
    corpus: Corpus,
    split: SplitAssignment,
    config: TrainConfig | None = None,
    max_epochs: int | None = None,
) -> TrainResult:
    """Run the joint training loop with decoupled-weight-decay updates.

    Each step draws a primary batch of cosponsorship examples plus matched
    auxiliary batches, does one full-graph forward, and takes one optimizer
    step on the weighted joint loss. Validation F1 is checked every
    `eval_interval` of an epoch; training stops early when it fails to
    improve for `patience` checks.
    """
    config = config if config is not None else TrainConfig()
    if max_epochs is not None:
        config = replace(config, max_epochs=max_epochs)
    if config.single_thread:
        torch.set_num_threads(1)
    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)

    tensors = GraphTensors.from_graph(graph)
    type_dims = {t: graph.features[t].shape[1] for t in graph.features}
    from .graph import relation_names

    relations = sorted(set(relation_names()) | set(tensors.edges))
    model = RGCNModel(type_dims, relations=relations, dropout=config.dropout)
    heads = TaskHeads()

    train_examples = cosponsorship_examples(corpus, split, Split.TRAIN)
    val_examples = cosponsorship_examples(corpus, split, Split.VALIDATION)
    if not train_examples:
        raise TrainerError("no training cosponsorship examples")

    use_auxiliary = config.weights.authorship > 0 or config.weights.citation > 0
    authorship_sampler, citation_sampler = (
        build_samplers(corpus, split, config) if use_auxiliary else (None, None)
    )

    optimizer = torch.optim.AdamW(
        list(model.parameters()) + list(heads.parameters()),
        lr=config.learning_rate,
        weight_decay=config.weight_decay,
    )

    history: list[HistoryRow] = []
    best_f1 = -1.0
    best_state = None
    stale_evals = 0
    steps_per_epoch = max(1, math.ceil(len(train_examples) / config.batch_size))
    eval_every = max(1, int(steps_per_epoch * config.eval_interval))
    legislators = sorted(corpus.legislators)
    stop = False

    step = 0
    for epoch in range(config.max_epochs):
        order = rng.permutation(len(train_examples))
        model.train()
        heads.train()
        for start in range(0, len(order), config.batch_size):
            batch = [train_examples[i] for i in order[start : start + config.batch_size]]
            reps = model(tensors)
            probs = _cosponsorship_probs(reps, graph, heads, batch)
            l_cosp = binary_cross_entropy(probs, _labels(batch))
            l_auth = torch.zeros(())
            l_cit = torch.zeros(())
            if use_auxiliary and config.weights.authorship > 0:
                aux = _draw_batch(authorship_sampler, legislators, len(batch), rng)
                if aux:
                    p = _auxiliary_probs(reps, graph, heads, aux, "authorship")
                    l_auth = binary_cross_entropy(p, _labels(aux))
            if use_auxiliary and config.weights.citation > 0:
                aux = _draw_batch(citation_sampler, legislators, len(batch), rng)
                if aux:
                    p = _auxiliary_probs(reps, graph, heads, aux, "citation")
                    l_cit = binary_cross_entropy(p, _labels(aux))
            total = loss_total(l_cosp, l_auth, l_cit, config.weights)
            if not torch.isfinite(total):
                if best_state is not None:
                    model.load_state_dict(best_state["model"])
                    heads.load_state_dict(best_state["heads"])
                raise Divergence(f"non-finite loss at step {step}")
            optimizer.zero_grad()
            total.backward()
            optimizer.step()

            epoch_frac = epoch + (start + len(batch)) / len(order)
            history.append(
                HistoryRow(epoch_frac, "train", "cosponsorship", l_cosp.item(), float("nan"))
            )
            if config.weights.authorship > 0:
                history.append(
                    HistoryRow(epoch_frac, "train", "authorship", l_auth.item(), float("nan"))
                )
            if config.weights.citation > 0:
                history.append(
                    HistoryRow(epoch_frac, "train", "citation", l_cit.item(), float("nan"))
                )

            step += 1
            if val_examples and step % eval_every == 0:
                report, val_loss = evaluate(model, heads, tensors, graph, val_examples)
                history.append(
                    HistoryRow(epoch_frac, "validation", "cosponsorship", val_loss, report.f1)
                )
                model.train()
                heads.train()
                if report.f1 > best_f1:
                    best_f1 = report.f1
                    best_state = {
                        "model": copy.deepcopy(model.state_dict()),
                        "heads": copy.deepcopy(heads.state_dict()),
                    }
                    stale_evals = 0
                else:
                    stale_evals += 1
                    if stale_evals >= config.patience:
                        log.info("early stop at epoch %.2f", epoch_frac)
                        stop = True
                        break
        if stop:
            break

    if best_state is not None:
        model.load_state_dict(best_state["model"])
        heads.load_state_dict(best_state["heads"])
    elif val_examples:
        report, _ = evaluate(model, heads, tensors, graph, val_examples)
        best_f1 = report.f1
    return TrainResult(
        model=model,
        heads=heads,
        tensors=tensors,
        graph=graph,
        history=history,
        best_validation_f1=best_f1,
        config=config,
    )


def node_representations(result: TrainResult) -> torch.Tensor:
    result.model.eval()
    with torch.no_grad():
        return result.model(result.tensors)
