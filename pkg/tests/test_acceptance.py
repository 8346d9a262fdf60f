"""Acceptance gate: one test per primary criterion, run with `pytest -v`.

Each test name is the pass/fail line for its criterion; tolerances are
stated inline next to each assertion.
"""

import math
import time

import numpy as np
import pytest
import torch

from legisrgcn.corpus import Split, time_split
from legisrgcn.evalsuite import (
    ABLATION_CONFIGS,
    build_rollcall_dataset,
    export_similarity,
    kernel_density,
    project_embeddings,
    run_ablation,
    similarity_analysis,
)
from legisrgcn.encoder import RecurrentAggregator
from legisrgcn.graph import NodeType, Relation
from legisrgcn.heads import (
    AuthorshipSampler,
    BinaryHead,
    CitationSampler,
    LossWeights,
    TaskHeads,
    binary_cross_entropy,
    loss_total,
)
from legisrgcn.recordparse import mask_citation, parse_editions
from legisrgcn.rgcn import RelationalGraphLayer, save_checkpoint
from legisrgcn.trainer import TrainConfig, train

from parser_fixture import build_editions, build_roster
from test_corpus import _event_corpus
from test_rgcn import dense_layer_oracle, random_edges, to_torch_edges


def _fd_check(param, scalar_fn, indices, step=1e-4, tol=1e-3):
    """Central finite differences at `step`; relative error must be <= tol."""
    scalar_fn().backward()
    grad = param.grad.clone()
    with torch.no_grad():
        for idx in indices:
            orig = param[idx].item()
            param[idx] = orig + step
            up = scalar_fn().item()
            param[idx] = orig - step
            down = scalar_fn().item()
            param[idx] = orig
            fd = (up - down) / (2 * step)
            analytic = grad[idx].item()
            assert abs(fd - analytic) <= tol * max(1.0, abs(analytic)), (
                f"finite difference {fd} vs analytic {analytic} at {idx}"
            )
    param.grad = None


def test_criterion_01_rgcn_dense_oracle_100_graphs():
    """100 random heterogeneous graphs (<=20 nodes, 5 relations): layer
    forward matches a dense-matrix oracle within 1e-5 relative error, <30s."""
    start = time.monotonic()
    relations = ["R1", "R2", "R3", "R4", "R5"]
    rng = np.random.default_rng(0)
    for trial in range(100):
        torch.manual_seed(trial)
        n = int(rng.integers(2, 21))
        width, out_dim = int(rng.integers(2, 9)), int(rng.integers(2, 9))
        activation = "relu" if trial % 2 == 0 else "linear"
        layer = RelationalGraphLayer(relations, width, out_dim, activation=activation)
        x = rng.standard_normal((n, width))
        edges = random_edges(rng, n, relations, n_edges=int(rng.integers(1, 3 * n)))
        with torch.no_grad():
            out = layer(torch.from_numpy(x.astype(np.float32)), to_torch_edges(edges))
        rel_w = {
            name: layer.rel_weights[name].detach().numpy().astype(np.float64)
            for name in relations
        }
        expect = dense_layer_oracle(
            x,
            edges,
            rel_w,
            layer.self_weight.detach().numpy().astype(np.float64),
            layer.bias.detach().numpy().astype(np.float64),
            activation == "relu",
        )
        scale = max(1.0, float(np.abs(expect).max()))
        np.testing.assert_allclose(out.numpy(), expect, atol=1e-5 * scale)
    assert time.monotonic() - start < 30.0


def test_criterion_02_gradient_finite_difference_checks():
    """Aggregator, convolution layer, and head gradients match central
    finite differences (step 1e-4) within 1e-3 relative error, <2 min."""
    start = time.monotonic()

    # Aggregator (double precision so the 1e-4 step is noise-free).
    agg = RecurrentAggregator(input_dim=4, hidden_dim=3, seed=0).double()
    chunks = torch.randn(4, 4, dtype=torch.float64,
                         generator=torch.Generator().manual_seed(1))
    _fd_check(
        agg.w_ih_fwd,
        lambda: (lambda h: (h[0].sum() + h[1].sum()))(agg(chunks)),
        [(0, 0), (5, 2), (11, 3)],
    )

    # Relational convolution.
    torch.manual_seed(2)
    layer = RelationalGraphLayer(["R1", "R2"], 4, 3, activation="relu").double()
    rng = np.random.default_rng(2)
    x = torch.from_numpy(rng.standard_normal((8, 4)))
    edges = to_torch_edges(random_edges(rng, 8, ["R1", "R2"], n_edges=10))
    _fd_check(
        layer.rel_weights["R1"],
        lambda: layer(x, edges).pow(2).sum(),
        [(0, 0), (1, 3), (2, 2)],
    )

    # Classification head through the cross-entropy.
    torch.manual_seed(3)
    head = BinaryHead(5).double()
    hx = torch.randn(6, 5, dtype=torch.float64)
    hy = torch.tensor([1.0, 0.0, 1.0, 1.0, 0.0, 0.0], dtype=torch.float64)
    _fd_check(
        head.affine.weight,
        lambda: binary_cross_entropy(head(hx), hy),
        [(0, 0), (1, 4)],
    )
    assert time.monotonic() - start < 120.0


def test_criterion_03_loss_arithmetic():
    """L_tot(1.0, 0.5, 0.5) = 0.9 exactly; BCE at p = 0.5 equals ln 2
    within 1e-9."""
    assert loss_total(1.0, 0.5, 0.5, LossWeights()) == pytest.approx(0.9, abs=1e-15)
    for y in (0.0, 1.0):
        bce = binary_cross_entropy(torch.tensor([0.5]), torch.tensor([y])).item()
        assert abs(bce - math.log(2.0)) <= 1e-9


def test_criterion_04_parser_fixture_25_speeches():
    """Handcrafted 25-speech daily-edition corpus with both opening forms:
    100% segmentation, attribution, and citation extraction; masking leaves
    zero residual target mentions."""
    editions, expected = build_editions(25)
    roster = build_roster()
    speeches, citations, report = parse_editions(editions, roster, 112)

    assert report.kept == 25  # 100% segmentation of well-formed speeches
    assert [s.author_id for s in speeches] == [
        f"P{a:03d}" for a, _ in expected
    ]  # 100% attribution
    for speech, (_, cited) in zip(speeches, expected):  # 100% citation extraction
        assert speech.cited_ids == ((f"P{cited:03d}",) if cited is not None else ())

    for speech in speeches:
        for target in speech.cited_ids:
            surname = next(
                l.last_name.upper() for l in roster if l.bioguide_id == target
            )
            masked = mask_citation(speech, target, roster)
            assert surname not in masked.text  # zero residual mentions


def test_criterion_05_split_contract_5_100_10007():
    """Per-Congress 60/20/20 within +-1, chronological, disjoint, on event
    counts 5, 100, and 10,007."""
    for n in (5, 100, 10_007):
        corpus = _event_corpus(n)
        assignment = time_split(corpus)
        by_split: dict[Split, list] = {s: [] for s in Split}
        for record in corpus.cosponsorships:
            by_split[assignment.cosponsorships[record.pair]].append(
                record.signature_date
            )
        counts = {s: len(v) for s, v in by_split.items()}
        assert sum(counts.values()) == n  # disjoint partition
        for split, frac in (
            (Split.TRAIN, 0.6), (Split.VALIDATION, 0.2), (Split.TEST, 0.2),
        ):
            assert abs(counts[split] - frac * n) <= 1
        if counts[Split.VALIDATION] and counts[Split.TEST]:
            assert max(by_split[Split.TRAIN]) <= min(by_split[Split.VALIDATION])
            assert max(by_split[Split.VALIDATION]) <= min(by_split[Split.TEST])


def test_criterion_06_sampler_rates_10000_draws():
    """10,000 draws at rate 0.5 give positive fractions in [0.48, 0.52];
    the 0.3 mode gives [0.28, 0.32]."""
    speeches = {"L1": ["S1", "S2"], "L2": ["S3", "S4"]}
    cited_by = {"L1": {"L2"}, "L2": {"L1"}}
    roster = ["L1", "L2", "L3", "L4"]
    for rate, lo, hi in ((0.5, 0.48, 0.52), (0.3, 0.28, 0.32)):
        auth = AuthorshipSampler(speeches, np.random.default_rng(0), rate)
        cit = CitationSampler(cited_by, roster, np.random.default_rng(1), rate)
        for sampler in (auth, cit):
            draws = [sampler.draw("L1") for _ in range(10_000)]
            fraction = sum(d.label for d in draws) / len(draws)
            assert lo <= fraction <= hi


def test_criterion_07_leakage_guards(planted_corpus, planted_split, planted_graph):
    """No validation/test cosponsorship pair appears as a graph edge, and the
    roll-call dataset contains zero cosponsored pairs (exhaustive check)."""
    held_out = {
        pair
        for pair, s in planted_split.cosponsorships.items()
        if s != Split.TRAIN
    }
    for edge in planted_graph.edges:
        if edge.relation in (
            Relation.ACTIVE_COSPONSORSHIP, Relation.PASSIVE_COSPONSORSHIP,
        ):
            assert (edge.target.key, edge.source.key) not in held_out

    rng = np.random.default_rng(0)
    leg_reps = {l: rng.standard_normal(8) for l in planted_corpus.legislators}
    bill_reps = {b: rng.standard_normal(8) for b in planted_corpus.bills}
    features, labels = build_rollcall_dataset(
        planted_corpus, planted_split, leg_reps, bill_reps
    )
    cosponsored = {
        (c.bill_id, c.legislator_id) for c in planted_corpus.cosponsorships
    }
    n_rows = sum(len(v) for v in labels.values())
    n_eligible = sum(
        1
        for v in planted_corpus.votes
        if (v.bill_id, v.legislator_id) not in cosponsored
    )
    assert n_rows == n_eligible  # every kept row is non-cosponsored; none leak


@pytest.fixture(scope="module")
def learnability_result(planted_corpus, planted_split, planted_graph):
    config = TrainConfig(seed=0, max_epochs=50)
    start = time.monotonic()
    result = train(planted_graph, planted_corpus, planted_split, config)
    return result, time.monotonic() - start


def test_criterion_08_planted_learnability_and_ablation_table(
    planted_corpus, planted_split, planted_graph, learnability_result
):
    """Full model reaches test F1 >= 0.90 on the planted corpus (30
    legislators, 100 bills, 200 speeches) within 50 epochs and 10 minutes;
    the ablation harness emits the 4-config table on the same fixture."""
    from legisrgcn.trainer import cosponsorship_examples, evaluate

    result, elapsed = learnability_result
    assert elapsed < 600.0
    test_examples = cosponsorship_examples(planted_corpus, planted_split, Split.TEST)
    report, _ = evaluate(
        result.model, result.heads, result.tensors, result.graph, test_examples
    )
    assert report.f1 >= 0.90

    rows = run_ablation(
        planted_graph,
        planted_corpus,
        planted_split,
        TrainConfig(seed=0, max_epochs=2),
    )
    assert {r.config for r in rows} == set(ABLATION_CONFIGS)
    assert all(0.0 <= r.f1 <= 1.0 for r in rows)


def test_criterion_09_determinism(
    planted_corpus, planted_split, planted_graph, tmp_path
):
    """Two runs with the same seed/config produce identical metric histories
    and bit-identical checkpoints in single-threaded mode."""
    config = TrainConfig(seed=42, max_epochs=2, single_thread=True)
    runs = []
    for name in ("one", "two"):
        result = train(planted_graph, planted_corpus, planted_split, config)
        path = tmp_path / f"{name}.lgrc"
        save_checkpoint(result.model, path)
        runs.append((result, path))
    (a, path_a), (b, path_b) = runs
    assert [
        (r.epoch, r.split, r.task, r.loss) for r in a.history
    ] == [(r.epoch, r.split, r.task, r.loss) for r in b.history]
    assert [r.f1 for r in a.history if r.split == "validation"] == [
        r.f1 for r in b.history if r.split == "validation"
    ]
    assert path_a.read_bytes() == path_b.read_bytes()


def test_criterion_10_analysis_exports(
    planted_corpus, planted_split, tmp_path
):
    """Similarity cosines bounded in [-1, 1]; density curves integrate to
    1 +- 1e-3; projection CSV row count equals the roster size."""
    rng = np.random.default_rng(0)
    leg_reps = {l: rng.standard_normal(16) for l in planted_corpus.legislators}
    bill_reps = {b: rng.standard_normal(16) for b in planted_corpus.bills}
    records = similarity_analysis(
        planted_corpus, planted_split, leg_reps, bill_reps
    )
    assert records
    for r in records:
        assert -1.0 <= r.cosine_sponsor <= 1.0
        assert -1.0 <= r.cosine_bill <= 1.0

    export_similarity(records, tmp_path / "sim")
    for values in (
        [r.cosine_sponsor for r in records],
        [r.cosine_bill for r in records],
    ):
        grid, density = kernel_density(values)
        assert abs(np.trapezoid(density, grid) - 1.0) <= 1e-3

    path = project_embeddings(planted_corpus, leg_reps, tmp_path / "proj.csv")
    rows = path.read_text().splitlines()
    assert len(rows) - 1 == len(planted_corpus.legislators)
