"""Post-training analyses: baselines, similarity densities, 2D projection.

Trains briefly on the planted corpus, then reproduces the analysis
artifacts: metadata baseline comparison, cosine-similarity records with
kernel densities, and the party-labeled 2D projection CSV.
"""

import tempfile
from pathlib import Path

from legisrgcn.corpus import time_split
from legisrgcn.encoder import DocumentEncoder, EncoderConfig, HashingBackend
from legisrgcn.evalsuite import (
    export_similarity,
    project_embeddings,
    run_baseline,
    similarity_analysis,
)
from legisrgcn.graph import NodeType, build_graph
from legisrgcn.synthetic import make_planted_corpus
from legisrgcn.trainer import TrainConfig, node_representations, train

corpus = make_planted_corpus(seed=7)
split = time_split(corpus)

# A metadata-only baseline already sees party, one of the planted signals.
b2 = run_baseline("B2", corpus, split)
print(f"B2 (metadata random forest) test F1: {b2.test.f1:.3f}")

encoder = DocumentEncoder(HashingBackend(seed=0), EncoderConfig(seed=0))
bill_vecs = encoder.encode_corpus(
    {b.bill_id: b.text for b in corpus.bills.values()}, "bill"
)
speech_vecs = encoder.encode_corpus(
    {s.speech_id: s.text for s in corpus.speeches.values()}, "speech"
)
graph = build_graph(corpus, split, bill_vecs, speech_vecs)
result = train(graph, corpus, split, TrainConfig(seed=0, max_epochs=4))

# Final-layer node representations, keyed back to corpus ids.
reps = node_representations(result).numpy()
slices = graph.type_slices()
leg_reps = {
    key: reps[slices[NodeType.LEGISLATOR].start + i]
    for i, key in enumerate(graph.node_keys[NodeType.LEGISLATOR])
}
bill_reps = {
    key: reps[slices[NodeType.BILL].start + i]
    for i, key in enumerate(graph.node_keys[NodeType.BILL])
}

records = similarity_analysis(corpus, split, leg_reps, bill_reps)
actives = [r.cosine_sponsor for r in records if r.kind.value == "active"]
passives = [r.cosine_sponsor for r in records if r.kind.value == "passive"]
print(f"mean cosine to sponsor: active {sum(actives) / len(actives):.3f}, "
      f"passive {sum(passives) / len(passives):.3f}")

with tempfile.TemporaryDirectory() as tmp:
    paths = export_similarity(records, Path(tmp) / "similarity")
    print("density CSVs:", sorted(k for k in paths if k != "records"))
    proj = project_embeddings(corpus, leg_reps, Path(tmp) / "projection.csv")
    header, first = proj.read_text().splitlines()[:2]
    print("projection header:", header)
    print("first row:", first)
