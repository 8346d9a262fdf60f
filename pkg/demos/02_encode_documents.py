"""Encode long documents into fixed 128-dimensional vectors.

Shows the chunk -> recurrent aggregation -> pooled document pipeline and
the on-disk embedding cache round trip.
"""

import tempfile
from pathlib import Path

import numpy as np

from legisrgcn.cachefile import read_cache, write_cache
from legisrgcn.encoder import (
    DocumentEncoder,
    EncoderConfig,
    HashingBackend,
    chunk_document,
)

# A 1,200-word bill splits into 512 + 512 + 176 word chunks.
text = " ".join(
    ["insurance", "hospital", "coverage", "premium", "patient", "clinic"] * 200
)
chunks = chunk_document(text)
print("chunk sizes:", [len(c) for c in chunks])

# The hashing backend needs no trained weights and is fully deterministic;
# swap in any other backend exposing .dim and .embed(words).
encoder = DocumentEncoder(HashingBackend(seed=0), EncoderConfig(seed=0))
vec = encoder.encode(text, kind="bill")
print("document vector:", vec.shape, vec.dtype, "norm =", round(float(np.linalg.norm(vec)), 3))

# Bills and speeches keep separate aggregators, so the same text maps to
# different points depending on its kind.
speech_vec = encoder.encode(text, kind="speech")
print("bill vs speech cosine:",
      round(float(vec @ speech_vec / (np.linalg.norm(vec) * np.linalg.norm(speech_vec))), 3))

# Embeddings persist in a compact binary cache keyed by document id.
with tempfile.TemporaryDirectory() as tmp:
    cache = Path(tmp) / "bills.bin"
    write_cache(cache, {"B001": vec, "B002": speech_vec}, 128)
    dim, loaded = read_cache(cache)
    print(f"cache round trip: dim={dim}, keys={sorted(loaded)}")
    assert np.array_equal(loaded["B001"], vec)
