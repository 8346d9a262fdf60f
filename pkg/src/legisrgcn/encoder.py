"""Fixed-width document embeddings for bills and speeches.

Long documents are split into word chunks, each chunk is embedded by a
pluggable backend, the chunk sequence is aggregated by a bidirectional
gated recurrence, and the concatenated final hidden states are mean-pooled
down to the document width. Separate aggregator instances are kept per
text kind (bill vs. speech).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np
import torch
from torch import nn


class EncoderError(Exception):
    pass


class EmptyDocument(EncoderError):
    pass


class BackendFailure(EncoderError):
    pass


class DimensionMismatch(EncoderError):
    pass


DEFAULT_CHUNK_SIZE = 512
DEFAULT_CHUNK_DIM = 768
DEFAULT_HIDDEN_DIM = 384
DEFAULT_DOC_DIM = 128


def chunk_document(text: str, chunk_size: int = DEFAULT_CHUNK_SIZE) -> list[list[str]]:
    """Whitespace-tokenize and split into consecutive chunks of `chunk_size` words."""
    if chunk_size < 1:
        raise ValueError("chunk_size must be >= 1")
    words = text.split()
    if not words:
        raise EmptyDocument("document has no words")
    return [words[i : i + chunk_size] for i in range(0, len(words), chunk_size)]


class ChunkBackend(Protocol):
    dim: int

    def embed(self, words: Sequence[str]) -> np.ndarray: ...


class HashingBackend:
    """Deterministic fallback backend requiring no model weights.

    Each word is mapped to a fixed unit-Gaussian vector seeded by a stable
    hash of the word; the chunk vector is the mean over its words.
    """

    def __init__(self, dim: int = DEFAULT_CHUNK_DIM, seed: int = 0):
        self.dim = dim
        self.seed = seed
        self._word_cache: dict[str, np.ndarray] = {}

    def _word_vector(self, word: str) -> np.ndarray:
        cached = self._word_cache.get(word)
        if cached is not None:
            return cached
        digest = hashlib.blake2b(
            word.encode("utf-8"), digest_size=8, salt=self.seed.to_bytes(8, "little")
        ).digest()
        rng = np.random.default_rng(int.from_bytes(digest, "little"))
        vec = rng.standard_normal(self.dim).astype(np.float32)
        self._word_cache[word] = vec
        return vec

    def embed(self, words: Sequence[str]) -> np.ndarray:
        if not words:
            raise BackendFailure("empty chunk")
        return np.mean([self._word_vector(w) for w in words], axis=0)


def embed_chunk(
    words: Sequence[str], backend: ChunkBackend, expected_dim: int = DEFAULT_CHUNK_DIM
) -> np.ndarray:
    if backend.dim != expected_dim:
        raise BackendFailure(
            f"backend dimension {backend.dim} != configured {expected_dim}"
        )
    vec = np.asarray(backend.embed(words), dtype=np.float32)
    if vec.shape != (expected_dim,):
        raise BackendFailure(f"backend returned shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise BackendFailure("backend returned non-finite values")
    return vec


class RecurrentAggregator(nn.Module):
    """Bidirectional gated recurrence over a chunk-embedding sequence.

    Standard long-short-term-memory cell (gates i, f, g, o), run once
    left-to-right and once right-to-left from zero initial states; returns
    the final hidden state of each pass.
    """

    def __init__(
        self,
        input_dim: int = DEFAULT_CHUNK_DIM,
        hidden_dim: int = DEFAULT_HIDDEN_DIM,
        seed: int | None = None,
    ):
        super().__init__()
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        gen = torch.Generator()
        if seed is not None:
            gen.manual_seed(seed)
        def init(rows, cols, fan_in):
            bound = 1.0 / np.sqrt(fan_in)
            return nn.Parameter(
                (torch.rand(rows, cols, generator=gen) * 2 - 1) * bound
            )
        for direction in ("fwd", "bwd"):
            setattr(self, f"w_ih_{direction}", init(4 * hidden_dim, input_dim, input_dim))
            setattr(self, f"w_hh_{direction}", init(4 * hidden_dim, hidden_dim, hidden_dim))
            setattr(
                self,
                f"bias_{direction}",
                nn.Parameter(torch.zeros(4 * hidden_dim)),
            )

    def _run(self, chunks: torch.Tensor, direction: str) -> torch.Tensor:
        w_ih = getattr(self, f"w_ih_{direction}")
        w_hh = getattr(self, f"w_hh_{direction}")
        bias = getattr(self, f"bias_{direction}")
        h = chunks.new_zeros(self.hidden_dim)
        c = chunks.new_zeros(self.hidden_dim)
        steps = chunks if direction == "fwd" else torch.flip(chunks, dims=(0,))
        for x in steps:
            gates = w_ih @ x + w_hh @ h + bias
            i, f, g, o = torch.split(gates, self.hidden_dim)
            i, f, o = torch.sigmoid(i), torch.sigmoid(f), torch.sigmoid(o)
            g = torch.tanh(g)
            c = f * c + i * g
            h = o * torch.tanh(c)
        return h

    def forward(self, chunks: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        if chunks.ndim != 2 or chunks.shape[1] != self.input_dim:
            raise DimensionMismatch(
                f"expected (T, {self.input_dim}), got {tuple(chunks.shape)}"
            )
        if chunks.shape[0] < 1:
            raise EmptyDocument("aggregator needs at least one chunk")
        return self._run(chunks, "fwd"), self._run(chunks, "bwd")


def pool(
    forward_hidden: torch.Tensor,
    backward_hidden: torch.Tensor,
    doc_dim: int = DEFAULT_DOC_DIM,
) -> torch.Tensor:
    """Concatenate the two final hidden states and average non-overlapping
    windows down to `doc_dim` values."""
    concat = torch.cat([forward_hidden, backward_hidden])
    width = concat.shape[0]
    if width % doc_dim != 0:
        raise DimensionMismatch(f"width {width} not divisible by doc dim {doc_dim}")
    window = width // doc_dim
    return concat.reshape(doc_dim, window).mean(dim=1)


@dataclass
class EncoderConfig:
    chunk_size: int = DEFAULT_CHUNK_SIZE
    chunk_dim: int = DEFAULT_CHUNK_DIM
    hidden_dim: int = DEFAULT_HIDDEN_DIM
    doc_dim: int = DEFAULT_DOC_DIM
    seed: int = 0


class DocumentEncoder:
    """Holds one aggregator per text kind plus a shared chunk backend."""

    KINDS = ("bill", "speech")

    def __init__(self, backend: ChunkBackend, config: EncoderConfig | None = None):
        self.config = config if config is not None else EncoderConfig()
        self.backend = backend
        self.aggregators = {
            kind: RecurrentAggregator(
                self.config.chunk_dim,
                self.config.hidden_dim,
                seed=self.config.seed + offset,
            )
            for offset, kind in enumerate(self.KINDS)
        }

    def encode(self, text: str, kind: str) -> np.ndarray:
        if kind not in self.aggregators:
            raise ValueError(f"unknown kind {kind!r}")
        chunks = chunk_document(text, self.config.chunk_size)
        vectors = np.stack(
            [embed_chunk(c, self.backend, self.config.chunk_dim) for c in chunks]
        )
        aggregator = self.aggregators[kind]
        with torch.no_grad():
            h_fwd, h_bwd = aggregator(torch.from_numpy(vectors))
            doc = pool(h_fwd, h_bwd, self.config.doc_dim)
        return doc.numpy().astype(np.float32)

    def encode_corpus(
        self, texts: dict[str, str], kind: str
    ) -> dict[str, np.ndarray]:
        return {key: self.encode(text, kind) for key, text in sorted(texts.items())}
