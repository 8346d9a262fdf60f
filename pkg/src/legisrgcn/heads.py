"""Task heads, binary cross-entropy losses, auxiliary samplers, joint loss."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import torch
from torch import nn


class HeadError(Exception):
    pass


class DimensionMismatch(HeadError):
    pass


class NoSpeechAvailable(HeadError):
    pass


class NoCitationAvailable(HeadError):
    pass


PROB_EPS = 1e-12

REPRESENTATION_DIM = 64


class BinaryHead(nn.Module):
    """Single affine layer with a two-class softmax; returns the probability
    of the positive class (active / author / cited)."""

    def __init__(self, in_dim: int):
        super().__init__()
        self.in_dim = in_dim
        self.affine = nn.Linear(in_dim, 2)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[-1] != self.in_dim:
            raise DimensionMismatch(f"expected width {self.in_dim}, got {x.shape[-1]}")
        logits = self.affine(x)
        return torch.softmax(logits, dim=-1)[..., 1]


class TaskHeads(nn.Module):
    """The three classification heads over final node representations.

    Cosponsorship takes [legislator; bill; sponsor] (3 x 64), authorship
    [legislator; speech], citation [cosponsor; other legislator] (2 x 64 each).
    """

    def __init__(self, rep_dim: int = REPRESENTATION_DIM):
        super().__init__()
        self.rep_dim = rep_dim
        self.cosponsorship = BinaryHead(3 * rep_dim)
        self.authorship = BinaryHead(2 * rep_dim)
        self.citation = BinaryHead(2 * rep_dim)

    def predict_cosponsorship(
        self, e_l: torch.Tensor, e_b: torch.Tensor, e_sponsor: torch.Tensor
    ) -> torch.Tensor:
        return self.cosponsorship(torch.cat([e_l, e_b, e_sponsor], dim=-1))

    def predict_authorship(self, e_l: torch.Tensor, e_s: torch.Tensor) -> torch.Tensor:
        return self.authorship(torch.cat([e_l, e_s], dim=-1))

    def predict_citation(self, e_c: torch.Tensor, e_o: torch.Tensor) -> torch.Tensor:
        return self.citation(torch.cat([e_c, e_o], dim=-1))


def binary_cross_entropy(p: torch.Tensor, y: torch.Tensor) -> torch.Tensor:
    """-(y log p + (1-y) log(1-p)), probabilities clamped away from {0, 1}.

    Computed in double precision: the clamp bound 1 - 1e-12 is not
    representable in single precision, so a float32 clamp would still let
    log(1 - p) diverge.
    """
    p = p.double().clamp(PROB_EPS, 1.0 - PROB_EPS)
    y = y.double()
    return -(y * torch.log(p) + (1.0 - y) * torch.log(1.0 - p)).mean()


loss_cosp = binary_cross_entropy
loss_auth = binary_cross_entropy
loss_cit = binary_cross_entropy


@dataclass(frozen=True)
class LossWeights:
    primary: float = 0.8
    authorship: float = 0.1
    citation: float = 0.1

    def __post_init__(self):
        if min(self.primary, self.authorship, self.citation) < 0:
            raise ValueError("loss weights must be nonnegative")


def loss_total(
    cosponsorship_loss, authorship_loss, citation_loss, weights: LossWeights
):
    return (
        weights.primary * cosponsorship_loss
        + weights.authorship * authorship_loss
        + weights.citation * citation_loss
    )


@dataclass(frozen=True)
class TrainingExample:
    task: str  # "cosponsorship" | "authorship" | "citation"
    refs: tuple[str, ...]
    label: int


class AuthorshipSampler:
    """Draws a speech per cosponsorship event; positive draws come from the
    cosponsor's own speeches at the configured rate."""

    def __init__(
        self,
        speeches_by_author: Mapping[str, Sequence[str]],
        rng: np.random.Generator,
        positive_rate: float = 0.5,
    ):
        self.speeches_by_author = {
            k: sorted(v) for k, v in speeches_by_author.items() if v
        }
        self.all_speeches = sorted(
            (author, sid)
            for author, sids in self.speeches_by_author.items()
            for sid in sids
        )
        self.rng = rng
        self.positive_rate = positive_rate

    def draw(self, legislator: str) -> TrainingExample:
        if not self.all_speeches:
            raise NoSpeechAvailable("empty speech pool")
        positive = self.rng.random() < self.positive_rate
        if positive:
            own = self.speeches_by_author.get(legislator)
            if not own:
                raise NoSpeechAvailable(f"{legislator} has no speeches")
            sid = own[self.rng.integers(len(own))]
            return TrainingExample("authorship", (legislator, sid), 1)
        others = [
            (author, sid) for author, sid in self.all_speeches if author != legislator
        ]
        if not others:
            raise NoSpeechAvailable("no speeches by other legislators")
        _, sid = others[self.rng.integers(len(others))]
        return TrainingExample("authorship", (legislator, sid), 0)


class CitationSampler:
    """Draws a colleague per cosponsorship event; positives come from the
    cosponsor's cited set at the configured rate."""

    def __init__(
        self,
        cited_by: Mapping[str, set[str]],
        roster_ids: Sequence[str],
        rng: np.random.Generator,
        positive_rate: float = 0.5,
    ):
        self.cited_by = {k: sorted(v) for k, v in cited_by.items()}
        self.roster_ids = sorted(roster_ids)
        self.rng = rng
        self.positive_rate = positive_rate

    def draw(self, legislator: str) -> TrainingExample:
        positive = self.rng.random() < self.positive_rate
        cited = self.cited_by.get(legislator, [])
        if positive:
            if not cited:
                raise NoCitationAvailable(f"{legislator} cites nobody")
            other = cited[self.rng.integers(len(cited))]
            return TrainingExample("citation", (legislator, other), 1)
        pool = [
            l for l in self.roster_ids if l != legislator and l not in set(cited)
        ]
        if not pool:
            raise NoCitationAvailable(f"no negative candidates for {legislator}")
        other = pool[self.rng.integers(len(pool))]
        return TrainingExample("citation", (legislator, other), 0)
