"""Relational graph convolution layers and the two-layer network."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import torch
from torch import nn

from .cachefile import read_tensors, write_tensors
from .graph import HeteroGraph, NodeType, relation_names


class RGCNError(Exception):
    pass


class DimensionMismatch(RGCNError):
    pass


@dataclass
class GraphTensors:
    """Tensorized graph: per-type raw features plus global-index edge arrays."""

    features: dict[NodeType, torch.Tensor]
    edges: dict[str, tuple[torch.Tensor, torch.Tensor]]  # name -> (src, tgt)
    type_slices: dict[NodeType, slice]
    num_nodes: int

    @classmethod
    def from_graph(cls, graph: HeteroGraph, reverse: bool = True) -> "GraphTensors":
        edges = {
            name: (torch.from_numpy(src), torch.from_numpy(tgt))
            for name, (src, tgt) in graph.edge_arrays(reverse=reverse).items()
        }
        features = {
            t: torch.from_numpy(np.asarray(f, dtype=np.float32))
            for t, f in graph.features.items()
        }
        return cls(
            features=features,
            edges=edges,
            type_slices=graph.type_slices(),
            num_nodes=graph.num_nodes(),
        )


class RelationalGraphLayer(nn.Module):
    """One convolution: per-relation mean-aggregated messages plus self-loop.

    out_v = act( sum_r mean_{j in N_v^r} W_r x_j  +  W_0 x_v + b )

    Relations with no in-neighbors at a node contribute nothing there.
    """

    def __init__(
        self,
        relations: Sequence[str],
        in_dim: int,
        out_dim: int,
        activation: str = "relu",
    ):
        super().__init__()
        self.relations = list(relations)
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.activation = activation
        bound = 1.0 / np.sqrt(in_dim)
        self.rel_weights = nn.ParameterDict(
            {
                name: nn.Parameter((torch.rand(out_dim, in_dim) * 2 - 1) * bound)
                for name in self.relations
            }
        )
        self.self_weight = nn.Parameter((torch.rand(out_dim, in_dim) * 2 - 1) * bound)
        self.bias = nn.Parameter(torch.zeros(out_dim))

    def forward(
        self,
        x: torch.Tensor,
        edges: Mapping[str, tuple[torch.Tensor, torch.Tensor]],
    ) -> torch.Tensor:
        if x.shape[1] != self.in_dim:
            raise DimensionMismatch(f"expected width {self.in_dim}, got {x.shape[1]}")
        n = x.shape[0]
        out = x @ self.self_weight.T + self.bias
        for name in self.relations:
            if name not in edges:
                continue
            src, tgt = edges[name]
            if src.numel() == 0:
                continue
            msg = x[src] @ self.rel_weights[name].T
            agg = x.new_zeros((n, self.out_dim))
            agg.index_add_(0, tgt, msg)
            deg = x.new_zeros(n)
            deg.index_add_(0, tgt, torch.ones_like(tgt, dtype=x.dtype))
            out = out + agg / deg.clamp(min=1.0).unsqueeze(1)
        if self.activation == "relu":
            out = torch.relu(out)
        return out


class RGCNModel(nn.Module):
    """Per-type input projections followed by two relational convolutions.

    Node types arrive with different raw widths; a learned linear projection
    per type brings them to the first layer's input width. Layer 1 uses a
    rectifier; layer 2 is linear so its outputs feed logits directly.
    """

    def __init__(
        self,
        type_dims: Mapping[NodeType, int],
        relations: Sequence[str] | None = None,
        layer_dims: tuple[int, int] = (128, 64),
        dropout: float = 0.0,
        seed: int | None = None,
    ):
        super().__init__()
        if seed is not None:
            torch.manual_seed(seed)
        relations = list(relations) if relations is not None else relation_names()
        self.relations = relations
        self.layer_dims = layer_dims
        self.proj = nn.ModuleDict(
            {
                node_type.value: nn.Linear(dim, layer_dims[0])
                for node_type, dim in type_dims.items()
            }
        )
        self.layer1 = RelationalGraphLayer(
            relations, layer_dims[0], layer_dims[0], activation="relu"
        )
        self.layer2 = RelationalGraphLayer(
            relations, layer_dims[0], layer_dims[1], activation="linear"
        )
        self.dropout = nn.Dropout(dropout)

    def project(self, tensors: GraphTensors) -> torch.Tensor:
        parts = []
        for node_type in (NodeType.SPEECH, NodeType.LEGISLATOR, NodeType.BILL):
            feats = tensors.features[node_type]
            if feats.shape[0]:
                parts.append(self.proj[node_type.value](feats))
            else:
                parts.append(feats.new_zeros((0, self.layer_dims[0])))
        return torch.cat(parts, dim=0)

    def forward(self, tensors: GraphTensors) -> torch.Tensor:
        x = self.project(tensors)
        x = self.layer1(x, tensors.edges)
        x = self.dropout(x)
        x = self.layer2(x, tensors.edges)
        return x


def checkpoint_tensors(model: RGCNModel) -> dict[str, np.ndarray]:
    """Name parameters for the checkpoint file format."""
    out: dict[str, np.ndarray] = {}
    for node_type in model.proj:
        out[f"proj.{node_type}.W"] = model.proj[node_type].weight.detach().numpy()
        out[f"proj.{node_type}.b"] = model.proj[node_type].bias.detach().numpy()
    for k, layer in (("1", model.layer1), ("2", model.layer2)):
        for name in layer.relations:
            out[f"layer{k}.rel{name}.W"] = layer.rel_weights[name].detach().numpy()
        out[f"layer{k}.W0"] = layer.self_weight.detach().numpy()
        out[f"layer{k}.bias"] = layer.bias.detach().numpy()
    return out


def save_checkpoint(model: RGCNModel, path: Path, extra: Mapping[str, np.ndarray] | None = None) -> None:
    tensors = checkpoint_tensors(model)
    if extra:
        tensors.update({k: np.asarray(v) for k, v in extra.items()})
    write_tensors(path, tensors)


def load_checkpoint(model: RGCNModel, path: Path) -> dict[str, np.ndarray]:
    """Restore model parameters; returns any extra tensors found in the file."""
    tensors = read_tensors(path)
    extra: dict[str, np.ndarray] = {}
    with torch.no_grad():
        for key, arr in tensors.items():
            if key.startswith("proj."):
                _, node_type, kind = key.split(".")
                param = (
                    model.proj[node_type].weight
                    if kind == "W"
                    else model.proj[node_type].bias
                )
                param.copy_(torch.from_numpy(arr))
            elif key.startswith("layer"):
                layer = model.layer1 if key.startswith("layer1") else model.layer2
                part = key.split(".", 1)[1]
                if part == "W0":
                    layer.self_weight.copy_(torch.from_numpy(arr))
                elif part == "bias":
                    layer.bias.copy_(torch.from_numpy(arr))
                else:
                    rel = part[len("rel") : -len(".W")]
                    layer.rel_weights[rel].copy_(torch.from_numpy(arr))
            else:
                extra[key] = arr
    return extra
