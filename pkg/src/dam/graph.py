"""Graph convolution over the (undirected) dependency graph."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compute import ShapeError, Tensor, matmul, relu


def normalize_adjacency(G: np.ndarray) -> np.ndarray:
    """D^-1/2 (G + I) D^-1/2 where D is the degree matrix of G + I."""
    G = np.asarray(G, dtype=np.float64)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError(f"adjacency must be square, got shape {G.shape}")
    if not np.array_equal(G, G.T):
        raise ValueError("adjacency matrix is not symmetric")
    A_hat = G + np.eye(G.shape[0])
    inv_sqrt = 1.0 / np.sqrt(A_hat.sum(axis=1))
    return A_hat * inv_sqrt[:, None] * inv_sqrt[None, :]


ACTIVATIONS = {"relu": relu, "identity": None}


@dataclass
class GcnStack:
    weights: list[Tensor]
    activation: str = "relu"

    def __post_init__(self):
        if not self.weights:
            raise ValueError("a GCN stack needs at least one layer")
        for prev, nxt in zip(self.weights, self.weights[1:]):
            if prev.shape[1] != nxt.shape[0]:
                raise ShapeError(f"GCN layer dims do not chain: {prev.shape} -> {nxt.shape}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    @property
    def in_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def out_dim(self) -> int:
        return self.weights[-1].shape[1]

    @classmethod
    def init(cls, dims: list[int], epsilon: float, rng: np.random.Generator, name: str = ""):
        ws = [
            Tensor(rng.uniform(-epsilon, epsilon, size=(a, b)), requires_grad=True, name=f"{name}.{i}.W")
            for i, (a, b) in enumerate(zip(dims, dims[1:]))
        ]
        return cls(ws)


def gcn_forward(H0: Tensor, Ghat, stack: GcnStack) -> Tensor:
    """Apply H <- act(Ghat @ H @ W) once per layer of the stack."""
    Ghat = Ghat if isinstance(Ghat, Tensor) else Tensor(Ghat)
    if H0.shape[0] != Ghat.shape[0]:
        raise ShapeError(f"gcn_forward: {H0.shape[0]} node rows but adjacency is {Ghat.shape}")
    if H0.shape[1] != stack.in_dim:
        raise ShapeError(f"gcn_forward: input width {H0.shape[1]} != first layer input {stack.in_dim}")
    H = H0
    act = ACTIVATIONS[stack.activation]
    for W in stack.weights:
        H = matmul(Ghat, matmul(H, W))
        if act is not None:
            H = act(H)
    return H
