"""Aspect attention (scaled dot product) and dependency attention (additive)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .compute import ShapeError, Tensor, add, matmul, mean, scale, softmax, tanh, transpose


@dataclass
class DepAttentionParams:
    W_q: Tensor  # dim_depgcn x d_att
    W_k: Tensor  # 2d_h x d_att
    w_v: Tensor  # d_att

    def __post_init__(self):
        if self.W_q.shape[1] != self.W_k.shape[1] or self.w_v.shape != (self.W_q.shape[1],):
            raise ShapeError(
                f"attention projections disagree: W_q {self.W_q.shape}, W_k {self.W_k.shape}, w_v {self.w_v.shape}"
            )

    def tensors(self) -> dict[str, Tensor]:
        return {"W_q": self.W_q, "W_k": self.W_k, "w_v": self.w_v}

    @classmethod
    def init(cls, query_dim: int, key_dim: int, d_att: int, epsilon: float, rng: np.random.Generator,
             name: str = "dep_att"):
        def u(*shape, tag):
            return Tensor(rng.uniform(-epsilon, epsilon, size=shape), requires_grad=True, name=f"{name}.{tag}")

        return cls(u(query_dim, d_att, tag="W_q"), u(key_dim, d_att, tag="W_k"), u(d_att, tag="w_v"))


@dataclass
class AttentionTrace:
    """Attention weights kept for inspection: aspect rows (m x n), dependency row (n)."""

    aspect: np.ndarray | None = None
    dependency: np.ndarray | None = None


def aspect_attention(h_a: Tensor, h_s_k: Tensor) -> tuple[Tensor, Tensor]:
    """Aspect rows query the word-GCN states; returns (h_w, weights m x n)."""
    if h_a.ndim != 2 or h_s_k.ndim != 2 or h_a.shape[1] != h_s_k.shape[1]:
        raise ShapeError(f"aspect_attention: h_a {h_a.shape} vs h_s_k {h_s_k.shape}")
    d = h_s_k.shape[1]
    scores = scale(matmul(h_a, transpose(h_s_k)), 1.0 / math.sqrt(d))
    weights = softmax(scores)
    context = matmul(weights, h_s_k)
    return mean(context, axis=0), weights


def dependency_attention(D_k: Tensor, h_s: Tensor, params: DepAttentionParams) -> tuple[Tensor, Tensor]:
    """Label-GCN rows score their aligned word states; returns (h_d, weights n)."""
    if D_k.shape[0] != h_s.shape[0]:
        raise ShapeError(f"dependency_attention: {D_k.shape[0]} query rows vs {h_s.shape[0]} key rows")
    if D_k.shape[1] != params.W_q.shape[0] or h_s.shape[1] != params.W_k.shape[0]:
        raise ShapeError(
            f"dependency_attention: D_k {D_k.shape} / h_s {h_s.shape} do not fit "
            f"W_q {params.W_q.shape} / W_k {params.W_k.shape}"
        )
    hidden = tanh(add(matmul(D_k, params.W_q), matmul(h_s, params.W_k)))
    weights = softmax(matmul(hidden, params.w_v))
    return matmul(weights, h_s), weights
