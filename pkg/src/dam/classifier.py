"""Final MLP, polarity distribution and the training objective."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .compute import CE_FLOOR, ShapeError, Tensor, add, concat, cross_entropy, matmul, relu, scale, softmax, sum_squares
from .corpus import POLARITIES


@dataclass
class MlpParams:
    W1: Tensor  # in_dim x hidden
    b1: Tensor
    W2: Tensor  # hidden x 3
    b2: Tensor

    def __post_init__(self):
        hidden = self.W1.shape[1]
        if self.b1.shape != (hidden,) or self.W2.shape != (hidden, len(POLARITIES)) or self.b2.shape != (len(POLARITIES),):
            raise ShapeError(
                f"inconsistent MLP shapes: W1 {self.W1.shape}, b1 {self.b1.shape}, W2 {self.W2.shape}, b2 {self.b2.shape}"
            )

    @property
    def in_dim(self) -> int:
        return self.W1.shape[0]

    def tensors(self) -> dict[str, Tensor]:
        return {"W1": self.W1, "b1": self.b1, "W2": self.W2, "b2": self.b2}

    @classmethod
    def init(cls, in_dim: int, hidden: int, epsilon: float, rng: np.random.Generator, name: str = "mlp"):
        def u(*shape, tag):
            return Tensor(rng.uniform(-epsilon, epsilon, size=shape), requires_grad=True, name=f"{name}.{tag}")

        k = len(POLARITIES)
        return cls(u(in_dim, hidden, tag="W1"), u(hidden, tag="b1"), u(hidden, k, tag="W2"), u(k, tag="b2"))


def fuse_and_score(h_w: Tensor, h_d: Tensor | None, params: MlpParams, logit_relu: bool = False) -> Tensor:
    """Score the fused feature [h_w ; h_d]: relu(h W1 + b1) W2 + b2.

    With ``logit_relu`` the logits also pass through relu.  That form can
    leave a class with a negative pre-activation on every input, after which
    it gets no gradient and can never be predicted again.  ``h_d`` is None
    for the single-branch variants.
    """
    h_star = h_w if h_d is None else concat([h_w, h_d], axis=0)
    if h_star.shape != (params.in_dim,):
        raise ShapeError(f"fuse_and_score: feature vector {h_star.shape} vs W1 input {params.in_dim}")
    hidden = relu(add(matmul(h_star, params.W1), params.b1))
    logits = add(matmul(hidden, params.W2), params.b2)
    return relu(logits) if logit_relu else logits


@dataclass
class PolarityDistribution:
    probs: np.ndarray

    @property
    def label(self) -> int:
        # np.argmax returns the first maximum: ties go to the lowest class index
        return int(np.argmax(self.probs))

    @property
    def polarity(self) -> str:
        return POLARITIES[self.label]

    def as_dict(self) -> dict[str, float]:
        return {p: float(v) for p, v in zip(POLARITIES, self.probs)}


def predict(logits: Tensor) -> PolarityDistribution:
    z = np.asarray(logits.data if isinstance(logits, Tensor) else logits, dtype=np.float64)
    e = np.exp(z - z.max())
    return PolarityDistribution(e / e.sum())


def one_hot(label: int) -> np.ndarray:
    y = np.zeros(len(POLARITIES))
    y[label] = 1.0
    return y


def objective(probs: Sequence[Tensor], gold: Sequence[int], params: Sequence[Tensor], lam: float) -> tuple[Tensor, int]:
    """Summed cross-entropy over the batch plus ``lam`` times the squared L2 norm of ``params``.

    ``probs`` are softmax outputs built inside the active record.  Returns the
    loss tensor and the number of examples whose gold probability had to be
    floored before the log.
    """
    if len(probs) != len(gold) or not probs:
        raise ValueError(f"objective needs matching non-empty batches, got {len(probs)} / {len(gold)}")
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    clamped = 0
    total = None
    for p, y in zip(probs, gold):
        if p.data[y] < CE_FLOOR:
            clamped += 1
        term = cross_entropy(p, one_hot(y))
        total = term if total is None else add(total, term)
    if lam > 0 and params:
        reg = None
        for t in params:
            s = sum_squares(t)
            reg = s if reg is None else add(reg, s)
        total = add(total, scale(reg, lam))
    return total, clamped


def class_probs(logits: Tensor) -> Tensor:
    return softmax(logits)
