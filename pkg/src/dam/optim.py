"""Adam with bias correction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .compute import Tensor


class MissingGradientError(RuntimeError):
    pass


@dataclass
class AdamState:
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(params: dict[str, Tensor], state: AdamState, lr: float) -> AdamState:
    """Update every trainable tensor in place from its ``grad`` and clear the gradients.

    Raises MissingGradientError if a trainable tensor has no gradient; that
    almost always means a parameter was left out of the forward wiring.
    """
    trainable = {k: t for k, t in params.items() if t.requires_grad}
    missing = [k for k, t in trainable.items() if t.grad is None]
    if missing:
        raise MissingGradientError(f"no gradient for trainable parameter(s): {', '.join(missing)}")

    state.step += 1
    bc1 = 1.0 - state.beta1 ** state.step
    bc2 = 1.0 - state.beta2 ** state.step
    for k, t in trainable.items():
        g = t.grad
        if k not in state.m:
            state.m[k] = np.zeros_like(t.data)
            state.v[k] = np.zeros_like(t.data)
        m, v = state.m[k], state.v[k]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        t.data -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
        t.zero_grad()
    return state
