"""Bi-LSTM encoders for the sentence and the aspect term."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compute import Primitive, ShapeError, Tensor, add, columns, concat, gather, matmul, mul, sigmoid, tanh


@dataclass
class LstmDirectionParams:
    """Gate weights stacked as [input | forget | cell | output] along the last axis."""

    W_x: Tensor  # in_dim x 4h
    W_h: Tensor  # h x 4h
    b: Tensor  # 4h

    def __post_init__(self):
        in_dim, four_h = self.W_x.shape
        h = self.W_h.shape[0]
        if four_h != 4 * h or self.W_h.shape != (h, 4 * h) or self.b.shape != (4 * h,):
            raise ValueError(
                f"inconsistent LSTM shapes: W_x {self.W_x.shape}, W_h {self.W_h.shape}, b {self.b.shape}"
            )

    @property
    def hidden(self) -> int:
        return self.W_h.shape[0]

    @property
    def in_dim(self) -> int:
        return self.W_x.shape[0]

    def tensors(self) -> dict[str, Tensor]:
        return {"W_x": self.W_x, "W_h": self.W_h, "b": self.b}

    @classmethod
    def init(cls, in_dim: int, hidden: int, epsilon: float, rng: np.random.Generator, name: str = ""):
        def u(*shape, tag):
            return Tensor(rng.uniform(-epsilon, epsilon, size=shape), requires_grad=True, name=f"{name}.{tag}")

        return cls(u(in_dim, 4 * hidden, tag="W_x"), u(hidden, 4 * hidden, tag="W_h"), u(4 * hidden, tag="b"))


@dataclass
class BiLstmParams:
    forward: LstmDirectionParams
    backward: LstmDirectionParams

    def __post_init__(self):
        if (self.forward.in_dim, self.forward.hidden) != (self.backward.in_dim, self.backward.hidden):
            raise ValueError("forward and backward LSTM dimensions differ")

    @property
    def hidden(self) -> int:
        return self.forward.hidden

    def tensors(self) -> dict[str, Tensor]:
        out = {f"fw.{k}": v for k, v in self.forward.tensors().items()}
        out.update({f"bw.{k}": v for k, v in self.backward.tensors().items()})
        return out

    @classmethod
    def init(cls, in_dim: int, hidden: int, epsilon: float, rng: np.random.Generator, name: str = ""):
        fw = LstmDirectionParams.init(in_dim, hidden, epsilon, rng, f"{name}.fw")
        bw = LstmDirectionParams.init(in_dim, hidden, epsilon, rng, f"{name}.bw")
        return cls(fw, bw)


def _cell(z: Tensor, c_prev: Tensor, d: int) -> tuple[Tensor, Tensor]:
    i = sigmoid(columns(z, 0, d))
    f = sigmoid(columns(z, d, 2 * d))
    g = tanh(columns(z, 2 * d, 3 * d))
    o = sigmoid(columns(z, 3 * d, 4 * d))
    c = add(mul(f, c_prev), mul(i, g))
    h = mul(o, tanh(c))
    return h, c


def lstm_step(params: LstmDirectionParams, x_t: Tensor, h_prev: Tensor, c_prev: Tensor) -> tuple[Tensor, Tensor]:
    """One LSTM cell update; returns (h_t, c_t)."""
    z = add(add(matmul(x_t, params.W_x), matmul(h_prev, params.W_h)), params.b)
    return _cell(z, c_prev, params.hidden)


def _sig(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _lstm_seq_fwd(X, W_x, W_h, b):
    if X.ndim != 2 or X.shape[1] != W_x.shape[0] or W_h.shape[1] != W_x.shape[1] or b.shape != (W_x.shape[1],):
        raise ShapeError(f"lstm_sequence: X {X.shape}, W_x {W_x.shape}, W_h {W_h.shape}, b {b.shape}")
    n, d = X.shape[0], W_h.shape[0]
    xw = X @ W_x + b
    H = np.zeros((n + 1, d))  # H[0] is the zero initial state
    C = np.zeros((n + 1, d))
    gates = np.empty((n, 4 * d))
    for t in range(n):
        z = xw[t] + H[t] @ W_h
        i, f, g, o = _sig(z[:d]), _sig(z[d : 2 * d]), np.tanh(z[2 * d : 3 * d]), _sig(z[3 * d :])
        C[t + 1] = f * C[t] + i * g
        H[t + 1] = o * np.tanh(C[t + 1])
        gates[t] = np.concatenate([i, f, g, o])
    return H[1:].copy(), (H, C, gates)


def _lstm_seq_bwd(dH, saved, arrays, out, needs=(True, True, True, True)):
    X, W_x, W_h, b = arrays
    H, C, gates = saved
    n, d = X.shape[0], W_h.shape[0]
    dZ = np.empty((n, 4 * d))
    dh_next = np.zeros(d)
    dc_next = np.zeros(d)
    for t in range(n - 1, -1, -1):
        i, f, g, o = gates[t, :d], gates[t, d : 2 * d], gates[t, 2 * d : 3 * d], gates[t, 3 * d :]
        tc = np.tanh(C[t + 1])
        dh = dH[t] + dh_next
        dc = dh * o * (1.0 - tc * tc) + dc_next
        dZ[t, :d] = dc * g * i * (1.0 - i)
        dZ[t, d : 2 * d] = dc * C[t] * f * (1.0 - f)
        dZ[t, 2 * d : 3 * d] = dc * i * (1.0 - g * g)
        dZ[t, 3 * d :] = dh * tc * o * (1.0 - o)
        dc_next = dc * f
        dh_next = dZ[t] @ W_h.T
    return (
        dZ @ W_x.T if needs[0] else None,
        X.T @ dZ if needs[1] else None,
        H[:-1].T @ dZ if needs[2] else None,
        dZ.sum(axis=0) if needs[3] else None,
    )


lstm_sequence = Primitive("lstm_sequence", _lstm_seq_fwd, _lstm_seq_bwd, selective=True)
"""Whole-sequence LSTM from zero initial state (fused; same maths as repeated lstm_step)."""


def _run_direction(params: LstmDirectionParams, seq: Tensor) -> Tensor:
    return lstm_sequence(seq, params.W_x, params.W_h, params.b)


def run_direction_stepwise(params: LstmDirectionParams, seq: Tensor) -> Tensor:
    """Reference path built from lstm_step, one primitive per gate operation."""
    n, d = seq.shape[0], params.hidden
    h = Tensor(np.zeros((1, d)))
    c = Tensor(np.zeros((1, d)))
    states = []
    for t in range(n):
        h, c = lstm_step(params, gather(seq, [t]), h, c)
        states.append(h)
    return states[0] if n == 1 else concat(states, axis=0)


def bilstm_encode(params: BiLstmParams, seq: Tensor) -> Tensor:
    """Encode an n x in_dim sequence into n x 2h: row t is [forward_t ; backward_t]."""
    n = seq.shape[0]
    if seq.ndim != 2 or n < 1:
        raise ValueError(f"bilstm_encode expects a non-empty matrix, got shape {seq.shape}")
    fw = _run_direction(params.forward, seq)
    rev = list(range(n - 1, -1, -1))
    bw = gather(_run_direction(params.backward, gather(seq, rev)), rev)
    return concat([fw, bw], axis=1)
