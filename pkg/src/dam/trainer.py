"""Training loop, evaluation and per-epoch logging."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .checkpoint import Checkpoint
from .classifier import objective, predict
from .compute import Record, add, scale, sum_squares
from .corpus import LabeledExample, Vocab, build_vocab
from .embeddings import EmbeddingTable
from .metrics import Metrics, compute_metrics
from .model import DualAttentionModel, EncodedExample, Hyperparams, assemble, encode_all
from .optim import AdamState, adam_step

log = logging.getLogger(__name__)


class NonFiniteLossError(ArithmeticError):
    pass


@dataclass
class TrainResult:
    checkpoint: Checkpoint
    log: list[dict] = field(default_factory=list)
    model: DualAttentionModel | None = None


def predict_labels(model: DualAttentionModel, encoded: Sequence[EncodedExample]) -> list[int]:
    return [predict(model.forward(enc)[0]).label for enc in encoded]


def evaluate_model(model: DualAttentionModel, examples: Sequence[LabeledExample]) -> Metrics:
    if not examples:
        raise ValueError("cannot evaluate on an empty dataset")
    encoded = encode_all(model, examples)
    return compute_metrics([e.gold for e in encoded], predict_labels(model, encoded))


def evaluate(checkpoint: Checkpoint, examples: Sequence[LabeledExample]) -> Metrics:
    return evaluate_model(checkpoint.to_model(), examples)


def _regularizer_step(model: DualAttentionModel, lam: float) -> float:
    params = model.trainable()
    if lam <= 0 or not params:
        return 0.0
    with Record() as rec:
        reg = None
        for t in params:
            s = sum_squares(t)
            reg = s if reg is None else add(reg, s)
        reg = scale(reg, lam)
    rec.backward()
    return float(reg.data)


def train_step(model: DualAttentionModel, batch: Sequence[EncodedExample], state: AdamState) -> tuple[float, int]:
    """One optimizer step on a batch; returns (objective value, floored-probability count).

    Each example gets its own record; gradients accumulate in the parameters
    and the L2 term is added once per batch.
    """
    total, clamped = 0.0, 0
    for enc in batch:
        with Record() as rec:
            loss, c = objective([model.probs(enc)], [enc.gold], [], 0.0)
        rec.backward()
        total += float(loss.data)
        clamped += c
    total += _regularizer_step(model, model.hp.l2_lambda)
    if not math.isfinite(total):
        raise NonFiniteLossError(f"non-finite loss {total} at optimizer step {state.step + 1}")
    adam_step(model.params, state, model.hp.learning_rate)
    return total, clamped


def train(
    examples: Sequence[LabeledExample],
    hp: Hyperparams,
    variant: str = "dual",
    dev: Sequence[LabeledExample] | None = None,
    vocab: Vocab | None = None,
    pretrained: EmbeddingTable | None = None,
) -> TrainResult:
    """Train from a fresh initialization.

    Runs ``hp.epochs`` epochs of ceil(N / batch_size) Adam steps over a
    seeded per-epoch shuffle.  Each log entry holds the epoch-average loss and
    the end-of-epoch train accuracy (plus dev metrics when ``dev`` is given,
    in which case the best-dev-accuracy checkpoint is returned).
    """
    if not examples:
        raise ValueError("training set is empty")
    vocab = vocab or build_vocab(list(examples), hp.min_count)
    model = assemble(variant, hp, vocab, pretrained)
    encoded = encode_all(model, examples)
    dev_encoded = encode_all(model, dev) if dev else None
    shuffle_rng = np.random.default_rng([hp.seed, 1])
    state = AdamState()
    best = Checkpoint.from_model(model)
    best_dev = -1.0
    history: list[dict] = []

    for epoch in range(1, hp.epochs + 1):
        order = shuffle_rng.permutation(len(encoded))
        epoch_loss, clamped = 0.0, 0
        for start in range(0, len(order), hp.batch_size):
            batch = [encoded[i] for i in order[start : start + hp.batch_size]]
            loss, c = train_step(model, batch, state)
            epoch_loss += loss
            clamped += c
        train_m = compute_metrics([e.gold for e in encoded], predict_labels(model, encoded))
        entry = {
            "epoch": epoch,
            "loss": epoch_loss / len(encoded),
            "train_accuracy": train_m.accuracy,
            "train_macro_f1": train_m.macro_f1,
            "steps": state.step,
        }
        if clamped:
            entry["clamped_probabilities"] = clamped
            log.warning("epoch %d: %d gold probabilities floored before log", epoch, clamped)
        if dev_encoded:
            dev_m = compute_metrics([e.gold for e in dev_encoded], predict_labels(model, dev_encoded))
            entry["dev_accuracy"] = dev_m.accuracy
            entry["dev_macro_f1"] = dev_m.macro_f1
            if dev_m.accuracy > best_dev:
                best_dev = dev_m.accuracy
                best = Checkpoint.from_model(model)
        log.info("epoch %d loss %.6f train_acc %.4f", epoch, entry["loss"], entry["train_accuracy"])
        history.append(entry)

    if not dev_encoded:
        best = Checkpoint.from_model(model)
    return TrainResult(best, history, model)
