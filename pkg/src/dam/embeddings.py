"""Word and dependency-label embedding tables."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .compute import Tensor, gather
from .corpus import CorpusError, Vocab


@dataclass
class EmbeddingTable:
    matrix: Tensor
    trainable: bool = True

    def __post_init__(self):
        self.matrix.requires_grad = self.trainable

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


def random_table(rows: int, dim: int, epsilon: float, rng: np.random.Generator,
                 pad_row: int | None = None, name: str | None = None) -> EmbeddingTable:
    values = rng.uniform(-epsilon, epsilon, size=(rows, dim))
    if pad_row is not None:
        values[pad_row] = 0.0
    return EmbeddingTable(Tensor(values, requires_grad=True, name=name))


def load_pretrained(path: str | Path, vocab: Vocab, dim: int, epsilon: float = 0.01,
                    seed: int = 0) -> EmbeddingTable:
    """Build a word table from a GloVe-style text file.

    Rows for vocabulary words found in the file are copied; every other row
    is drawn from U(-epsilon, epsilon).  The padding row is zero.
    """
    rng = np.random.default_rng(seed)
    table = rng.uniform(-epsilon, epsilon, size=(vocab.V, dim))
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            word, values = parts[0], parts[1:]
            if len(values) != dim:
                raise CorpusError(f"vector for {word!r} has {len(values)} values, expected {dim}", lineno)
            idx = vocab.word_to_index.get(word)
            if idx is None or idx in (vocab.pad_index, vocab.unk_index):
                continue
            try:
                table[idx] = [float(v) for v in values]
            except ValueError:
                raise CorpusError(f"non-numeric vector entry for {word!r}", lineno) from None
    table[vocab.pad_index] = 0.0
    return EmbeddingTable(Tensor(table, requires_grad=True, name="word_emb"))


def lookup(table: EmbeddingTable, indices) -> Tensor:
    """Row gather, i.e. the one-hot matrix product without materializing it."""
    return gather(table.matrix, indices)
