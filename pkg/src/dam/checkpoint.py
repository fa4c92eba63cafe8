"""Canonical text checkpoints.

Line 1 is a JSON header (format, variant, class order, hyperparameters,
vocabularies).  Each following line is one parameter:
``{"name": ..., "shape": [...], "values": [...]}`` with values flattened in
row-major order.  Floats are written with Python's shortest round-trip repr,
so loading and re-saving reproduces the file byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import POLARITIES, Vocab
from .model import DualAttentionModel, Hyperparams, from_arrays

FORMAT = "dam-checkpoint/1"


class CheckpointError(ValueError):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


@dataclass
class Checkpoint:
    variant: str
    hp: Hyperparams
    vocab: Vocab
    params: dict[str, np.ndarray]
    class_order: tuple[str, ...] = POLARITIES

    @classmethod
    def from_model(cls, model: DualAttentionModel) -> "Checkpoint":
        return cls(
            variant=model.variant,
            hp=Hyperparams(**model.hp.to_dict()),
            vocab=Vocab(list(model.vocab.words), list(model.vocab.labels)),
            params={k: t.data.copy() for k, t in model.params.items()},
        )

    def to_model(self) -> DualAttentionModel:
        if tuple(self.class_order) != POLARITIES:
            raise CheckpointError(f"class order {list(self.class_order)} differs from {list(POLARITIES)}")
        return from_arrays(self.variant, self.hp, self.vocab, self.params)

    def dumps(self) -> str:
        header = {
            "format": FORMAT,
            "variant": self.variant,
            "class_order": list(self.class_order),
            "hyperparams": self.hp.to_dict(),
            "vocab": {"words": list(self.vocab.words), "labels": list(self.vocab.labels)},
        }
        lines = [_dumps(header)]
        for name, arr in self.params.items():
            lines.append(_dumps({"name": name, "shape": list(arr.shape), "values": arr.reshape(-1).tolist()}))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Checkpoint":
        lines = text.splitlines()
        if not lines:
            raise CheckpointError("empty checkpoint")
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError as e:
            raise CheckpointError(f"unreadable checkpoint header: {e.msg}") from None
        if header.get("format") != FORMAT:
            raise CheckpointError(f"unsupported checkpoint format {header.get('format')!r}")
        params = {}
        for lineno, line in enumerate(lines[1:], start=2):
            rec = json.loads(line)
            arr = np.array(rec["values"], dtype=np.float64)
            shape = tuple(rec["shape"])
            if arr.size != int(np.prod(shape)):
                raise CheckpointError(f"line {lineno}: {arr.size} values for shape {shape}")
            params[rec["name"]] = arr.reshape(shape)
        try:
            hp = Hyperparams.from_dict(header["hyperparams"])
        except (TypeError, ValueError) as e:
            raise CheckpointError(str(e)) from None
        return cls(
            variant=header["variant"],
            hp=hp,
            vocab=Vocab(header["vocab"]["words"], header["vocab"]["labels"]),
            params=params,
            class_order=tuple(header["class_order"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Checkpoint":
        return cls.loads(Path(path).read_text(encoding="utf-8"))

    def parameter_names(self) -> list[str]:
        return list(self.params)
