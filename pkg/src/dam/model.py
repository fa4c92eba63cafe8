"""Assembly of the dual-attention model and its two ablation variants.

``dual``     aspect attention and dependency attention in parallel, [h_w ; h_d] -> MLP
``non_dep``  no label embeddings, label GCN or dependency attention; h_w -> MLP
``serial``   dependency-attention weights rescale the word-GCN rows (row i by n * a_i),
             then aspect attention runs over them; its h_w -> MLP
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Iterable

import numpy as np

from .attention import AttentionTrace, DepAttentionParams, aspect_attention, dependency_attention
from .classifier import MlpParams, fuse_and_score
from .compute import Tensor, mul, reshape, scale, softmax
from .corpus import LabeledExample, Vocab, build_adjacency, dep_label_sequence
from .embeddings import EmbeddingTable, lookup, random_table
from .encoder import BiLstmParams, LstmDirectionParams, bilstm_encode
from .graph import GcnStack, gcn_forward, normalize_adjacency

VARIANTS = ("dual", "non_dep", "serial")


@dataclass
class Hyperparams:
    dim_w: int = 300
    dim_l: int = 300
    d_h: int = 100
    dim_depgcn: int | None = None  # defaults to 2 * d_h
    d_att: int | None = None  # defaults to 2 * d_h
    gcn_layers: int = 2
    mlp_hidden: int | None = None  # defaults to 2 * d_h
    learning_rate: float = 1e-3
    batch_size: int = 32
    l2_lambda: float = 1e-5
    epsilon_init: float = 0.01
    epochs: int = 30
    seed: int = 0
    min_count: int = 1
    logit_relu: bool = False  # True applies relu to the output logits as well

    def __post_init__(self):
        for name in ("dim_depgcn", "d_att", "mlp_hidden"):
            if getattr(self, name) is None:
                setattr(self, name, 2 * self.d_h)
        for f in fields(self):
            v = getattr(self, f.name)
            if f.type in ("bool", bool):
                if not isinstance(v, bool):
                    raise ValueError(f"hyperparameter {f.name} must be true or false, got {v!r}")
                continue
            if f.name in ("seed", "epochs", "l2_lambda"):
                if v < 0:
                    raise ValueError(f"hyperparameter {f.name} must be non-negative, got {v}")
            elif v <= 0:
                raise ValueError(f"hyperparameter {f.name} must be positive, got {v}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Hyperparams":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown hyperparameter(s): {', '.join(sorted(unknown))}")
        return cls(**d)


@dataclass
class EncodedExample:
    """Index form of a LabeledExample, ready for the forward pass."""

    words: list[int]
    aspect_words: list[int]
    labels: list[int]
    ghat: Tensor
    gold: int


class DualAttentionModel:
    def __init__(self, variant: str, hp: Hyperparams, vocab: Vocab, params: dict[str, Tensor]):
        self.variant = variant
        self.hp = hp
        self.vocab = vocab
        self.params = params
        p = params
        self.word_emb = EmbeddingTable(p["word_emb"], trainable=p["word_emb"].requires_grad)
        self.sent_lstm = _bilstm(p, "sent_lstm")
        self.aspect_lstm = _bilstm(p, "aspect_lstm")
        self.word_gcn = GcnStack([p[f"word_gcn.{i}.W"] for i in range(hp.gcn_layers)])
        self.mlp = MlpParams(p["mlp.W1"], p["mlp.b1"], p["mlp.W2"], p["mlp.b2"])
        if variant == "non_dep":
            self.label_emb = self.label_gcn = self.dep_att = None
        else:
            self.label_emb = EmbeddingTable(p["label_emb"])
            self.label_gcn = GcnStack([p[f"label_gcn.{i}.W"] for i in range(hp.gcn_layers)])
            self.dep_att = DepAttentionParams(p["dep_att.W_q"], p["dep_att.W_k"], p["dep_att.w_v"])

    @property
    def uses_labels(self) -> bool:
        return self.variant != "non_dep"

    def trainable(self) -> list[Tensor]:
        return [t for t in self.params.values() if t.requires_grad]

    def parameter_count(self) -> int:
        return sum(t.size for t in self.params.values())

    def encode(self, ex: LabeledExample) -> EncodedExample:
        s = ex.sentence
        return EncodedExample(
            words=self.vocab.words_to_indices(s.tokens),
            aspect_words=self.vocab.words_to_indices(ex.aspect_tokens),
            labels=dep_label_sequence(s, self.vocab),
            ghat=Tensor(normalize_adjacency(build_adjacency(s))),
            gold=ex.label,
        )

    def forward(self, enc: EncodedExample) -> tuple[Tensor, dict[str, Tensor]]:
        """Return the MLP logits and the attention-weight tensors of this pass."""
        v = lookup(self.word_emb, enc.words)
        h_s = bilstm_encode(self.sent_lstm, v)
        h_a = bilstm_encode(self.aspect_lstm, lookup(self.word_emb, enc.aspect_words))
        h_s_k = gcn_forward(h_s, enc.ghat, self.word_gcn)
        weights: dict[str, Tensor] = {}

        if self.variant == "non_dep":
            h_w, weights["aspect"] = aspect_attention(h_a, h_s_k)
            return fuse_and_score(h_w, None, self.mlp, self.hp.logit_relu), weights

        D = lookup(self.label_emb, enc.labels)
        D_k = gcn_forward(D, enc.ghat, self.label_gcn)
        h_d, weights["dependency"] = dependency_attention(D_k, h_s, self.dep_att)
        if self.variant == "dual":
            h_w, weights["aspect"] = aspect_attention(h_a, h_s_k)
            return fuse_and_score(h_w, h_d, self.mlp, self.hp.logit_relu), weights

        n = len(enc.words)
        row_scale = reshape(scale(weights["dependency"], float(n)), (n, 1))
        h_w, weights["aspect"] = aspect_attention(h_a, mul(h_s_k, row_scale))
        return fuse_and_score(h_w, None, self.mlp, self.hp.logit_relu), weights

    def probs(self, enc: EncodedExample) -> Tensor:
        logits, _ = self.forward(enc)
        return softmax(logits)

    def explain(self, enc: EncodedExample) -> tuple[np.ndarray, AttentionTrace]:
        logits, w = self.forward(enc)
        trace = AttentionTrace(
            aspect=w["aspect"].data.copy(),
            dependency=w["dependency"].data.copy() if "dependency" in w else None,
        )
        return softmax(logits).data.copy(), trace


def _bilstm(p: dict[str, Tensor], prefix: str) -> BiLstmParams:
    def direction(d):
        return LstmDirectionParams(p[f"{prefix}.{d}.W_x"], p[f"{prefix}.{d}.W_h"], p[f"{prefix}.{d}.b"])

    return BiLstmParams(direction("fw"), direction("bw"))


def parameter_shapes(variant: str, hp: Hyperparams, vocab: Vocab) -> dict[str, tuple[int, ...]]:
    """Name -> shape for every parameter of a variant, in canonical order."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {', '.join(VARIANTS)}")
    two_h = 2 * hp.d_h
    shapes: dict[str, tuple[int, ...]] = {"word_emb": (vocab.V, hp.dim_w)}
    for enc in ("sent_lstm", "aspect_lstm"):
        for d in ("fw", "bw"):
            shapes[f"{enc}.{d}.W_x"] = (hp.dim_w, 4 * hp.d_h)
            shapes[f"{enc}.{d}.W_h"] = (hp.d_h, 4 * hp.d_h)
            shapes[f"{enc}.{d}.b"] = (4 * hp.d_h,)
    for i in range(hp.gcn_layers):
        shapes[f"word_gcn.{i}.W"] = (two_h, two_h)
    if variant != "non_dep":
        shapes["label_emb"] = (vocab.V_labels, hp.dim_l)
        dims = [hp.dim_l] + [hp.dim_depgcn] * hp.gcn_layers
        for i in range(hp.gcn_layers):
            shapes[f"label_gcn.{i}.W"] = (dims[i], dims[i + 1])
        shapes["dep_att.W_q"] = (hp.dim_depgcn, hp.d_att)
        shapes["dep_att.W_k"] = (two_h, hp.d_att)
        shapes["dep_att.w_v"] = (hp.d_att,)
    mlp_in = 2 * two_h if variant == "dual" else two_h
    shapes["mlp.W1"] = (mlp_in, hp.mlp_hidden)
    shapes["mlp.b1"] = (hp.mlp_hidden,)
    shapes["mlp.W2"] = (hp.mlp_hidden, 3)
    shapes["mlp.b2"] = (3,)
    return shapes


def assemble(variant: str, hp: Hyperparams, vocab: Vocab,
             pretrained: EmbeddingTable | None = None) -> DualAttentionModel:
    """Build a freshly initialized model: every parameter ~ U(-eps, eps) unless pretrained."""
    shapes = parameter_shapes(variant, hp, vocab)
    if variant != "non_dep" and vocab.V_labels < 2:
        raise ValueError(f"variant {variant!r} needs dependency labels but the vocabulary has none")
    if pretrained is not None and pretrained.matrix.shape != shapes["word_emb"]:
        raise ValueError(
            f"pretrained table shape {pretrained.matrix.shape} does not match vocab/dim_w {shapes['word_emb']}"
        )
    rng = np.random.default_rng(hp.seed)
    eps = hp.epsilon_init
    params: dict[str, Tensor] = {}
    for name, shape in shapes.items():
        if name == "word_emb" and pretrained is not None:
            t = pretrained.matrix
            t.name = name
        elif name == "word_emb":
            t = random_table(shape[0], shape[1], eps, rng, pad_row=vocab.pad_index, name=name).matrix
        else:
            t = Tensor(rng.uniform(-eps, eps, size=shape), requires_grad=True, name=name)
        params[name] = t
    return DualAttentionModel(variant, hp, vocab, params)


def from_arrays(variant: str, hp: Hyperparams, vocab: Vocab, arrays: dict[str, np.ndarray]) -> DualAttentionModel:
    shapes = parameter_shapes(variant, hp, vocab)
    if set(arrays) != set(shapes):
        missing = sorted(set(shapes) - set(arrays))
        extra = sorted(set(arrays) - set(shapes))
        raise ValueError(f"parameter inventory mismatch: missing {missing}, unexpected {extra}")
    params = {}
    for name, shape in shapes.items():
        a = np.asarray(arrays[name], dtype=np.float64)
        if a.shape != shape:
            raise ValueError(f"parameter {name}: shape {a.shape}, expected {shape}")
        params[name] = Tensor(a, requires_grad=True, name=name)
    return DualAttentionModel(variant, hp, vocab, params)


def encode_all(model: DualAttentionModel, examples: Iterable[LabeledExample]) -> list[EncodedExample]:
    return [model.encode(ex) for ex in examples]
