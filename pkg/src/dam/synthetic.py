"""Generated corpora used by the tests, the acceptance suite and the CLI demo."""

from __future__ import annotations

import numpy as np

from .corpus import POLARITIES, LabeledExample, ParsedSentence

# (tokens with {A} for the aspect and {J} for the opinion word, heads, labels)
_TEMPLATES = [
    (["the", "{A}", "was", "{J}"], [2, 4, 4, 0], ["det", "nsubj", "cop", "root"]),
    (["i", "found", "the", "{A}", "{J}"], [2, 0, 4, 2, 2], ["nsubj", "root", "det", "obj", "xcomp"]),
    (["{J}", "{A}", "overall"], [2, 0, 2], ["amod", "root", "advmod"]),
    (["we", "thought", "their", "{A}", "is", "really", "{J}"], [2, 0, 4, 7, 7, 7, 2],
     ["nsubj", "root", "nmod:poss", "nsubj", "cop", "advmod", "ccomp"]),
]
_ASPECTS = ["food", "service", "pasta", "staff", "wine", "decor", "menu", "price"]
_OPINIONS = {
    "positive": ["great", "excellent"],
    "neutral": ["okay", "average"],
    "negative": ["awful", "terrible"],
}


def overfit_corpus(size: int = 32) -> list[LabeledExample]:
    """Template sentences whose polarity is carried by the opinion word."""
    out = []
    for k in range(size):
        tokens, heads, labels = _TEMPLATES[k % len(_TEMPLATES)]
        polarity = POLARITIES[(k // len(_TEMPLATES)) % 3]
        aspect = _ASPECTS[(k // 3) % len(_ASPECTS)]
        opinion = _OPINIONS[polarity][(k // 12) % 2]
        words = [aspect if t == "{A}" else opinion if t == "{J}" else t for t in tokens]
        pos = tokens.index("{A}")
        out.append(LabeledExample(ParsedSentence(words, heads, labels), pos, pos + 1, polarity))
    return out


CUE_TOKEN = "cue"
CUE_LABELS = {"positive": "amod", "neutral": "nmod", "negative": "advmod"}
_FILLER_LABELS = ["det", "nsubj", "obj", "obl", "conj", "case", "cc", "mark"]
_FILLER_WORDS = [f"w{i}" for i in range(30)]
_CUE_ASPECTS = [f"a{i}" for i in range(6)]


def dependency_cue_corpus(size: int = 600, seed: int = 0, min_len: int = 5, max_len: int = 8,
                          polarities: tuple[str, ...] = ("positive", "negative")) -> list[LabeledExample]:
    """Sentences whose polarity is fixed only by the label of the arc attaching a cue token.

    Words, sentence length, tree shape and token positions are drawn
    independently of the class; the cue token is the same string in every
    sentence.  Only its dependency label differs (amod for positive, advmod
    for negative, nmod for neutral).  Classes are balanced.
    """
    rng = np.random.default_rng(seed)
    out = []
    for k in range(size):
        polarity = polarities[k % len(polarities)]
        n = int(rng.integers(min_len, max_len + 1))
        aspect_pos, cue_pos = (int(i) for i in rng.choice(n, size=2, replace=False))
        tokens = [str(w) for w in rng.choice(_FILLER_WORDS, size=n)]
        tokens[aspect_pos] = str(rng.choice(_CUE_ASPECTS))
        tokens[cue_pos] = CUE_TOKEN

        # random tree: attach nodes one at a time to an already-placed node
        order = [int(i) for i in rng.permutation(n)]
        if order[0] == cue_pos:
            order[0], order[1] = order[1], order[0]
        heads = [0] * n
        labels = [""] * n
        labels[order[0]] = "root"
        for j, node in enumerate(order[1:], start=1):
            heads[node] = order[int(rng.integers(0, j))] + 1
            labels[node] = str(rng.choice(_FILLER_LABELS))
        labels[cue_pos] = CUE_LABELS[polarity]
        out.append(LabeledExample(ParsedSentence(tokens, heads, labels), aspect_pos, aspect_pos + 1, polarity))
    order = rng.permutation(size)
    return [out[i] for i in order]
