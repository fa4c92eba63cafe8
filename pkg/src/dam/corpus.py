"""Dataset and dependency-parse ingestion.

Two on-disk formats are read here:

* CoNLL-U treebank text (only ID, FORM, HEAD and DEPREL are used).
* Line-delimited JSON datasets, one labeled aspect per line, with the
  parse carried inline::

    {"tokens": ["food", "rocks"], "heads": [2, 0], "dep_labels": ["nsubj", "root"],
     "aspect_from": 0, "aspect_to": 1, "polarity": "positive"}
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

POLARITIES = ("positive", "neutral", "negative")
PAD, UNK = "<pad>", "<unk>"


class CorpusError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class ParsedSentence:
    tokens: tuple[str, ...]
    heads: tuple[int, ...]
    dep_labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "heads", tuple(int(h) for h in self.heads))
        object.__setattr__(self, "dep_labels", tuple(self.dep_labels))
        problem = _sentence_problem(self.tokens, self.heads, self.dep_labels)
        if problem:
            raise CorpusError(problem)

    def __len__(self) -> int:
        return len(self.tokens)


def _sentence_problem(tokens, heads, labels) -> str | None:
    n = len(tokens)
    if n == 0:
        return "sentence has no tokens"
    if not (len(heads) == len(labels) == n):
        return f"length mismatch: {n} tokens, {len(heads)} heads, {len(labels)} dep_labels"
    for i, h in enumerate(heads):
        if not 0 <= h <= n:
            return f"head {h} of token {i + 1} out of range [0, {n}]"
        if h == i + 1:
            return f"token {i + 1} is its own head"
    return None


@dataclass(frozen=True)
class LabeledExample:
    sentence: ParsedSentence
    aspect_from: int
    aspect_to: int
    polarity: str

    def __post_init__(self):
        if not 0 <= self.aspect_from < self.aspect_to <= len(self.sentence):
            raise CorpusError(
                f"aspect span out of bounds: [{self.aspect_from}, {self.aspect_to}) "
                f"for {len(self.sentence)} tokens"
            )
        if self.polarity not in POLARITIES:
            raise CorpusError(f"unknown polarity {self.polarity!r}")

    @property
    def label(self) -> int:
        return POLARITIES.index(self.polarity)

    @property
    def aspect_tokens(self) -> tuple[str, ...]:
        return self.sentence.tokens[self.aspect_from : self.aspect_to]


# ---------------------------------------------------------------------------
# CoNLL-U


def parse_conllu(text: str | TextIO) -> list[ParsedSentence]:
    """Read sentences from CoNLL-U text; ranges and empty nodes are skipped."""
    lines = text.splitlines() if isinstance(text, str) else text.read().splitlines()
    sentences: list[ParsedSentence] = []
    block: list[tuple[int, list[str]]] = []

    def flush():
        if not block:
            return
        tokens, heads, labels = [], [], []
        for pos, (lineno, cols) in enumerate(block, start=1):
            try:
                idx = int(cols[0])
            except ValueError:
                raise CorpusError(f"token index {cols[0]!r} is not an integer", lineno) from None
            if idx != pos:
                raise CorpusError(f"token indices not contiguous: expected {pos}, got {idx}", lineno)
            try:
                head = int(cols[6])
            except ValueError:
                raise CorpusError(f"non-integer head {cols[6]!r}", lineno) from None
            if not 0 <= head <= len(block):
                raise CorpusError(f"head {head} out of range [0, {len(block)}]", lineno)
            if head == idx:
                raise CorpusError(f"token {idx} is its own head", lineno)
            tokens.append(cols[1])
            heads.append(head)
            labels.append(cols[7])
        sentences.append(ParsedSentence(tokens, heads, labels))
        block.clear()

    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        if "-" in cols[0] or "." in cols[0]:
            continue
        if len(cols) < 8:
            raise CorpusError(f"expected at least 8 tab-separated fields, got {len(cols)}", lineno)
        block.append((lineno, cols))
    flush()
    return sentences


def format_conllu(sentences: Iterable[ParsedSentence]) -> str:
    """Write the ID/FORM/HEAD/DEPREL subset back out as CoNLL-U (other fields ``_``)."""
    out = []
    for s in sentences:
        for i, (tok, head, lab) in enumerate(zip(s.tokens, s.heads, s.dep_labels), start=1):
            out.append("\t".join([str(i), tok, "_", "_", "_", "_", str(head), lab, "_", "_"]))
        out.append("")
    return "\n".join(out) + ("\n" if out else "")


# ---------------------------------------------------------------------------
# datasets


def example_from_record(rec: dict, line: int | None = None) -> LabeledExample:
    try:
        tokens, heads, labels = rec["tokens"], rec["heads"], rec["dep_labels"]
        start, stop, polarity = rec["aspect_from"], rec["aspect_to"], rec["polarity"]
    except KeyError as e:
        raise CorpusError(f"missing field {e.args[0]!r}", line) from None
    except TypeError:
        raise CorpusError("record is not an object", line) from None
    if not (len(tokens) == len(heads) == len(labels)):
        raise CorpusError(
            f"length mismatch: {len(tokens)} tokens, {len(heads)} heads, {len(labels)} dep_labels", line
        )
    if any(not isinstance(h, int) or isinstance(h, bool) for h in heads):
        raise CorpusError("heads must be integers", line)
    if not isinstance(polarity, str) or polarity.lower() not in POLARITIES:
        raise CorpusError(f"unknown polarity {polarity!r}", line)
    try:
        sentence = ParsedSentence(tokens, heads, labels)
        return LabeledExample(sentence, int(start), int(stop), polarity.lower())
    except CorpusError as e:
        raise CorpusError(str(e), line) from None


def example_to_record(ex: LabeledExample) -> dict:
    s = ex.sentence
    return {
        "tokens": list(s.tokens),
        "heads": list(s.heads),
        "dep_labels": list(s.dep_labels),
        "aspect_from": ex.aspect_from,
        "aspect_to": ex.aspect_to,
        "polarity": ex.polarity,
    }


def load_dataset(path: str | Path) -> list[LabeledExample]:
    examples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"invalid JSON ({e.msg})", lineno) from None
            examples.append(example_from_record(rec, lineno))
    return examples


def save_dataset(examples: Iterable[LabeledExample], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps(example_to_record(ex)) + "\n")


# ---------------------------------------------------------------------------
# vocabularies


@dataclass
class Vocab:
    """Word and dependency-label index maps.

    Words reserve index 0 for padding and 1 for unknown; labels reserve 0 for
    unknown.
    """

    words: list[str] = field(default_factory=lambda: [PAD, UNK])
    labels: list[str] = field(default_factory=lambda: [UNK])

    def __post_init__(self):
        self.word_to_index = {w: i for i, w in enumerate(self.words)}
        self.label_to_index = {l: i for i, l in enumerate(self.labels)}

    @property
    def V(self) -> int:
        return len(self.words)

    @property
    def V_labels(self) -> int:
        return len(self.labels)

    pad_index = 0
    unk_index = 1
    unk_label_index = 0

    def word(self, w: str) -> int:
        return self.word_to_index.get(w, self.unk_index)

    def label(self, lab: str) -> int:
        return self.label_to_index.get(lab, self.unk_label_index)

    def words_to_indices(self, tokens: Iterable[str]) -> list[int]:
        return [self.word(t) for t in tokens]


def build_vocab(examples: list[LabeledExample], min_count: int = 1) -> Vocab:
    if not examples:
        raise CorpusError("cannot build a vocabulary from an empty dataset")
    counts: Counter[str] = Counter()
    order: dict[str, int] = {}
    labels: dict[str, None] = {}
    for ex in examples:
        for tok in ex.sentence.tokens:
            counts[tok] += 1
            order.setdefault(tok, len(order))
        for lab in ex.sentence.dep_labels:
            labels.setdefault(lab, None)
    kept = [w for w in order if counts[w] >= min_count]
    return Vocab(words=[PAD, UNK] + kept, labels=[UNK] + list(labels))


# ---------------------------------------------------------------------------
# graph inputs


def build_adjacency(sentence: ParsedSentence) -> np.ndarray:
    """Undirected arc connectivity: G[i, h-1] = G[h-1, i] = 1 for every non-root arc."""
    n = len(sentence)
    G = np.zeros((n, n), dtype=np.int8)
    for i, h in enumerate(sentence.heads):
        if h > 0:
            G[i, h - 1] = 1
            G[h - 1, i] = 1
    return G


def dep_label_sequence(sentence: ParsedSentence, vocab: Vocab) -> list[int]:
    return [vocab.label(lab) for lab in sentence.dep_labels]
