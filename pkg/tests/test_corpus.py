import json

import numpy as np
import pytest
from hypothesis import given, settings

from dam.corpus import (
    PAD,
    UNK,
    CorpusError,
    LabeledExample,
    ParsedSentence,
    build_adjacency,
    build_vocab,
    dep_label_sequence,
    format_conllu,
    load_dataset,
    parse_conllu,
    save_dataset,
)

from .strategies import random_trees

SAMPLE = """# sent_id = 1
# text = The food was great
1\tThe\tthe\tDET\t_\t_\t2\tdet\t_\t_
2\tfood\tfood\tNOUN\t_\t_\t4\tnsubj\t_\t_
3\twas\tbe\tAUX\t_\t_\t4\tcop\t_\t_
4\tgreat\tgreat\tADJ\t_\t_\t0\troot\t_\t_

1\tNice\tnice\tADJ\t_\t_\t0\troot\t_\t_
"""


def test_parse_sample():
    first, second = parse_conllu(SAMPLE)
    assert first.tokens == ("The", "food", "was", "great")
    assert first.heads == (2, 4, 4, 0)
    assert first.dep_labels == ("det", "nsubj", "cop", "root")
    assert len(second) == 1


def test_multiword_ranges_and_empty_nodes_skipped():
    text = "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n" \
           "1\tdo\t_\t_\t_\t_\t0\troot\t_\t_\n" \
           "1.1\tx\t_\t_\t_\t_\t_\t_\t_\t_\n" \
           "2\tn't\t_\t_\t_\t_\t1\tadvmod\t_\t_\n"
    (s,) = parse_conllu(text)
    assert s.tokens == ("do", "n't")


@pytest.mark.parametrize("bad, lineno, fragment", [
    ("1\ta\t_\t_\t_\t_\t3\tdep\t_\t_\n", 1, "out of range"),
    ("1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n2\tb\t_\t_\t_\t_\t2\tdep\t_\t_\n", 2, "own head"),
    ("1\ta\t_\t_\t_\t_\tx\troot\t_\t_\n", 1, "non-integer head"),
    ("# c\n1\ta\t_\n", 2, "8 tab-separated"),
    ("1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n3\tb\t_\t_\t_\t_\t1\tdep\t_\t_\n", 2, "not contiguous"),
])
def test_malformed_conllu_reports_line(bad, lineno, fragment):
    with pytest.raises(CorpusError, match=fragment) as info:
        parse_conllu(bad)
    assert info.value.line == lineno
    assert str(info.value).startswith(f"line {lineno}:")


@settings(max_examples=100, deadline=None)
@given(st_sentences=random_trees())
def test_conllu_round_trip(st_sentences):
    (back,) = parse_conllu(format_conllu([st_sentences]))
    assert back == st_sentences


def test_round_trip_sample_is_idempotent():
    once = format_conllu(parse_conllu(SAMPLE))
    assert format_conllu(parse_conllu(once)) == once


# --- datasets ---------------------------------------------------------------


def _write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _record(**kw):
    rec = {"tokens": ["food", "rocks"], "heads": [2, 0], "dep_labels": ["nsubj", "root"],
           "aspect_from": 0, "aspect_to": 1, "polarity": "positive"}
    rec.update(kw)
    return json.dumps(rec)


def test_dataset_round_trip(tmp_path, fixture_corpus):
    path = tmp_path / "d.jsonl"
    save_dataset(fixture_corpus, path)
    assert load_dataset(path) == fixture_corpus


def test_polarity_is_case_insensitive(tmp_path):
    (ex,) = load_dataset(_write_lines(tmp_path / "d.jsonl", [_record(polarity="Negative")]))
    assert ex.polarity == "negative" and ex.label == 2


@pytest.mark.parametrize("bad, fragment", [
    (_record(aspect_to=3), "aspect span out of bounds"),
    (_record(aspect_from=1, aspect_to=1), "aspect span out of bounds"),
    (_record(heads=[2]), "length mismatch"),
    (_record(polarity="mixed"), "unknown polarity"),
    (_record(heads=[1, 0]), "own head"),
    ('{"tokens": ["a"]}', "missing field"),
    ("{not json", "invalid JSON"),
])
def test_bad_dataset_line_is_reported(tmp_path, bad, fragment):
    path = _write_lines(tmp_path / "d.jsonl", [_record(), bad])
    with pytest.raises(CorpusError, match=fragment) as info:
        load_dataset(path)
    assert info.value.line == 2


def test_aspect_tokens():
    s = ParsedSentence(["the", "pasta", "sauce", "rocks"], [3, 3, 4, 0], ["det", "compound", "nsubj", "root"])
    assert LabeledExample(s, 1, 3, "neutral").aspect_tokens == ("pasta", "sauce")


# --- vocabulary -------------------------------------------------------------


def test_vocab_reserved_indices(three_token_vocab):
    v = three_token_vocab
    assert v.words[:2] == [PAD, UNK] and v.labels[0] == UNK
    assert v.words_to_indices(["food", "was", "great"]) == [2, 3, 4]
    assert v.word("unseen") == v.unk_index == 1
    assert v.label("unseen") == v.unk_label_index == 0
    assert (v.V, v.V_labels) == (5, 4)


def test_vocab_min_count(fixture_corpus):
    full = build_vocab(fixture_corpus)
    pruned = build_vocab(fixture_corpus, min_count=5)
    assert set(pruned.words) < set(full.words)
    assert pruned.labels == full.labels


def test_vocab_first_occurrence_order(three_token_example):
    other = LabeledExample(ParsedSentence(["great", "wine"], [0, 1], ["root", "dep"]), 1, 2, "positive")
    v = build_vocab([three_token_example, other])
    assert v.words[2:] == ["food", "was", "great", "wine"]


def test_empty_vocab_rejected():
    with pytest.raises(CorpusError):
        build_vocab([])


def test_label_sequence(three_token_example, three_token_vocab):
    assert dep_label_sequence(three_token_example.sentence, three_token_vocab) == [1, 2, 3]


# --- adjacency --------------------------------------------------------------


def test_adjacency_example(three_token_example):
    G = build_adjacency(three_token_example.sentence)
    np.testing.assert_array_equal(G, [[0, 0, 1], [0, 0, 1], [1, 1, 0]])


@settings(max_examples=200, deadline=None)
@given(sentence=random_trees())
def test_adjacency_properties(sentence):
    G = build_adjacency(sentence)
    n = len(sentence)
    assert G.shape == (n, n)
    assert np.array_equal(G, G.T)
    assert not np.any(np.diag(G))
    assert set(np.unique(G)) <= {0, 1}
    assert G.sum() == 2 * sum(1 for h in sentence.heads if h > 0)


def test_minimal_block_and_empty_input():
    (s,) = parse_conllu("1\tthe\t_\t_\t_\t_\t2\tdet\t_\t_\n2\tfood\t_\t_\t_\t_\t0\troot\t_\t_\n")
    assert (s.tokens, s.heads, s.dep_labels) == (("the", "food"), (2, 0), ("det", "root"))
    assert parse_conllu("") == []


def _two_word_corpus():
    return [LabeledExample(ParsedSentence(["the", w], [2, 0], ["det", "root"]), 1, 2, "neutral")
            for w in ("food", "sound")]


def test_vocab_counts_on_small_corpus():
    v = build_vocab(_two_word_corpus())
    assert v.V == 3 + 2
    pruned = build_vocab(_two_word_corpus(), min_count=2)
    assert pruned.words[2:] == ["the"]
    assert pruned.word("food") == pruned.unk_index


def test_label_vocab_size():
    s = ParsedSentence(["the", "food", "came"], [2, 3, 0], ["det", "nsubj", "root"])
    assert build_vocab([LabeledExample(s, 1, 2, "neutral")]).V_labels == 3 + 1


def test_unseen_label_maps_to_unknown():
    v = build_vocab(_two_word_corpus())
    s = ParsedSentence(["yesterday", "rain"], [2, 0], ["obl:tmod", "root"])
    seq = dep_label_sequence(s, v)
    assert seq == [v.unk_label_index, v.label("root")] and len(seq) == len(s)


def test_adjacency_single_root_and_chain():
    np.testing.assert_array_equal(build_adjacency(ParsedSentence(["x"], [0], ["root"])), [[0]])
    G = build_adjacency(ParsedSentence(["a", "b", "c"], [2, 0, 2], ["dep", "root", "dep"]))
    np.testing.assert_array_equal(G, [[0, 1, 0], [1, 0, 1], [0, 1, 0]])
