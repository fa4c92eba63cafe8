import numpy as np
import pytest

from dam.compute import Record, Tensor, matmul, total
from dam.corpus import CorpusError
from dam.embeddings import EmbeddingTable, load_pretrained, lookup, random_table


def test_lookup_matches_one_hot_product(rng):
    table = random_table(7, 4, 0.1, rng)
    idx = [3, 0, 6, 3]
    one_hot = np.eye(7)[idx]
    expected = matmul(Tensor(one_hot), table.matrix).data
    np.testing.assert_array_equal(lookup(table, idx).data, expected)


def test_repeated_index_accumulates_gradient(rng):
    table = random_table(4, 3, 0.1, rng)
    with Record() as rec:
        total(lookup(table, [2, 2]))
    rec.backward()
    np.testing.assert_array_equal(table.matrix.grad[2], [2.0, 2.0, 2.0])
    np.testing.assert_array_equal(table.matrix.grad[[0, 1, 3]], 0.0)


def test_random_table_pad_row_and_range(rng):
    table = random_table(50, 6, 0.01, rng, pad_row=0)
    assert (table.rows, table.dim) == (50, 6)
    assert np.all(table.matrix.data[0] == 0.0)
    assert np.all(np.abs(table.matrix.data) <= 0.01)


def test_frozen_table_has_no_gradient(rng):
    table = EmbeddingTable(Tensor(rng.normal(size=(3, 2))), trainable=False)
    assert not table.matrix.requires_grad


def test_load_pretrained(tmp_path, three_token_vocab):
    path = tmp_path / "vec.txt"
    path.write_text("food 1 2 3\nmissing 9 9 9\ngreat -1 0 1\n", encoding="utf-8")
    table = load_pretrained(path, three_token_vocab, 3, epsilon=0.05, seed=3)
    m = table.matrix.data
    np.testing.assert_array_equal(m[three_token_vocab.word("food")], [1, 2, 3])
    np.testing.assert_array_equal(m[three_token_vocab.word("great")], [-1, 0, 1])
    np.testing.assert_array_equal(m[0], 0.0)
    assert np.all(np.abs(m[three_token_vocab.word("was")]) <= 0.05)
    again = load_pretrained(path, three_token_vocab, 3, epsilon=0.05, seed=3)
    assert again.matrix.data.tobytes() == m.tobytes()


def test_load_pretrained_wrong_width(tmp_path, three_token_vocab):
    path = tmp_path / "vec.txt"
    path.write_text("food 1 2 3\nwas 1 2\n", encoding="utf-8")
    with pytest.raises(CorpusError, match="line 2") as info:
        load_pretrained(path, three_token_vocab, 3)
    assert info.value.line == 2


def test_glove_line_and_single_row_lookup(tmp_path):
    from dam.corpus import Vocab

    vocab = Vocab(["<pad>", "<unk>", "the"])
    path = tmp_path / "v.txt"
    path.write_text("the 0.1 0.2 0.3\n", encoding="utf-8")
    table = load_pretrained(path, vocab, 3)
    np.testing.assert_array_equal(table.matrix.data[2], [0.1, 0.2, 0.3])
    np.testing.assert_array_equal(lookup(table, [2]).data, [[0.1, 0.2, 0.3]])
    np.testing.assert_array_equal(lookup(table, [0]).data, [[0.0, 0.0, 0.0]])
