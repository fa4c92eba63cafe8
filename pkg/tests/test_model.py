import numpy as np
import pytest

from dam.compute import Record, grad_check
from dam.classifier import objective
from dam.corpus import build_vocab
from dam.model import VARIANTS, Hyperparams, assemble, parameter_shapes

LABEL_SIDE = ("label_emb", "label_gcn.", "dep_att.")


def test_default_hyperparameters():
    hp = Hyperparams()
    assert (hp.dim_w, hp.dim_l, hp.d_h, hp.batch_size, hp.learning_rate) == (300, 300, 100, 32, 1e-3)
    assert hp.dim_depgcn == hp.d_att == hp.mlp_hidden == 200


@pytest.mark.parametrize("bad", [{"d_h": 0}, {"learning_rate": -1.0}, {"batch_size": 0}, {"logit_relu": 1}])
def test_invalid_hyperparameters_rejected(bad):
    with pytest.raises(ValueError):
        Hyperparams(**bad)


def test_from_dict_rejects_unknown_key():
    with pytest.raises(ValueError, match="learing_rate"):
        Hyperparams.from_dict({"learing_rate": 0.1})


def test_dual_first_mlp_layer_has_4dh_rows(three_token_vocab):
    shapes = parameter_shapes("dual", Hyperparams(), three_token_vocab)
    assert shapes["mlp.W1"][0] == 400


def test_non_dep_parameter_count_closed_form(fixture_corpus):
    hp = Hyperparams(dim_w=8, dim_l=5, d_h=3, dim_depgcn=4, d_att=6, mlp_hidden=7, gcn_layers=2)
    vocab = build_vocab(fixture_corpus)
    dual = assemble("dual", hp, vocab)
    non_dep = assemble("non_dep", hp, vocab)
    label_gcn = hp.dim_l * hp.dim_depgcn + hp.dim_depgcn * hp.dim_depgcn
    dep_att = hp.dim_depgcn * hp.d_att + 2 * hp.d_h * hp.d_att + hp.d_att
    halved_w1 = 2 * hp.d_h * hp.mlp_hidden
    expected = dual.parameter_count() - (vocab.V_labels * hp.dim_l + label_gcn + dep_att) - halved_w1
    assert non_dep.parameter_count() == expected


def test_non_dep_has_no_label_side_parameters(fixture_corpus, tiny_hp):
    model = assemble("non_dep", tiny_hp, build_vocab(fixture_corpus))
    assert not [n for n in model.params if n.startswith(LABEL_SIDE)]
    assert model.label_emb is None and model.dep_att is None


def test_same_seed_same_initialization(fixture_corpus, tiny_hp):
    vocab = build_vocab(fixture_corpus)
    a, b = assemble("dual", tiny_hp, vocab), assemble("dual", tiny_hp, vocab)
    for name in a.params:
        assert a.params[name].data.tobytes() == b.params[name].data.tobytes()


def test_initialization_range_and_pad_row(fixture_corpus):
    hp = Hyperparams(dim_w=6, dim_l=4, d_h=3, epsilon_init=0.01)
    model = assemble("dual", hp, build_vocab(fixture_corpus))
    for t in model.params.values():
        assert np.all(np.abs(t.data) <= 0.01)
    assert np.all(model.params["word_emb"].data[0] == 0)


def test_unknown_variant_rejected(three_token_vocab, tiny_hp):
    with pytest.raises(ValueError, match="unknown variant"):
        assemble("triple", tiny_hp, three_token_vocab)


def test_label_variants_need_labels(three_token_vocab, tiny_hp):
    from dam.corpus import Vocab

    bare = Vocab(list(three_token_vocab.words))
    with pytest.raises(ValueError, match="dependency labels"):
        assemble("serial", tiny_hp, bare)
    assemble("non_dep", tiny_hp, bare)


@pytest.mark.parametrize("variant", VARIANTS)
def test_end_to_end_gradients_on_three_tokens(variant, three_token_example, three_token_vocab, tiny_hp):
    model = assemble(variant, tiny_hp, three_token_vocab)
    enc = model.encode(three_token_example)
    with Record() as rec:
        objective([model.probs(enc)], [enc.gold], model.trainable(), 0.01)
    report = grad_check(rec, tolerance=1e-4)
    assert report.passed, report


@pytest.mark.parametrize("variant", VARIANTS)
def test_explain_rows_are_distributions(variant, fixture_corpus, tiny_hp):
    model = assemble(variant, tiny_hp, build_vocab(fixture_corpus))
    for ex in fixture_corpus[:8]:
        probs, trace = model.explain(model.encode(ex))
        assert abs(probs.sum() - 1) < 1e-12
        assert trace.aspect.shape == (ex.aspect_to - ex.aspect_from, len(ex.sentence))
        np.testing.assert_allclose(trace.aspect.sum(axis=1), 1.0, atol=1e-6)
        if variant == "non_dep":
            assert trace.dependency is None
        else:
            assert abs(trace.dependency.sum() - 1) < 1e-6


def test_serial_with_uniform_dependency_weights_matches_non_dep_path(fixture_corpus, tiny_hp):
    # with w_v = 0 the dependency weights are 1/n, so the n * a_i row scale is exactly 1
    vocab = build_vocab(fixture_corpus)
    serial = assemble("serial", tiny_hp, vocab)
    serial.params["dep_att.w_v"].data[:] = 0.0
    non_dep = assemble("non_dep", tiny_hp, vocab)
    for name, t in non_dep.params.items():
        t.data[...] = serial.params[name].data
    enc = serial.encode(fixture_corpus[5])
    np.testing.assert_allclose(serial.forward(enc)[0].data, non_dep.forward(enc)[0].data, atol=1e-12)
