import contextlib

import numpy as np
import pytest

from dam.corpus import LabeledExample, ParsedSentence, build_vocab
from dam.model import Hyperparams
from dam.synthetic import overfit_corpus


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def fixture_corpus():
    return overfit_corpus()


@pytest.fixture
def tiny_hp():
    """Small dimensions with a wide init so gradients are far from round-off."""
    return Hyperparams(dim_w=4, dim_l=3, d_h=2, dim_depgcn=3, d_att=3, mlp_hidden=4,
                       epsilon_init=0.5, epochs=2, batch_size=4, seed=7)


@pytest.fixture
def three_token_example():
    s = ParsedSentence(["food", "was", "great"], [3, 3, 0], ["nsubj", "cop", "root"])
    return LabeledExample(s, 0, 1, "positive")


@pytest.fixture
def three_token_vocab(three_token_example):
    return build_vocab([three_token_example])


_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def acceptance():
    """Context manager that records one PASS/FAIL line for a numbered criterion."""

    @contextlib.contextmanager
    def criterion(number, title):
        notes = []
        try:
            yield notes.append
        except BaseException as e:
            detail = "; ".join(notes + [str(e).splitlines()[0] if str(e) else type(e).__name__])
            _ACCEPTANCE[number] = f"FAIL  criterion {number}: {title} | {detail}"
            raise
        _ACCEPTANCE[number] = f"PASS  criterion {number}: {title} | {'; '.join(notes)}"
        print(_ACCEPTANCE[number])

    return criterion


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])
