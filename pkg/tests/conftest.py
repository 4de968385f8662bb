import numpy as np
import pytest

from mixgame import HypothesisSpace, build_markov, two_state_chain


def random_chain(rng, n_states=2, smoothing=0.05):
    """A random aperiodic, irreducible transition matrix."""
    T = rng.random((n_states, n_states)) + smoothing
    return build_markov(T / T.sum(axis=1, keepdims=True))


def random_space(rng, n_hypotheses, n_symbols):
    return HypothesisSpace(rng.random((n_hypotheses, n_symbols)))


@pytest.fixture
def symmetric_quarter_chain():
    """Two-state chain with flip probability 0.25 on both sides."""
    return two_state_chain(0.25, 0.25)


@pytest.fixture
def indicator_space():
    """Hypothesis w predicts state w; loss is the indicator of a miss."""
    return HypothesisSpace(np.array([[0.0, 1.0], [1.0, 0.0]]))
