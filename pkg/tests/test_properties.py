"""Property-based checks for the numerical kernels."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mixgame import (PosteriorDist, ewa_step, kl_divergence, project_simplex,
                     two_state_chain)
from mixgame import phi_table


finite_vectors = arrays(np.float64, st.integers(2, 6),
                        elements=st.floats(-5, 5))


@settings(max_examples=200, deadline=None)
@given(finite_vectors)
def test_projection_is_idempotent_and_feasible(y):
    p = project_simplex(y)
    assert p.min() >= -1e-12
    assert abs(p.sum() - 1.0) < 1e-9
    np.testing.assert_allclose(project_simplex(p), p, atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(finite_vectors, st.floats(0.01, 5.0))
def test_ewa_step_preserves_the_simplex(cost, eta):
    prior = PosteriorDist.uniform(len(cost))
    p = ewa_step(prior, cost, eta).probs
    assert abs(p.sum() - 1.0) < 1e-9 and p.min() >= 0


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**31))
def test_kl_is_nonnegative_and_zero_only_at_equality(w, seed):
    rng = np.random.default_rng(seed)
    p = PosteriorDist.from_probs(rng.dirichlet(np.ones(w)))
    q = PosteriorDist.from_probs(rng.dirichlet(np.ones(w)))
    assert kl_divergence(p, q) >= -1e-12
    assert abs(kl_divergence(p, p)) < 1e-12


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.integers(0, 2**31))
def test_phi_decays_on_two_state_chains(p, q, seed):
    model = two_state_chain(p, q)
    losses = np.random.default_rng(seed).random((3, 2))
    table = phi_table(model, losses, 10)
    assert np.all(table >= 0)
    assert np.all(np.diff(table) <= 1e-12)
