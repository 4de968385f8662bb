"""Acceptance gate: one test per top-level claim the package makes.

Each test prints a single PASS line on success; tolerances are part of the
claim and are asserted, never loosened.
"""

import itertools
import json
import math
import time

import numpy as np
import pytest

from mixgame import (EWA, FTRL, HypothesisSpace, MemoryTableLoss,
                     PosteriorDist, algebraic_main_term, build_markov,
                     composite_phi_check, conditional_loss_expectations,
                     decompose, dynamic_conditional_expectations,
                     dynamic_phi_mirror, exact_block_beta, exact_phi,
                     ewa_regret_bound, instance_regrets, limit_test_losses,
                     make_learner, phi_gap, play_costs, project_simplex,
                     realized_regret, run_dynamic_game, run_game, sample_path,
                     tune_delay_algebraic, tune_delay_geometric,
                     two_state_chain)
from mixgame import test_losses as stationary_losses
from mixgame.cli import main as cli_main
from mixgame.experiments import (config_from_dict, coverage_experiment,
                                 delay_sweep, delayed_ewa_posteriors)
from mixgame.process import ContaminationSpec, build_contaminated

from conftest import random_chain, random_space


def _report(line):
    print(f"\n{line}: PASS")


def _random_memory_loss(rng, n_hyp, alphabet, m):
    return MemoryTableLoss(m, rng.random((n_hyp,) + (alphabet,) * m))


def test_01_regret_decomposition_identity_randomized():
    """Gen == Regret/n + M_n exactly, across learners, delays and losses."""
    start = time.monotonic()
    rng = np.random.default_rng(101)
    worst = 0.0
    for i in range(100):
        n_states = int(rng.integers(2, 4))
        model = random_chain(rng, n_states)
        n = int(rng.integers(50, 501))
        d = int(rng.choice([1, 2, 4, 8]))
        algorithm = ("ewa", "ftrl-entropy", "ftrl-sqnorm")[i % 3]
        n_hyp = int(rng.integers(2, 6))
        path = sample_path(model, n, seed=1000 + i)
        learner = make_learner(algorithm, PosteriorDist.uniform(n_hyp),
                               float(rng.uniform(0.05, 1.0)), d=d)
        if i % 2 == 0:
            space = random_space(rng, n_hyp, n_states)
            trace = run_game(model, space, path, learner, d)
        else:
            dl = _random_memory_loss(rng, n_hyp, n_states,
                                     int(rng.integers(1, 4)))
            trace = run_dynamic_game(model, dl, path, learner, d)
        comparator = PosteriorDist.from_probs(rng.dirichlet(np.ones(n_hyp)))
        parts = decompose(trace, comparator)
        residual = abs(parts["gen"] - parts["regret_over_n"]
                       - parts["martingale"])
        worst = max(worst, residual)
    elapsed = time.monotonic() - start
    assert worst < 1e-10
    assert elapsed < 10.0
    _report(f"[1/12] regret decomposition identity over 100 randomized games "
            f"(worst residual {worst:.2e}, {elapsed:.1f}s)")


def test_02_ewa_regret_never_exceeds_its_bound():
    """Realized regret vs the best expert stays below KL/eta + eta/2 * sum."""
    rng = np.random.default_rng(202)
    etas = np.geomspace(0.01, 10.0, 7)
    prior = PosteriorDist.uniform(4)
    violations = 0
    for _ in range(1000):
        costs = rng.uniform(-1, 1, size=(40, 4))
        sup_sq = float(np.sum(np.abs(costs).max(axis=1) ** 2))
        best = costs.sum(axis=0).min()
        for eta in etas:
            posts = delayed_ewa_posteriors(costs, prior.log_weights, eta, 1)
            regret = float(np.sum(posts * costs)) - best
            if regret > ewa_regret_bound(math.log(4), eta, sup_sq) + 1e-12:
                violations += 1
    assert violations == 0
    _report("[2/12] exponential-weights regret bound held on 1000 streams x "
            "7 learning rates (0 violations)")


def test_03_delayed_wrapper_exactness_and_bound():
    """Round-robin wrapper: regret splits exactly across instances and obeys
    the d-scaled bound; d=1 is the base learner verbatim."""
    rng = np.random.default_rng(303)
    prior = PosteriorDist.uniform(4)
    eta = 0.3
    for trial in range(50):
        n = int(rng.integers(30, 120))
        costs = rng.uniform(-1, 1, size=(n, 4))
        d = int(rng.choice([2, 4, 8]))
        trace = play_costs(costs, make_learner("ewa", prior, eta, d=d), d)
        dirac = PosteriorDist.dirac(int(np.argmin(costs.sum(axis=0))), 4)
        total = realized_regret(trace, dirac)
        per = instance_regrets(trace, dirac, d)
        assert abs(total - per.sum()) < 1e-12
        assert total <= d * math.log(4) / eta + eta * n / 2 + 1e-12
    costs = rng.uniform(-1, 1, size=(60, 4))
    wrapped = play_costs(costs, make_learner("ewa", prior, eta, d=1), 1)
    bare = play_costs(costs, EWA(prior, eta), 1)
    assert all(np.array_equal(a, b) for a, b in zip(wrapped.posteriors,
                                                    bare.posteriors))
    _report("[3/12] delayed round-robin wrapper: exact per-instance regret "
            "split, d-scaled bound, transparent at d=1")


def _simplex_grid(W, steps):
    """All probability vectors with coordinates on a 1/steps lattice."""
    if W == 2:
        a = np.arange(steps + 1) / steps
        return np.column_stack([a, 1 - a])
    if W == 3:
        i, j = np.meshgrid(np.arange(steps + 1), np.arange(steps + 1),
                           indexing="ij")
        mask = i + j <= steps
        i, j = i[mask], j[mask]
        return np.column_stack([i, j, steps - i - j]) / steps
    i, j, k = np.meshgrid(*[np.arange(steps + 1, dtype=np.int32)] * 3,
                          indexing="ij")
    mask = i + j + k <= steps
    i, j, k = i[mask], j[mask], k[mask]
    return np.column_stack([i, j, k, steps - i - j - k]) / steps


def test_04_ftrl_entropy_equals_ewa_and_projection_oracle():
    rng = np.random.default_rng(404)
    for _ in range(100):
        n, W = int(rng.integers(10, 60)), int(rng.integers(2, 5))
        costs = rng.uniform(-1, 1, size=(n, W))
        eta = float(rng.uniform(0.05, 2.0))
        prior = PosteriorDist.from_probs(rng.dirichlet(np.ones(W)))
        a, b = EWA(prior, eta), FTRL(prior, eta)
        for c in costs:
            np.testing.assert_allclose(a.act().probs, b.act().probs,
                                       atol=1e-9)
            a.observe(c)
            b.observe(c)
    # projection against an exhaustive lattice search; the lattice for
    # four coordinates uses a 5e-3 pitch to keep the point count sane,
    # with the tolerance widened in proportion
    for W, steps, tol in ((2, 1000, 2e-3), (3, 1000, 2e-3), (4, 200, 1e-2)):
        grid = _simplex_grid(W, steps)
        for _ in range(10):
            y = rng.normal(size=W) * 2
            best = grid[np.argmin(np.sum((grid - y) ** 2, axis=1))]
            assert np.max(np.abs(project_simplex(y) - best)) <= tol
    _report("[4/12] entropic follow-the-regularized-leader reproduces "
            "exponential weights (1e-9); simplex projection matches the "
            "lattice oracle")


def test_05_exact_mixing_oracle_closed_form_and_linearity():
    model = two_state_chain(0.25, 0.25)
    losses = np.array([[0.0, 1.0], [1.0, 0.0]])
    for d in range(1, 31):
        assert abs(exact_phi(model, losses, d) - 0.5 * 0.5**d) < 1e-9
    # additive noise: the conditional gap matrix is affine in the noise
    # scale as long as the composite loss never clips
    noise = two_state_chain(0.3, 0.2)
    base_probs = np.array([0.6, 0.4])
    base_losses = np.array([[0.3, 0.7], [0.5, 0.4]])
    vals = np.array([-1.0, 1.0])

    def gap_matrix(alpha, d):
        spec = ContaminationSpec(base_probs=base_probs, noise_model=noise,
                                 noise_values=vals, alpha=alpha)
        m, table = build_contaminated(spec, base_losses)
        test_vec = table @ m.stationary
        return test_vec[None, :] - conditional_loss_expectations(m, table, d)

    for d in (1, 2, 5):
        g0, g1, g2 = (gap_matrix(a, d) for a in (0.0, 0.1, 0.2))
        assert np.max(np.abs(g2 - 2 * g1 + g0)) < 1e-10
    _report("[5/12] eigenvalue-exact mixing coefficients (phi_d = 0.5^{d+1}) "
            "and alpha-linear contaminated gaps")


def _coverage_config(mode_seed):
    return config_from_dict({
        "process": {"transition": [[0.95, 0.05], [0.05, 0.95]]},
        "loss": {"losses": [[0.0, 1.0], [1.0, 0.0]]},
        "learner": {"kind": "gibbs", "beta": 1.0},
        "online": {"algorithm": "ewa", "eta": 0.3,
                   "delay": "auto-geometric"},
        "experiment": {"n": 2000, "replicates": 1000, "delta": 0.1,
                       "seed": mode_seed, "d_max": 30},
    })


def test_06_martingale_tail_bound_coverage():
    start = time.monotonic()
    cfg = _coverage_config(611)
    assert cfg.delay == 73  # ceil(tau * ln n) with tau = -1/ln 0.9
    res = coverage_experiment(cfg, mode="mn")
    elapsed = time.monotonic() - start
    sigma = math.sqrt(0.1 * 0.9 / 1000)
    assert res.violation_rate <= 0.1 + 3 * sigma
    assert elapsed < 120.0
    _report(f"[6/12] blocking tail bound coverage: violation rate "
            f"{res.violation_rate:.3f} <= {0.1 + 3 * sigma:.3f} over 1000 "
            f"replicates ({elapsed:.1f}s)")


def test_07_generalization_bound_coverage():
    cfg = _coverage_config(712)
    res = coverage_experiment(cfg, mode="gen")
    sigma = math.sqrt(0.1 * 0.9 / 1000)
    assert res.violation_rate <= 0.1 + 3 * sigma
    _report(f"[7/12] realized-regret generalization bound coverage: "
            f"violation rate {res.violation_rate:.3f} over 1000 replicates")


def test_08_delay_tuning_formulas_and_rate_exponent():
    assert tune_delay_geometric(2.0, 1000) == 14
    assert tune_delay_algebraic(1.0, 1.0, 1000) == 10
    for r in (0.5, 1.0, 2.0):
        v1 = algebraic_main_term(1.0, r, 10**4, 0.05)
        v2 = algebraic_main_term(1.0, r, 10**7, 0.05)
        slope = (math.log(v2) - math.log(v1)) / math.log(10**3)
        assert abs(slope + r / (1 + 2 * r)) < 1e-12
    _report("[8/12] delay tuning (geometric 14, algebraic 10) and the "
            "n^{-r/(1+2r)} rate exponent")


def test_09_delay_sweep_is_u_shaped_and_tuning_is_near_optimal():
    doc = {
        "process": {"transition": [[0.95, 0.05], [0.05, 0.95]]},
        "loss": {"losses": [[0.0, 1.0], [1.0, 0.0]]},
        "learner": {"kind": "gibbs", "beta": 1.0},
        "online": {"algorithm": "ewa", "eta": 0.3, "delay": 1},
        "experiment": {"n": 2000, "replicates": 1, "delta": 0.1, "seed": 9,
                       "d_grid": list(range(1, 65)) + [73], "d_max": 30},
    }
    rows = delay_sweep(config_from_dict(doc))
    totals = [r["total_bound"] for r in rows]
    grid_min = min(totals[:64])
    k = int(np.argmin(totals[:64]))
    assert all(np.diff(totals[:k + 1]) <= 1e-12)      # falling branch
    assert all(np.diff(totals[k:64]) >= -1e-12)       # rising branch
    assert totals[64] <= 2.0 * grid_min               # tuned d = 73
    _report(f"[9/12] delay sweep is U-shaped (minimum at d={k + 1}) and the "
            f"tuned delay lands within {totals[64] / grid_min:.2f}x of it")


def test_10_composite_mixing_inequality_memory2():
    start = time.monotonic()
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    dl = MemoryTableLoss(2, np.stack([x, 1.0 - x]))
    for p in (0.05, 0.25):
        rows = composite_phi_check(two_state_chain(p, p), dl, range(2, 21))
        assert all(r["ok"] and r["ok_mirror"] for r in rows)
    elapsed = time.monotonic() - start
    assert elapsed < 30.0
    _report(f"[10/12] composite inequality phi_d <= 2B + beta for the "
            f"memory-2 parity loss, d = 2..20 ({elapsed:.1f}s)")


def test_11_memory1_losses_reduce_to_the_static_machinery():
    model = two_state_chain(0.1, 0.3)
    table = np.array([[0.1, 0.9], [0.6, 0.2], [0.4, 0.4]])
    space = HypothesisSpace(table)
    dl = MemoryTableLoss(1, table)
    limits, err = limit_test_losses(dl, model)
    np.testing.assert_allclose(limits, stationary_losses(space, model),
                               atol=1e-12)
    assert err == 0.0
    for d in (1, 2, 4, 8):
        np.testing.assert_allclose(
            dynamic_conditional_expectations(model, dl, d),
            conditional_loss_expectations(model, table, d), atol=1e-12)
        assert abs(dynamic_phi_mirror(model, dl, d)
                   - exact_phi(model, table, d)) < 1e-12
        assert abs(exact_block_beta(model, dl, d)
                   - max(0.0, phi_gap(model, table, 2 * d))) < 1e-12
    path = sample_path(model, 200, seed=5)
    t_dyn = run_dynamic_game(model, dl, path,
                             make_learner("ewa", PosteriorDist.uniform(3),
                                          0.4, d=3), 3)
    t_static = run_game(model, space, path,
                        make_learner("ewa", PosteriorDist.uniform(3),
                                     0.4, d=3), 3)
    np.testing.assert_array_equal(t_dyn.costs, t_static.costs)
    assert all(np.array_equal(a, b) for a, b in zip(t_dyn.posteriors,
                                                    t_static.posteriors))
    _report("[11/12] memory-1 dynamic losses reproduce the static limits, "
            "conditionals, mixing gaps and game traces (1e-12)")


def test_12_cli_runs_are_byte_identical(tmp_path):
    base = {
        "process": {"transition": [[0.85, 0.15], [0.2, 0.8]]},
        "loss": {"losses": [[0.0, 1.0], [1.0, 0.0]]},
        "learner": {"kind": "gibbs", "beta": 1.0},
        "online": {"algorithm": "ewa", "eta": 0.3, "delay": 2},
        "experiment": {"n": 80, "replicates": 3, "delta": 0.1, "seed": 21,
                       "d_grid": [1, 2, 4], "d_max": 8},
        "bounds": {"n": 500, "delta": 0.05, "tau": 2.0, "kl": math.log(2),
                   "eta": 0.1, "r": 1.0},
    }
    dyn_doc = json.loads(json.dumps(base))
    x = [[0.0, 1.0], [1.0, 0.0]]
    dyn_doc["loss"] = {"kind": "memory-table", "m": 2,
                       "table": [x, [[1.0, 0.0], [0.0, 1.0]]]}
    dyn_doc["experiment"]["d_grid"] = [2, 4, 6]
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps(base))
    dyn_cfg = tmp_path / "dynamic.json"
    dyn_cfg.write_text(json.dumps(dyn_doc))
    commands = [
        ["simulate", "--config", str(cfg), "--format", "json"],
        ["coverage", "--config", str(cfg), "--mode", "gen"],
        ["sweep-delay", "--config", str(cfg)],
        ["mixing", "--config", str(cfg)],
        ["bounds", "--config", str(cfg)],
        ["dynamic", "--config", str(dyn_cfg)],
    ]
    for idx, cmd in enumerate(commands):
        outs = []
        for run in ("a", "b"):
            out = tmp_path / f"{idx}-{run}"
            assert cli_main(cmd + ["--out", str(out), "--seed", "77"]) == 0
            outs.append(out)
        files_a = sorted(p.name for p in outs[0].iterdir())
        files_b = sorted(p.name for p in outs[1].iterdir())
        assert files_a == files_b and files_a
        for name in files_a:
            assert (outs[0] / name).read_bytes() == \
                (outs[1] / name).read_bytes(), f"{cmd[0]}/{name} differs"
    _report("[12/12] all six command-line subcommands are byte-identical "
            "across repeat runs with a fixed seed")
