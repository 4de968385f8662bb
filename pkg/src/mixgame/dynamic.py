"""Sequence-dependent losses: bounded memory or geometric discounting.

A dynamic loss reads a whole data prefix instead of a single symbol.  The
module computes, exactly where enumeration is feasible:

* the limiting test loss (expected loss of a long stationary prefix),
* forgetting coefficients B_d (worst change from altering symbols older
  than d steps),
* block mixing coefficients beta_d (conditional-expectation gap between a
  length-d block and an independent stationary copy, given the past at
  lag 2d),
* the dynamic mixing coefficient phi_d of the induced cost sequence,

and verifies that phi_d is dominated by the composite 2*B_{ceil(d/2)} +
beta_{ceil(d/2)} built from the two profiles.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import SizeError, ValidationError
from .game import GameTrace, play_costs
from .process import ProcessModel, SamplePath, sample_path

_ENUM_CAP = 10**6


class MemoryTableLoss:
    """Loss that reads the last m symbols; a table indexed by that window.

    Prefixes shorter than m are left-padded with their own first symbol, so
    the loss is defined on sequences of every length.
    """

    kind = "memory-table"

    def __init__(self, m: int, table):
        table = np.asarray(table, dtype=float)
        if m < 1 or table.ndim != m + 1:
            raise ValidationError("table must have shape (W,) + (A,)*m")
        if np.any(table < 0) or np.any(table > 1):
            raise ValidationError("loss values must lie in [0, 1]")
        if len(set(table.shape[1:])) > 1:
            raise ValidationError("all symbol axes must share the alphabet size")
        self.m = m
        self.table = table
        self.n_hypotheses = table.shape[0]
        self.alphabet = table.shape[1]

    def window(self, prefix) -> tuple:
        prefix = np.asarray(prefix)
        if len(prefix) == 0:
            raise ValidationError("prefix must be non-empty")
        if len(prefix) >= self.m:
            return tuple(int(z) for z in prefix[-self.m:])
        pad = [int(prefix[0])] * (self.m - len(prefix))
        return tuple(pad + [int(z) for z in prefix])

    def values(self, prefix) -> np.ndarray:
        """Loss of every hypothesis on the given prefix."""
        return self.table[(slice(None),) + self.window(prefix)]

    def loss_rows(self, symbols) -> np.ndarray:
        """(n, W) losses of the running prefixes, vectorized over rounds."""
        symbols = np.asarray(symbols)
        n = len(symbols)
        t = np.arange(n)
        cols = tuple(symbols[np.maximum(t - self.m + 1 + j, 0)] for j in range(self.m))
        return self.table[(slice(None),) + cols].T


class DiscountedLoss:
    """Geometrically discounted running loss, clipped to [0, 1].

    value(w, prefix) = clip(scale * sum_k gamma^k g(w, z_{t-k}), 0, 1) with
    g a per-symbol table in [0, 1].
    """

    kind = "discounted"

    def __init__(self, gamma: float, scale: float, g_table):
        if not 0 < gamma < 1:
            raise ValidationError("gamma must lie in (0, 1)")
        if scale <= 0:
            raise ValidationError("scale must be positive")
        g = np.asarray(g_table, dtype=float)
        if g.ndim != 2 or np.any(g < 0) or np.any(g > 1):
            raise ValidationError("g_table must be W x A with entries in [0, 1]")
        self.gamma = gamma
        self.scale = scale
        self.g = g
        self.n_hypotheses = g.shape[0]
        self.alphabet = g.shape[1]

    def values(self, prefix) -> np.ndarray:
        prefix = np.asarray(prefix)
        if len(prefix) == 0:
            raise ValidationError("prefix must be non-empty")
        weights = self.gamma ** np.arange(len(prefix))[::-1]
        raw = self.scale * (self.g[:, prefix] @ weights)
        return np.clip(raw, 0.0, 1.0)

    def loss_rows(self, symbols) -> np.ndarray:
        symbols = np.asarray(symbols)
        G = self.g[:, symbols]  # (W, n)
        out = np.empty_like(G)
        acc = np.zeros(G.shape[0])
        for t in range(G.shape[1]):
            acc = G[:, t] + self.gamma * acc
            out[:, t] = acc
        return np.clip(self.scale * out.T, 0.0, 1.0)

    def tail_envelope(self, d: int) -> float:
        """Upper bound on the influence of symbols older than d steps."""
        span = float(np.max(self.g.max(axis=1) - self.g.min(axis=1)))
        return self.scale * span * self.gamma**d / (1.0 - self.gamma)


def loss_from_json(doc: str | dict):
    """Load a dynamic loss from its JSON schema."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    kind = doc.get("kind")
    if kind == "memory-table":
        return MemoryTableLoss(doc["m"], doc["table"])
    if kind == "discounted":
        return DiscountedLoss(doc["gamma"], doc["scale"], doc["g_table"])
    raise ValidationError(f"unknown dynamic loss kind {kind!r}")


def _check_cap(alphabet: int, length: int, cap: int = _ENUM_CAP) -> None:
    if alphabet**length > cap:
        raise SizeError(f"enumeration of {alphabet}^{length} blocks exceeds "
                        f"cap {cap}; use the Monte Carlo fallback")


def _block_joint(model: ProcessModel, start_dist: np.ndarray,
                 length: int) -> np.ndarray:
    """Joint law of a length-`length` block whose first symbol follows start_dist."""
    joint = np.asarray(start_dist, dtype=float)
    for _ in range(length - 1):
        joint = joint[..., :, None] * model.transition
    return joint


def _block_expectations(dl, model: ProcessModel, start_dist: np.ndarray,
                        length: int) -> np.ndarray:
    """E[loss(w, block)] for a block drawn with the given start distribution."""
    _check_cap(dl.alphabet, length)
    joint = _block_joint(model, start_dist, length).reshape(-1)
    if isinstance(dl, MemoryTableLoss) and length >= dl.m:
        # only the last m symbols matter: marginalize the head
        joint = joint.reshape((dl.alphabet ** (length - dl.m), -1)).sum(axis=0)
        flat = dl.table.reshape(dl.n_hypotheses, -1)
        return flat @ joint
    vals = np.empty((dl.alphabet**length, dl.n_hypotheses))
    for i, block in enumerate(itertools.product(range(dl.alphabet), repeat=length)):
        vals[i] = dl.values(np.asarray(block))
    return vals.T @ joint


def limit_test_losses(dl, model: ProcessModel, horizon: int | None = None,
                      cap: int = _ENUM_CAP) -> tuple[np.ndarray, float]:
    """Limiting test loss of every hypothesis, with a truncation-error bound.

    Memory losses are exact at any horizon >= m (error 0); discounted
    losses are truncated at the horizon with error <= the tail envelope.
    """
    if isinstance(dl, MemoryTableLoss):
        if horizon is None:
            horizon = dl.m
        if horizon < dl.m:
            raise ValidationError("horizon must cover the loss memory")
        vals = _block_expectations(dl, model, model.stationary, dl.m)
        return vals, 0.0
    if horizon is None:
        horizon = max(1, math.floor(math.log(cap) / math.log(dl.alphabet)))
    _check_cap(dl.alphabet, horizon, cap)
    vals = _block_expectations(dl, model, model.stationary, horizon)
    return vals, dl.tail_envelope(horizon)


def limit_test_losses_mc(dl, model: ProcessModel, horizon: int,
                         n_samples: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Monte Carlo estimate of the limiting test loss, with standard errors."""
    rng_seed = seed
    samples = np.empty((n_samples, dl.n_hypotheses))
    for i in range(n_samples):
        p = sample_path(model, horizon, rng_seed + i)
        samples[i] = dl.values(p.symbols)
    return samples.mean(axis=0), samples.std(axis=0, ddof=1) / math.sqrt(n_samples)


def forgetting_profile(dl, d_max: int) -> np.ndarray:
    """B_d for d = 1..d_max: worst loss change from disagreeing beyond lag d.

    Memory losses get the exact profile by enumeration (zero at and beyond
    m); discounted losses get the analytic geometric envelope.
    """
    if isinstance(dl, DiscountedLoss):
        return np.array([dl.tail_envelope(d) for d in range(1, d_max + 1)])
    A, m, W = dl.alphabet, dl.m, dl.n_hypotheses
    _check_cap(A, m)
    out = np.zeros(d_max)
    for d in range(1, min(m, d_max + 1)):
        worst = 0.0
        for suffix in itertools.product(range(A), repeat=d):
            vals = []
            for l in range(d, m + 1):  # lengths beyond m behave like length m
                for head in itertools.product(range(A), repeat=l - d):
                    vals.append(dl.values(np.asarray(head + suffix)))
            vals = np.asarray(vals)
            worst = max(worst, float(np.max(vals.max(axis=0) - vals.min(axis=0))))
        out[d - 1] = worst
    return out


def exact_block_beta(model: ProcessModel, dl, d: int,
                     cap: int = _ENUM_CAP) -> float:
    """Block mixing coefficient at lag d, exact via transition powers.

    Compares the expected loss of an independent stationary length-d block
    against the conditional law of the realized block given the state 2d
    rounds before the block's end, maximized over hypotheses and states.
    """
    if d < 1:
        raise ValidationError("d must be at least 1")
    if isinstance(dl, MemoryTableLoss):
        eff = min(dl.m, d)  # only the last eff symbols of the block matter
    else:
        eff = d
    _check_cap(dl.alphabet, eff, cap)
    steps_to_suffix = 2 * d - eff + 1  # from Z_{t-2d} to the first used symbol

    if isinstance(dl, MemoryTableLoss) and d < dl.m:
        # the block itself is shorter than the memory: evaluate padded blocks
        def expectations(start_dist):
            joint = _block_joint(model, start_dist, d).reshape(-1)
            vals = np.empty((dl.alphabet**d, dl.n_hypotheses))
            for i, block in enumerate(itertools.product(range(dl.alphabet), repeat=d)):
                vals[i] = dl.values(np.asarray(block))
            return vals.T @ joint
    else:
        def expectations(start_dist):
            return _block_expectations(dl, model, start_dist, eff)

    stat = expectations(model.stationary)  # (W,)
    P_lag = np.linalg.matrix_power(model.transition, steps_to_suffix)
    gaps = [stat - expectations(P_lag[s]) for s in range(model.n_states)]
    return max(0.0, float(np.max(gaps)))


def block_mixing_profile(model: ProcessModel, dl, d_max: int) -> np.ndarray:
    return np.array([exact_block_beta(model, dl, d) for d in range(1, d_max + 1)])


def dynamic_conditional_expectations(model: ProcessModel, dl: MemoryTableLoss,
                                     d: int) -> np.ndarray:
    """E[loss(w, Z_t, ..., Z_1) | Z_{t-d} = s] for every (s, w); needs d >= m."""
    if d < dl.m:
        raise ValidationError("exact evaluation needs d >= m; use the MC fallback")
    steps = d - dl.m + 1
    P_lag = np.linalg.matrix_power(model.transition, steps)
    return np.stack([_block_expectations(dl, model, P_lag[s], dl.m)
                     for s in range(model.n_states)])


def dynamic_phi_gap(model: ProcessModel, dl: MemoryTableLoss, d: int) -> float:
    """Unclamped max over (w, s) of conditional expected loss minus the limit loss."""
    limit, _ = limit_test_losses(dl, model)
    cond = dynamic_conditional_expectations(model, dl, d)
    return float(np.max(cond - limit[None, :]))


def dynamic_phi(model: ProcessModel, dl: MemoryTableLoss, d: int) -> float:
    """Mixing coefficient of the dynamic cost sequence, clamped at zero.

    Note the one-sided gap here is (loss minus limit loss), the mirror of
    the static convention (test loss minus loss); each is computed exactly
    as defined.
    """
    return max(0.0, dynamic_phi_gap(model, dl, d))


def dynamic_phi_mirror(model: ProcessModel, dl: MemoryTableLoss, d: int) -> float:
    """Clamped max over (w, s) of limit loss minus conditional expected loss.

    This is the side of the gap that the blocked martingale argument
    consumes, and the side the composite 2*B + beta bound actually
    dominates; on symmetric instances it coincides with dynamic_phi.
    """
    limit, _ = limit_test_losses(dl, model)
    cond = dynamic_conditional_expectations(model, dl, d)
    return max(0.0, float(np.max(limit[None, :] - cond)))


def dynamic_phi_mc(model: ProcessModel, dl, d: int, n_samples: int, seed: int,
                   history: int = 64) -> tuple[float, float]:
    """Monte Carlo estimate of the dynamic phi_d for losses without exact paths.

    For each conditioning state the stationary history before the state is
    sampled through the time-reversed chain, then the chain runs d steps
    forward; the estimate is the worst conditional mean minus the limit loss.
    """
    limit, _ = limit_test_losses(dl, model, horizon=None) \
        if isinstance(dl, MemoryTableLoss) else limit_test_losses(dl, model)
    pi = model.stationary
    reverse = (model.transition * pi[None, :]).T / pi[:, None]
    reverse = reverse / reverse.sum(axis=1, keepdims=True)
    rev_model = ProcessModel(transition=reverse, stationary=pi)
    rng = np.random.default_rng(seed)
    worst_gap, worst_se = -np.inf, 0.0
    for s in range(model.n_states):
        means = np.empty((n_samples, dl.n_hypotheses))
        for i in range(n_samples):
            back = _walk(rev_model, s, history, rng)[::-1]
            fwd = _walk(model, s, d, rng)
            prefix = np.concatenate([back, [s], fwd])
            means[i] = dl.values(prefix)
        gap = means.mean(axis=0) - limit
        j = int(np.argmax(gap))
        if gap[j] > worst_gap:
            worst_gap = float(gap[j])
            worst_se = float(means[:, j].std(ddof=1) / math.sqrt(n_samples))
    return max(0.0, worst_gap), worst_se


def _walk(model: ProcessModel, start: int, steps: int, rng) -> np.ndarray:
    cum = np.cumsum(model.transition, axis=1)
    out = np.empty(steps, dtype=np.int64)
    s = start
    for t in range(steps):
        s = min(int(np.searchsorted(cum[s], rng.random(), side="right")),
                model.n_states - 1)
        out[t] = s
    return out


def composite_phi_check(model: ProcessModel, dl, d_grid,
                        tol: float = 1e-9) -> list[dict]:
    """Check phi_d <= 2*B_{d'} + beta_{d'} with d' = floor(d/2) along a grid.

    The even-d reduction uses d' = d/2 exactly; for odd d the floor keeps
    2*d' <= d, so the block coefficient conditions on a finer sigma-algebra
    than the gap it must dominate (the ceiling would not).  Both one-sided
    gaps are evaluated exactly: the (loss minus limit) convention of the
    dynamic mixing definition and its mirror (limit minus loss), which is
    the side the derivation dominates.
    """
    rows = []
    d_grid = [int(d) for d in d_grid]
    if min(d_grid) < 2:
        raise ValidationError("composite check needs d >= 2")
    d_half_max = max(d // 2 for d in d_grid)
    B = forgetting_profile(dl, d_half_max)
    for d in d_grid:
        dh = d // 2
        lhs = dynamic_phi(model, dl, d)
        mirror = dynamic_phi_mirror(model, dl, d)
        beta = exact_block_beta(model, dl, dh)
        rhs = 2.0 * B[dh - 1] + beta
        rows.append({"d": d, "d_half": dh, "phi_dynamic": lhs,
                     "phi_mirror": mirror,
                     "forgetting_2B": 2.0 * B[dh - 1], "block_beta": beta,
                     "rhs": rhs, "ok": lhs <= rhs + tol,
                     "ok_mirror": mirror <= rhs + tol})
    return rows


def run_dynamic_game(model: ProcessModel, dl, path: SamplePath, learner,
                     d: int) -> GameTrace:
    """Play the generalization game with sequence-dependent costs.

    Costs are loss(w, Z_t, ..., Z_1) minus the limiting test loss; the trace
    contract matches the static game, so decompose() applies unchanged.
    """
    limit, _ = limit_test_losses(dl, model)
    rows = dl.loss_rows(path.symbols)
    costs = rows - limit[None, :]
    return play_costs(costs, learner, d, symbols=path.symbols,
                      loss_rows=rows, test_loss_vec=limit)
