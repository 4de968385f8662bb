"""Replicated experiment driver: config parsing, coverage runs, delay sweeps.

Replicate k draws its RNG stream from the master seed via a splitmix64
derivation, so runs are reproducible end to end and replicates are
independent.  Coverage runs use a vectorized closed form for round-robin
exponential-weights posteriors; its agreement with the generic game loop
is covered by tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bounds as bd
from . import dynamic as dyn
from .errors import ValidationError
from .game import decompose, play_costs, realized_regret, run_game
from .learner import (HypothesisSpace, PosteriorDist, erm, gibbs_posterior,
                      kl_divergence, space_from_json, test_losses)
from .online import delayed_ewa_bound, make_learner
from .process import (ProcessModel, exact_phi, fit_mixing_profile,
                      model_from_json, phi_table, replicate_seed, sample_path)


@dataclass
class ExperimentConfig:
    model: ProcessModel
    space: HypothesisSpace | None        # static loss table, or
    dynamic_loss: object | None          # a dynamic loss object
    learner_kind: str                    # "gibbs" | "erm"
    beta: float
    algorithm: str                       # "ewa" | "ftrl-entropy" | "ftrl-sqnorm"
    eta: float
    delay_spec: object                   # int | "auto-geometric" | "auto-algebraic"
    n: int
    replicates: int
    delta: float
    seed: int
    d_grid: list = field(default_factory=list)
    d_max: int = 30
    delay: int = 1

    @property
    def n_hypotheses(self) -> int:
        if self.space is not None:
            return self.space.n_hypotheses
        return self.dynamic_loss.n_hypotheses


def _require(cond: bool, name: str, msg: str) -> None:
    if not cond:
        raise ValidationError(f"config field {name!r}: {msg}")


def config_from_dict(doc: dict) -> ExperimentConfig:
    """Parse and validate the experiment JSON document."""
    _require(isinstance(doc, dict), "<root>", "must be a JSON object")
    for section in ("process", "loss", "experiment"):
        _require(section in doc, section, "missing section")
    model = model_from_json(doc["process"])

    loss_doc = doc["loss"]
    space, dynamic_loss = None, None
    if "losses" in loss_doc:
        space = space_from_json(loss_doc)
        _require(space.n_symbols == model.n_states, "loss.losses",
                 "loss table width must match the number of states")
    else:
        dynamic_loss = dyn.loss_from_json(loss_doc)
        _require(dynamic_loss.alphabet == model.n_states, "loss",
                 "loss alphabet must match the number of states")

    learner_doc = doc.get("learner", {"kind": "gibbs", "beta": 1.0})
    kind = learner_doc.get("kind", "gibbs")
    _require(kind in ("gibbs", "erm"), "learner.kind", "must be 'gibbs' or 'erm'")
    beta = float(learner_doc.get("beta", 1.0))
    _require(beta >= 0, "learner.beta", "must be non-negative")

    online_doc = doc.get("online", {})
    algorithm = online_doc.get("algorithm", "ewa")
    _require(algorithm in ("ewa", "ftrl-entropy", "ftrl-sqnorm"),
             "online.algorithm", "unknown algorithm")
    eta = float(online_doc.get("eta", 0.1))
    _require(eta > 0, "online.eta", "must be positive")
    delay_spec = online_doc.get("delay", 1)
    if not isinstance(delay_spec, int):
        _require(delay_spec in ("auto-geometric", "auto-algebraic"),
                 "online.delay", "must be an integer or auto-geometric/auto-algebraic")

    exp = doc["experiment"]
    n = int(exp.get("n", 0))
    _require(n >= 1, "experiment.n", "must be at least 1")
    replicates = int(exp.get("replicates", 1))
    _require(replicates >= 1, "experiment.replicates", "must be at least 1")
    delta = float(exp.get("delta", 0.05))
    _require(0 < delta < 1, "experiment.delta", "must lie in (0, 1)")
    seed = int(exp.get("seed", 0))
    d_grid = [int(v) for v in exp.get("d_grid", [])]
    d_max = int(exp.get("d_max", 30))

    cfg = ExperimentConfig(model=model, space=space, dynamic_loss=dynamic_loss,
                           learner_kind=kind, beta=beta, algorithm=algorithm,
                           eta=eta, delay_spec=delay_spec, n=n,
                           replicates=replicates, delta=delta, seed=seed,
                           d_grid=d_grid, d_max=d_max)
    cfg.delay = resolve_delay(cfg)
    return cfg


def resolve_delay(cfg: ExperimentConfig) -> int:
    """Turn the delay spec into a concrete integer in [1, n]."""
    if isinstance(cfg.delay_spec, int):
        d = cfg.delay_spec
        _require(1 <= d <= cfg.n, "online.delay", "must lie in [1, n]")
        return d
    _require(cfg.space is not None, "online.delay",
             "auto delay tuning needs a static loss table")
    table = phi_table(cfg.model, cfg.space.loss_table, min(cfg.d_max, cfg.n))
    if np.all(table <= 0):
        return 1  # i.i.d. losses: no reason to delay
    positive = table[table > 1e-15]
    if cfg.delay_spec == "auto-geometric":
        prof = fit_mixing_profile(positive, "geometric")
        return bd.tune_delay_geometric(prof.tau, cfg.n)
    prof = fit_mixing_profile(positive, "algebraic")
    return bd.tune_delay_algebraic(prof.C, prof.r, cfg.n)


def statistical_posterior(cfg: ExperimentConfig, path) -> PosteriorDist:
    if cfg.space is None:
        raise ValidationError("statistical learners need a static loss table")
    if cfg.learner_kind == "erm":
        return erm(cfg.space, path)
    return gibbs_posterior(cfg.space, path, cfg.beta)


def delayed_ewa_posteriors(costs: np.ndarray, prior_log: np.ndarray, eta: float,
                           d: int) -> np.ndarray:
    """Closed-form plays of the round-robin exponential-weights wrapper.

    The play at round t is softmax(prior_log - eta * sum of costs at rounds
    t-d, t-2d, ...), which is exactly what the wrapped learner produces
    when fed costs with delay d.
    """
    n, W = costs.shape
    S = np.zeros_like(costs)
    for i in range(min(d, n)):
        cls = costs[i::d]
        if len(cls) > 1:
            S[i + d::d] = np.cumsum(cls[:-1], axis=0)
    lw = prior_log[None, :] - eta * S
    lw -= lw.max(axis=1, keepdims=True)
    p = np.exp(lw)
    return p / p.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class CoverageResult:
    """Per-replicate bound-violation bookkeeping for one coverage run."""

    mode: str                     # "mn" | "gen"
    replicates: int
    values: np.ndarray            # the bounded quantity per replicate
    bound_values: np.ndarray
    violated: np.ndarray          # booleans, consistent with the stored values
    violation_rate: float
    stderr: float | None          # None when undefined (single replicate)

    def rows(self) -> list:
        return [[k, self.values[k], self.bound_values[k], bool(self.violated[k])]
                for k in range(self.replicates)]


def _replicate_run(cfg: ExperimentConfig, k: int):
    """One replicate: path, comparator, trace, decomposition."""
    seed = replicate_seed(cfg.seed, k)
    path = sample_path(cfg.model, cfg.n, seed)
    prior = PosteriorDist.uniform(cfg.n_hypotheses)
    if cfg.space is not None:
        comparator = statistical_posterior(cfg, path)
        learner = make_learner(cfg.algorithm, prior, cfg.eta, d=cfg.delay)
        trace = run_game(cfg.model, cfg.space, path, learner, cfg.delay)
    else:
        comparator = prior  # black-box posterior stand-in for dynamic losses
        learner = make_learner(cfg.algorithm, prior, cfg.eta, d=cfg.delay)
        trace = dyn.run_dynamic_game(cfg.model, cfg.dynamic_loss, path,
                                     learner, cfg.delay)
    parts = decompose(trace, comparator)
    return seed, path, comparator, trace, parts


def experiment_phi(cfg: ExperimentConfig) -> float:
    if cfg.space is not None:
        return exact_phi(cfg.model, cfg.space.loss_table, cfg.delay)
    if isinstance(cfg.dynamic_loss, dyn.MemoryTableLoss) \
            and cfg.delay >= cfg.dynamic_loss.m:
        return dyn.dynamic_phi(cfg.model, cfg.dynamic_loss, cfg.delay)
    phi, _ = dyn.dynamic_phi_mc(cfg.model, cfg.dynamic_loss, cfg.delay,
                                n_samples=200, seed=cfg.seed)
    return phi


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run all replicates; return the summary rows and bound reports."""
    phi = experiment_phi(cfg)
    dev = bd.deviation_term(cfg.delay, cfg.n, cfg.delta)
    rows, reports = [], []
    for k in range(cfg.replicates):
        seed, path, comparator, trace, parts = _replicate_run(cfg, k)
        regret = realized_regret(trace, comparator)
        mn_bound = phi + dev
        gen_bound = regret / cfg.n + phi + dev
        rows.append([k, seed, parts["gen"], parts["regret_over_n"],
                     parts["martingale"], phi, mn_bound, gen_bound,
                     parts["martingale"] > mn_bound, parts["gen"] > gen_bound])
        if k == 0:
            reports.append(bd.delay_bound(regret, phi, cfg.delay, cfg.n,
                                          cfg.delta, tag="delay-realized"))
            if cfg.space is not None:
                prior = PosteriorDist.uniform(cfg.n_hypotheses)
                kl = kl_divergence(comparator, prior)
                if math.isfinite(kl):
                    apriori = delayed_ewa_bound(kl, cfg.eta, cfg.delay, cfg.n)
                    reports.append(bd.delay_bound(apriori, phi, cfg.delay, cfg.n,
                                                  cfg.delta, tag="delay-apriori"))
    header = ["replicate", "seed", "gen", "regret_over_n", "martingale",
              "phi_d", "mn_bound", "gen_bound", "violated_mn", "violated_gen"]
    return {"header": header, "rows": rows, "reports": reports}


def coverage_experiment(cfg: ExperimentConfig, mode: str = "mn") -> CoverageResult:
    """Empirical violation rate of the martingale or generalization bound.

    Uses the closed-form wrapped-EWA posteriors when the configured
    algorithm is EWA, and the generic game loop otherwise.
    """
    if mode not in ("mn", "gen"):
        raise ValidationError("coverage mode must be 'mn' or 'gen'")
    phi = experiment_phi(cfg)
    dev = bd.deviation_term(cfg.delay, cfg.n, cfg.delta)
    mn_bound = phi + dev
    fast = cfg.algorithm == "ewa" and cfg.space is not None
    values = np.empty(cfg.replicates)
    bound_values = np.empty(cfg.replicates)
    prior = PosteriorDist.uniform(cfg.n_hypotheses)
    tl = test_losses(cfg.space, cfg.model) if cfg.space is not None else None
    for k in range(cfg.replicates):
        if fast:
            seed = replicate_seed(cfg.seed, k)
            path = sample_path(cfg.model, cfg.n, seed)
            loss_rows = cfg.space.loss_table[:, path.symbols].T
            costs = loss_rows - tl[None, :]
            posts = delayed_ewa_posteriors(costs, prior.log_weights, cfg.eta,
                                           cfg.delay)
            mn = float(-np.mean(np.sum(posts * costs, axis=1)))
            if mode == "mn":
                values[k], bound_values[k] = mn, mn_bound
            else:
                comparator = statistical_posterior(cfg, path)
                gen = float(comparator.probs @ (tl - loss_rows.mean(axis=0)))
                diff = posts - comparator.probs[None, :]
                regret = float(np.sum(diff * costs))
                values[k] = gen
                bound_values[k] = regret / cfg.n + mn_bound
        else:
            _, _, comparator, trace, parts = _replicate_run(cfg, k)
            if mode == "mn":
                values[k], bound_values[k] = parts["martingale"], mn_bound
            else:
                values[k] = parts["gen"]
                bound_values[k] = parts["regret_over_n"] + mn_bound
    violated = values > bound_values
    rate = float(violated.mean())
    stderr = None
    if cfg.replicates > 1:
        stderr = math.sqrt(rate * (1.0 - rate) / cfg.replicates)
    return CoverageResult(mode=mode, replicates=cfg.replicates, values=values,
                          bound_values=bound_values, violated=violated,
                          violation_rate=rate, stderr=stderr)


def mixing_table(cfg: ExperimentConfig) -> dict:
    """phi_d table for d = 1..d_max plus decay-law fits where possible."""
    if cfg.space is None:
        raise ValidationError("mixing tables need a static loss table")
    table = phi_table(cfg.model, cfg.space.loss_table, cfg.d_max)
    if np.any(np.diff(table) > 1e-12):
        raise ValidationError("phi table is not non-increasing")  # invariant gate
    fits = {}
    if np.all(table > 0):
        for kind in ("geometric", "algebraic"):
            prof = fit_mixing_profile(table, kind)
            fits[kind] = {"C": prof.C, "tau": prof.tau, "r": prof.r,
                          "residual": prof.fit_residual}
    return {"table": table, "fits": fits, "fit_skipped": not fits}


def delay_sweep(cfg: ExperimentConfig) -> list[dict]:
    if cfg.space is None:
        raise ValidationError("the delay sweep needs a static loss table")
    d_grid = cfg.d_grid or sorted({min(2**i, cfg.n) for i in range(7)})
    return bd.sweep_delay(cfg.model, cfg.space, cfg.n, cfg.delta, d_grid,
                          eta=cfg.eta, beta=cfg.beta, seed=cfg.seed,
                          algorithm=cfg.algorithm)
