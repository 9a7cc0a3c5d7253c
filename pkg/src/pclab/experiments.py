"""Batch experiments: upper-bound sweeps, the phase-1 generalization check,
and the three lower-bound constructions, all reproducible from (spec, seed).

Per-trial random streams are derived as default_rng((seed, trial_index)).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import auditor
from .errors import MalformedSpecError
from .experts import make_policy
from .learners import (
    Episode,
    LearnerConfig,
    RunParameters,
    run_episode,
    select_hypothesis,
)
from .spaces import build_space, single_query_space, sparse_component_space, two_point_threshold_space


def trial_rng(seed, index):
    return np.random.default_rng((seed, index))


@dataclass
class ExperimentSpec:
    name: str
    space: object  # spec string/dict or a built HypothesisSpace
    policy: str = "random"
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    epsilon: float = 0.2
    delta: float = 0.1
    k: int = 1
    trials: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise MalformedSpecError("trials must be >= 1")


@dataclass
class SweepResult:
    spec: ExperimentSpec
    results: list
    traces: list
    params: RunParameters
    space: object

    @property
    def failure_rate(self):
        return 1.0 - np.mean([r.success for r in self.results])

    @property
    def steps(self):
        return np.array([r.steps_used for r in self.results])

    @property
    def switches(self):
        return np.array([r.switches for r in self.results])

    def summary(self):
        steps = self.steps
        return {
            "name": self.spec.name,
            "trials": len(self.results),
            "failure_rate": float(self.failure_rate),
            "steps_mean": float(steps.mean()),
            "steps_p95": float(np.percentile(steps, 95)),
            "switches_max": int(self.switches.max()),
            "budget": self.params.budget,
        }


def _resolve_space(space):
    return space if hasattr(space, "answers") else build_space(space)


def _resolve_policy(policy):
    return policy if hasattr(policy, "gamma_matrix") else make_policy(policy)


def _run_sweep(spec, phase1_only=False, keep_traces=True, stop_predicate_factory=None, jobs=1):
    space = _resolve_space(spec.space)
    params = RunParameters.for_space(space, spec.epsilon, spec.delta, spec.k)
    policy = _resolve_policy(spec.policy)

    def one_trial(i):
        result, episode = run_episode(
            space,
            policy,
            params,
            learner=spec.learner,
            seed=trial_rng(spec.seed, i),
            record_trace=keep_traces,
            max_steps=params.N if phase1_only else None,
            stop_on_goodness=not phase1_only,
            stop_predicate=None
            if stop_predicate_factory is None
            else stop_predicate_factory(space),
        )
        if phase1_only:
            # success here means every surviving hypothesis generalizes
            max_errc = float(space.errc_vector[episode.mask].max())
            result.success = max_errc < spec.epsilon
        return result, episode

    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(one_trial, range(spec.trials)))
    else:
        outcomes = [one_trial(i) for i in range(spec.trials)]
    results = [r for r, _ in outcomes]
    traces = [e.trace for _, e in outcomes]
    return SweepResult(spec, results, traces, params, space)


def verify_upper_bound(spec, keep_traces=True, jobs=1):
    """Empirical check of the 2N-step guarantee: a trial succeeds when the
    goodness check passes within budget and the verified hypothesis has
    err <= epsilon."""
    return _run_sweep(spec, keep_traces=keep_traces, jobs=jobs)


def verify_phase1_generalization(spec, keep_traces=True, jobs=1):
    """Run exactly N steps per trial; success iff max err_c over the surviving
    version space is below epsilon."""
    return _run_sweep(spec, phase1_only=True, keep_traces=keep_traces, jobs=jobs)


def audit_sweep(sweep, jobs=1):
    """Audit every trace of a sweep; returns the list of AuditReports."""
    policy = _resolve_policy(sweep.spec.policy)

    def one(trace):
        return auditor.audit_trace(sweep.space, trace, policy, sweep.params)

    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, sweep.traces))
    return [one(trace) for trace in sweep.traces]


# -- lower-bound constructions ---------------------------------------------------


def run_single_query_lower_bound(c):
    """Deterministic replay of the repeated-query construction; returns the
    exact round count at which err_c first drops to 1/2 or below."""
    if c < 2 or c % 2:
        raise MalformedSpecError("need even c >= 2")
    space = single_query_space(c)
    policy = make_policy("glaring")
    learner = LearnerConfig(kind="base", selection="threshold_min")
    params = RunParameters.for_space(space, 0.5, 0.1)
    episode = Episode(space, learner, params, rng=0)
    rounds = 0
    while True:
        episode.step(policy)
        rounds += 1
        # error of the threshold the learner now holds, post-feedback
        updated = select_hypothesis(space, episode.mask, "threshold_min")
        if space.err_c(updated) <= 0.5:
            return rounds


@dataclass
class LowerBoundResult:
    steps: np.ndarray
    switch_counts: np.ndarray
    space: object = None
    params: object = None
    policy: object = None
    traces: list = field(default_factory=list)

    @property
    def mean_steps(self):
        return float(self.steps.mean())

    @property
    def p5_steps(self):
        return float(np.percentile(self.steps, 5))


def run_two_point_lower_bound(c, eps, trials=200, seed=0, keep_traces=False):
    """Steps until every consistent hypothesis has err_c <= eps on the
    two-query construction, driven by the glaring-flaw expert."""
    if not eps < 0.25:
        raise MalformedSpecError("construction needs eps < 1/4")
    space = two_point_threshold_space(c, eps)
    policy = make_policy("glaring")
    learner = LearnerConfig(kind="base", selection="threshold_min")
    params = RunParameters.for_space(space, 2 * eps, 0.1)
    errc = space.errc_vector

    def stop(episode):
        return float(errc[episode.mask].max()) <= eps

    steps, switches, traces = [], [], []
    for i in range(trials):
        result, episode = run_episode(
            space,
            policy,
            params,
            learner=learner,
            seed=trial_rng(seed, i),
            record_trace=keep_traces,
            max_steps=10**7,
            stop_on_goodness=False,
            stop_predicate=stop,
        )
        steps.append(result.steps_used)
        switches.append(result.switches)
        traces.append(episode.trace)
    return LowerBoundResult(
        np.array(steps), np.array(switches), space, params, policy, traces
    )


def run_sparse_lower_bound(ell, c, eps, trials=200, seed=0, keep_traces=False):
    """Queries until the max-disagreement learner reaches err < eps on the
    sparse-component construction; also records hypothesis-switch counts."""
    space = sparse_component_space(ell, c, eps)
    policy = make_policy("random")
    learner = LearnerConfig(kind="base", selection="max_ones")
    params = RunParameters.for_space(space, eps, 0.1)
    err = space.err_vector

    def stop(episode):
        return float(err[episode.current]) < eps

    steps, switches, traces = [], [], []
    for i in range(trials):
        result, episode = run_episode(
            space,
            policy,
            params,
            learner=learner,
            seed=trial_rng(seed, i),
            record_trace=keep_traces,
            max_steps=10**7,
            stop_on_goodness=False,
            stop_predicate=stop,
        )
        steps.append(result.steps_used)
        switches.append(result.switches)
        traces.append(episode.trace)
    return LowerBoundResult(
        np.array(steps), np.array(switches), space, params, policy, traces
    )
