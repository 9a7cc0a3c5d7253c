"""Hypothesis-selection strategies and the interaction engine.

The base algorithm reselects a consistent hypothesis at every step; the
stick-with-it variant reselects only every k steps and keeps its hypothesis
even if it turns inconsistent mid-epoch.  An episode terminates when the
current hypothesis survives a long-enough run of consecutive accepts (the
goodness window) or when the 2N step budget runs out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyVersionSpaceError,
    MalformedSpecError,
    ProtocolViolationError,
)
from .protocol import Transcript, accept_record, correct_record

SELECTION_RULES = ("first_index", "seeded_random", "max_ones", "threshold_min")


@dataclass(frozen=True)
class LearnerConfig:
    kind: str = "base"  # "base" or "stick"
    k: int = 1  # epoch length for stick-with-it
    selection: str = "first_index"

    def __post_init__(self):
        if self.kind not in ("base", "stick"):
            raise MalformedSpecError(f"unknown learner kind {self.kind!r}")
        if self.k < 1:
            raise MalformedSpecError("k must be >= 1")
        if self.selection not in SELECTION_RULES:
            raise MalformedSpecError(f"unknown selection rule {self.selection!r}")

    @property
    def epoch(self):
        return self.k if self.kind == "stick" else 1


@dataclass(frozen=True)
class RunParameters:
    """epsilon/delta targets and the derived step accounting.

    ell = ln(|H| / delta) in natural log, eps_prime = epsilon / 2,
    N = ceil(c * (ell / eps_prime + k)), budget 2N, tau = N / c, and the
    goodness window is ceil(ell / eps_prime) consecutive accepts.
    """

    epsilon: float
    delta: float
    n_hypotheses: int
    c: int
    k: int = 1

    def __post_init__(self):
        if not (0 < self.epsilon < 1 and 0 < self.delta < 1):
            raise MalformedSpecError("need 0 < epsilon, delta < 1")
        if self.k < 1:
            raise MalformedSpecError("k must be >= 1")

    @property
    def ell(self):
        return math.log(self.n_hypotheses / self.delta)

    @property
    def eps_prime(self):
        return self.epsilon / 2

    @property
    def N(self):
        return math.ceil(self.c * (self.ell / self.eps_prime + self.k))

    @property
    def budget(self):
        return 2 * self.N

    @property
    def tau(self):
        return self.N / self.c

    @property
    def window(self):
        return math.ceil(self.ell / self.eps_prime)

    @classmethod
    def for_space(cls, space, epsilon, delta, k=1):
        return cls(epsilon, delta, space.n_hypotheses, space.c, k)


def stick_with_it_k(space, epsilon, delta):
    """Epoch length k = ceil(ell / eps_prime), which caps selections at 4c."""
    ell = math.log(space.n_hypotheses / delta)
    return math.ceil(ell / (epsilon / 2))


def goodness_check(window_outcomes, epsilon, delta, n_hypotheses):
    """True iff the current hypothesis was accepted on every one of the last
    ceil(ln(|H|/delta) / (epsilon/2)) consecutive steps."""
    need = math.ceil(math.log(n_hypotheses / delta) / (epsilon / 2))
    outcomes = list(window_outcomes)
    return len(outcomes) >= need and all(outcomes[-need:])


def select_hypothesis(space, mask, rule, rng=None):
    """A member of the current version space, chosen by the named rule."""
    candidates = np.flatnonzero(mask)
    if candidates.size == 0:
        raise EmptyVersionSpaceError("no hypothesis is consistent with the transcript")
    if rule == "first_index":
        return int(candidates[0])
    if rule == "seeded_random":
        return int(rng.choice(candidates))
    if rule == "max_ones":
        ones = space.meta.get("ones_count")
        if ones is None:
            ones = (space.answers == 1).sum(axis=(1, 2))
        return int(candidates[np.argmax(ones[candidates])])
    if rule == "threshold_min":
        thresholds = space.meta.get("thresholds")
        if thresholds is None:
            raise MalformedSpecError("threshold_min needs a threshold space")
        return int(candidates[np.argmax(thresholds[candidates])])
    raise MalformedSpecError(f"unknown selection rule {rule!r}")


@dataclass
class StepOutcome:
    step: int
    hypothesis: int
    query: int
    accepted: bool
    record: object
    selected: bool  # a (re)selection happened at the start of this step


@dataclass
class Trace:
    """Per-step protocol trace, sufficient for the sampling auditor."""

    hypothesis: list = field(default_factory=list)
    query: list = field(default_factory=list)
    accepted: list = field(default_factory=list)
    component: list = field(default_factory=list)  # None on accepts
    selected: list = field(default_factory=list)

    def __len__(self):
        return len(self.query)

    def add(self, outcome):
        self.hypothesis.append(outcome.hypothesis)
        self.query.append(outcome.query)
        self.accepted.append(outcome.accepted)
        self.component.append(None if outcome.accepted else outcome.record.component)
        self.selected.append(outcome.selected)


@dataclass
class TrialResult:
    seed: object
    steps_used: int
    switches: int
    final_hypothesis: int
    final_err: float
    success: bool
    reason: str  # "goodness", "budget", "predicate"


class Episode:
    """One interaction session against the space's target hypothesis."""

    def __init__(self, space, learner=None, params=None, rng=0, record_trace=False):
        self.space = space
        self.learner = learner or LearnerConfig()
        self.params = params
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self.transcript = Transcript()
        self.mask = np.ones(space.n_hypotheses, dtype=bool)
        self.trace = Trace() if record_trace else None
        self.t = 0  # completed steps
        self.current = None
        self.streak = 0
        self.switches = 0
        self._cum_mu = np.cumsum(space.mu)
        self._target_row = space.answers[space.target]

    # -- learner schedule ---------------------------------------------------

    def selection_due(self):
        return self.current is None or self.t % self.learner.epoch == 0

    def select(self):
        h = select_hypothesis(self.space, self.mask, self.learner.selection, self.rng)
        if self.current is not None and h != self.current:
            self.switches += 1
            self.streak = 0
        self.current = h
        return h

    # -- protocol single step -------------------------------------------------

    def draw_query(self):
        return int(np.searchsorted(self._cum_mu, self.rng.random(), side="right"))

    def apply_accept(self, q, displayed):
        self.t += 1
        rec = accept_record(self.t, q, displayed)
        self.transcript.append(rec)
        self.mask &= self.space.accept_elimination(q, rec.displayed)
        self.streak += 1
        return rec

    def apply_correction(self, q, j, value):
        self.t += 1
        rec = correct_record(self.t, q, j, value)
        self.transcript.append(rec)
        self.mask &= self.space.correction_elimination(q, j, value)
        self.streak = 0
        return rec

    def step(self, policy):
        """Run one full interaction step against the simulated expert."""
        selected = self.selection_due()
        if selected:
            self.select()
        h = self.current
        q = self.draw_query()
        displayed = self.space.answers[h, q]
        wrong = self.space.diff[h, q]
        if not wrong.any():
            rec = self.apply_accept(q, displayed)
            accepted = True
        else:
            j = policy.choose_feedback(self.space, h, q, self.rng, self.mask)
            if j is None or not wrong[j]:
                raise ProtocolViolationError(
                    f"expert corrected component {j} of query {q} where the "
                    "displayed value is already right"
                )
            rec = self.apply_correction(q, j, int(self._target_row[q, j]))
            accepted = False
        outcome = StepOutcome(self.t, h, q, accepted, rec, selected)
        if self.trace is not None:
            self.trace.add(outcome)
        return outcome

    def goodness_passed(self):
        return self.params is not None and self.streak >= self.params.window


def run_step(episode, policy):
    """Single-step entry point mirroring the protocol loop."""
    return episode.step(policy)


def run_episode(
    space,
    policy,
    params,
    learner=None,
    seed=0,
    record_trace=False,
    max_steps=None,
    stop_on_goodness=True,
    stop_predicate=None,
):
    """Run one episode; returns (TrialResult, Episode).

    max_steps defaults to the 2N budget.  stop_predicate(episode) may end the
    run early (used by the lower-bound experiments).
    """
    episode = Episode(space, learner, params, seed, record_trace)
    limit = params.budget if max_steps is None else max_steps
    reason = "budget"
    while episode.t < limit:
        episode.step(policy)
        if stop_on_goodness and episode.goodness_passed():
            reason = "goodness"
            break
        if stop_predicate is not None and stop_predicate(episode):
            reason = "predicate"
            break
    final_err = space.err(episode.current)
    success = reason == "goodness" and final_err <= params.epsilon
    result = TrialResult(
        seed=seed,
        steps_used=episode.t,
        switches=episode.switches,
        final_hypothesis=episode.current,
        final_err=final_err,
        success=success,
        reason=reason,
    )
    return result, episode
