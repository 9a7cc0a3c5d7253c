"""Simulated expert policies: which incorrect component gets corrected.

Every policy exposes its exact conditional feedback distribution (gamma) so
the sampling auditor can reconstruct the effective sampling distribution.
Deterministic policies return one-hot rows; ties break toward the lowest
component index for replayability.
"""

from __future__ import annotations

import numpy as np

from .errors import MalformedSpecError, UnsupportedPolicyError


class ExpertPolicy:
    name = "policy"
    auditable = True

    def gamma_matrix(self, space, h, vs_mask=None):
        """(Q, c) conditional feedback probabilities given current hypothesis h.

        Rows of queries on which h is correct are all-zero; rows of incorrect
        queries sum to 1 over the incorrect components.
        """
        raise NotImplementedError

    def gamma_row(self, space, h, q, vs_mask=None):
        return self.gamma_matrix(space, h, vs_mask)[q]

    def choose_feedback(self, space, h, q, rng, vs_mask=None):
        """Accept (None) when h is right on q, else an incorrect component."""
        row = self.gamma_row(space, h, q, vs_mask)
        total = row.sum()
        if total == 0.0:
            return None
        if row.max() == 1.0:
            return int(np.argmax(row))
        return int(rng.choice(space.c, p=row / total))


def _one_hot_rows(scores, candidates):
    """Per row, one-hot at the candidate with maximal score (ties: lowest j)."""
    n_q, c = candidates.shape
    masked = np.where(candidates, scores, -np.inf)
    best = np.argmax(masked, axis=1)  # argmax takes the first maximum
    gamma = np.zeros((n_q, c))
    rows = candidates.any(axis=1)
    gamma[np.flatnonzero(rows), best[rows]] = 1.0
    return gamma


def _require_values(space, name):
    if not space.has_component_values():
        raise UnsupportedPolicyError(
            f"policy {name!r} needs ordered component values, "
            f"which space kind {space.kind!r} does not provide"
        )
    return space.component_values


class LargestPolicy(ExpertPolicy):
    """Correct the largest-valued incorrect point."""

    name = "largest"

    def gamma_matrix(self, space, h, vs_mask=None):
        values = _require_values(space, self.name)
        return _one_hot_rows(values, space.diff[h])


class SmallestPolicy(ExpertPolicy):
    """Correct the smallest-valued incorrect point."""

    name = "smallest"

    def gamma_matrix(self, space, h, vs_mask=None):
        values = _require_values(space, self.name)
        return _one_hot_rows(-values, space.diff[h])


class GlaringFlawPolicy(ExpertPolicy):
    """Correct the highest-valued point that is wrongly labeled 0."""

    name = "glaring"

    def gamma_matrix(self, space, h, vs_mask=None):
        values = _require_values(space, self.name)
        wrong = space.diff[h]
        zero_suggested = wrong & (space.answers[h] == 0)
        # fall back to any incorrect component on rows without a wrong 0
        candidates = np.where(zero_suggested.any(axis=1)[:, None], zero_suggested, wrong)
        return _one_hot_rows(values, candidates)


class RandomIncorrectPolicy(ExpertPolicy):
    """Uniform over the incorrect components; audited via its exact gamma."""

    name = "random"

    def gamma_matrix(self, space, h, vs_mask=None):
        wrong = space.diff[h].astype(np.float64)
        counts = wrong.sum(axis=1, keepdims=True)
        return np.divide(wrong, counts, out=np.zeros_like(wrong), where=counts > 0)


class AdversarialMinShrinkPolicy(ExpertPolicy):
    """Greedy adversary: the correction that eliminates the fewest hypotheses
    from the current version space; ties break toward the lowest index."""

    name = "adversarial"

    def gamma_matrix(self, space, h, vs_mask=None):
        if vs_mask is None:
            vs_mask = np.ones(space.n_hypotheses, dtype=bool)
        # eliminated(q, j) = surviving hypotheses that disagree with the
        # target at (q, j); corrections always reveal the target's value
        eliminated = (vs_mask.astype(np.float64) @ space.diff_flat).reshape(
            space.n_queries, space.c
        )
        return _one_hot_rows(-eliminated, space.diff[h])

    def gamma_row(self, space, h, q, vs_mask=None):
        wrong = space.diff[h, q]
        row = np.zeros(space.c)
        if not wrong.any():
            return row
        if vs_mask is None:
            eliminated = space.diff[:, q, :].sum(axis=0)
        else:
            eliminated = (space.diff[:, q, :] & vs_mask[:, None]).sum(axis=0)
        masked = np.where(wrong, -eliminated.astype(np.float64), -np.inf)
        row[int(np.argmax(masked))] = 1.0
        return row


class GammaTablePolicy(ExpertPolicy):
    """Explicit per-(q, j) feedback weights, renormalized over the incorrect
    components of the current hypothesis."""

    name = "gamma"

    def __init__(self, table):
        table = np.asarray(table, dtype=np.float64)
        if np.any(table < 0):
            raise MalformedSpecError("gamma table entries must be non-negative")
        self.table = table

    def gamma_matrix(self, space, h, vs_mask=None):
        if self.table.shape != (space.n_queries, space.c):
            raise MalformedSpecError("gamma table shape must be (|Q|, c)")
        weights = np.where(space.diff[h], self.table, 0.0)
        totals = weights.sum(axis=1, keepdims=True)
        gamma = np.divide(weights, totals, out=np.zeros_like(weights), where=totals > 0)
        # rows with incorrect components but zero table mass fall back to uniform
        starved = space.diff[h].any(axis=1) & (totals[:, 0] == 0)
        if starved.any():
            wrong = space.diff[h][starved].astype(np.float64)
            gamma[starved] = wrong / wrong.sum(axis=1, keepdims=True)
        return gamma


POLICIES = {
    cls.name: cls
    for cls in (
        LargestPolicy,
        SmallestPolicy,
        GlaringFlawPolicy,
        RandomIncorrectPolicy,
        AdversarialMinShrinkPolicy,
    )
}


def make_policy(name, gamma_table=None):
    if name == GammaTablePolicy.name:
        if gamma_table is None:
            raise MalformedSpecError("gamma policy needs a gamma table")
        return GammaTablePolicy(gamma_table)
    try:
        return POLICIES[name]()
    except KeyError:
        raise MalformedSpecError(f"unknown policy {name!r}")


def gamma_of(policy, space, h, q, vs_mask=None):
    """Conditional correction distribution as {component: probability}."""
    row = policy.gamma_row(space, h, q, vs_mask)
    return {int(j): float(p) for j, p in enumerate(row) if p > 0}
