"""Effective-sampling-distribution auditor.

Alongside a recorded trace, the auditor rebuilds the per-step effective
distribution w_t over (query, component) pairs: mu(q) * gamma(q, j) on the
incorrect components of incorrect queries, and a water-filled row on every
correct query.  It then checks, step by step, the cap and conservation
properties of the water-filling rule, the oversampling bounds, the capped
cumulative mass lower bound, the elimination event, and the second-phase
progress argument.

Tolerances: mass conservation 1e-9; strict cap and threshold comparisons
relaxed by 1e-12.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AuditIntegrityError

CAP_TOL = 1e-12
MASS_TOL = 1e-9


@dataclass(frozen=True)
class AuditParams:
    """Thresholds for one audited run; the oversampling threshold is tau = N/c."""

    N: int
    k: int
    ell: float
    eps_prime: float
    c: int

    @property
    def tau(self):
        return self.N / self.c

    @classmethod
    def from_run(cls, params):
        return cls(N=params.N, k=params.k, ell=params.ell, eps_prime=params.eps_prime, c=params.c)


def water_fill(W_prev_row, t, mu_q, c):
    """One row of the water-filling rule, written as the plain loop.

    Fill entries in ascending cumulative-mass order (ties: lowest index) up
    to the cap t*mu_q/c until a total of mu_q has been distributed.
    """
    W_prev_row = np.asarray(W_prev_row, dtype=np.float64)
    if W_prev_row.shape != (c,) or np.any(W_prev_row < 0):
        raise AuditIntegrityError("previous row must be c non-negative masses")
    if abs(W_prev_row.sum() - (t - 1) * mu_q) > MASS_TOL * max(1.0, t * mu_q):
        raise AuditIntegrityError("previous row must sum to (t-1)*mu(q)")
    cap = t * mu_q / c
    order = sorted(range(c), key=lambda j: (W_prev_row[j], j))
    w = np.zeros(c)
    delta = mu_q
    for j in order:
        if delta <= 0.0:
            break
        room = cap - W_prev_row[j]
        if room <= 0.0:
            continue
        w[j] = min(room, delta)
        delta -= w[j]
    if delta > MASS_TOL * max(1.0, mu_q):
        raise AuditIntegrityError("could not distribute mu(q) under the cap")
    return w


def water_fill_rows(W_prev, t, mu):
    """Vectorized water_fill over many query rows at once."""
    W_prev = np.asarray(W_prev, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    c = W_prev.shape[1]
    cap = (t * mu / c)[:, None]
    order = np.argsort(W_prev, axis=1, kind="stable")
    sorted_prev = np.take_along_axis(W_prev, order, axis=1)
    room = np.maximum(cap - sorted_prev, 0.0)
    already = np.cumsum(room, axis=1) - room
    w_sorted = np.clip(np.minimum(room, mu[:, None] - already), 0.0, None)
    w = np.zeros_like(W_prev)
    np.put_along_axis(w, order, w_sorted, axis=1)
    return w


def step_weights(space, h, policy, t, W, vs_mask=None):
    """The full effective distribution w_t over (Q, c) for hypothesis h."""
    gamma = policy.gamma_matrix(space, h, vs_mask)
    bad_rows = space.diff[h].any(axis=1)
    w = np.zeros((space.n_queries, space.c))
    w[bad_rows] = space.mu[bad_rows, None] * gamma[bad_rows]
    good = ~bad_rows
    if good.any():
        w[good] = water_fill_rows(W[good], t, space.mu[good])
    return w


def oversampled_set(W, tau, mu):
    """Boolean (Q, c): pairs with cumulative mass strictly above tau*mu(q)."""
    return W > tau * np.asarray(mu)[:, None] + CAP_TOL


def capped_mass(W, tau, mu):
    """Per-pair min{W, tau*mu(q)} and its total."""
    capped = np.minimum(W, tau * np.asarray(mu)[:, None])
    return capped, float(capped.sum())


@dataclass
class AuditReport:
    steps: int = 0
    lemma2_violations: int = 0
    mass_conservation_errors: int = 0
    lemma4_violations: int = 0
    lemma5_evaluated: int = 0
    lemma5_violations: int = 0
    corollary7_value: float = float("nan")
    corollary7_step: int = 0
    lemma3_event: bool = False
    lemma3_first_step: int | None = None
    phase2_evaluated: int = 0
    phase2_violations: int = 0
    phase2_progress: list = field(default_factory=list)  # capped-mass increments
    final_capped_mass: float = 0.0

    def deterministic_violations(self):
        return (
            self.lemma2_violations
            + self.mass_conservation_errors
            + self.lemma4_violations
            + self.lemma5_violations
        )

    def to_dict(self):
        return {
            "steps": self.steps,
            "lemma2_violations": self.lemma2_violations,
            "mass_conservation_errors": self.mass_conservation_errors,
            "lemma4_violations": self.lemma4_violations,
            "lemma5_checks": {
                "evaluated": self.lemma5_evaluated,
                "violated": self.lemma5_violations,
            },
            "corollary7_value": self.corollary7_value,
            "corollary7_step": self.corollary7_step,
            "lemma3_event": self.lemma3_event,
            "lemma3_first_step": self.lemma3_first_step,
            "phase2": {
                "evaluated": self.phase2_evaluated,
                "violated": self.phase2_violations,
            },
            "final_capped_mass": self.final_capped_mass,
        }


def audit_trace(space, trace, policy, params, emit=None):
    """Replay a trace and check every per-step property; returns AuditReport.

    `emit`, when given, is called once per step with a dict of per-step
    w_t summaries (for the --emit-trace CSV).
    """
    if not getattr(policy, "auditable", False):
        raise AuditIntegrityError(f"policy {policy.name!r} is not auditable")
    N, k, ell, eps_prime = params.N, params.k, params.ell, params.eps_prime
    tau = N / space.c
    mu = space.mu
    n_q, c = space.n_queries, space.c
    target_row = space.answers[space.target]

    W = np.zeros((n_q, c))
    mask = np.ones(space.n_hypotheses, dtype=bool)
    report = AuditReport()
    capped_total = 0.0
    sel_bad_mass = None  # W(bad set of h) at the step h was selected
    current = None

    for i in range(len(trace)):
        t = i + 1
        h = trace.hypothesis[i]
        q = trace.query[i]
        accepted = trace.accepted[i]
        diff_h = space.diff[h]
        if trace.selected[i] or h != current:
            sel_bad_mass = float(W[diff_h].sum())
            current = h

        # integrity: recorded feedback must match the hypothesis's correctness
        wrong_row = diff_h[q]
        if accepted == bool(wrong_row.any()):
            raise AuditIntegrityError(f"step {t}: accept flag contradicts hypothesis")
        if not accepted and not wrong_row[trace.component[i]]:
            raise AuditIntegrityError(f"step {t}: corrected a correct component")

        w = step_weights(space, h, policy, t, W, mask)
        good_rows = ~diff_h.any(axis=1)

        # water-fill caps on every touched entry of every correct query
        cap = (t * mu / c)[:, None]
        touched = good_rows[:, None] & (w > 0)
        if np.any(((W + w) > cap + CAP_TOL) & touched):
            report.lemma2_violations += 1

        # per-query mass conservation
        if np.any(np.abs(w.sum(axis=1) - mu) > MASS_TOL):
            report.mass_conservation_errors += 1

        W = W + w
        over = oversampled_set(W, tau, mu)

        # no effective mass on oversampled correct-query pairs while t <= N
        if t <= N and np.any(w[good_rows[:, None] & over] > 0):
            report.lemma4_violations += 1

        # oversampled bad-set mass is small while the selection was fresh
        if sel_bad_mass is not None and sel_bad_mass < ell:
            report.lemma5_evaluated += 1
            bad_over = w[diff_h & over].sum()
            if bad_over > ell / (tau - k) + MASS_TOL:
                report.lemma5_violations += 1

        new_capped = float(np.minimum(W, tau * mu[:, None]).sum())
        increment = new_capped - capped_total
        capped_total = new_capped

        # apply the recorded feedback to the version space
        if accepted:
            mask = mask & space.accept_elimination(q, target_row[q])
        else:
            j = trace.component[i]
            mask = mask & space.correction_elimination(q, j, int(target_row[q, j]))

        # elimination event: a hypothesis whose bad set is fully sampled survives
        if not report.lemma3_event:
            bad_mass = space.diff_flat @ W.reshape(-1)
            if np.any(mask & (bad_mass >= ell - CAP_TOL)):
                report.lemma3_event = True
                report.lemma3_first_step = t

        if t <= N:
            report.corollary7_value = capped_total / t
            report.corollary7_step = t

        if t > N:
            report.phase2_progress.append(increment)
            if space.err_vector[h] >= 2 * eps_prime and (
                sel_bad_mass is not None and sel_bad_mass < ell
            ):
                report.phase2_evaluated += 1
                if increment < eps_prime - MASS_TOL:
                    report.phase2_violations += 1

        if emit is not None:
            emit(
                {
                    "step": t,
                    "hypothesis": h,
                    "query": q,
                    "accepted": int(accepted),
                    "w_bad": float(w[diff_h].sum()),
                    "w_good": float(w[good_rows].sum()),
                    "w_bad_oversampled": float(w[diff_h & over].sum()),
                    "w_good_oversampled": float(w[(~diff_h) & over].sum()),
                    "capped_mass": capped_total,
                    "capped_increment": increment,
                }
            )

        report.steps = t

    report.final_capped_mass = capped_total
    return report
