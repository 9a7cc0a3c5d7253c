"""The acceptance battery: ten numbered checks, each returning a CheckResult.

Expensive sweeps are cached on the Battery object so that the upper-bound,
switch-count, generalization, and auditor checks all share one set of runs.
`sweep --check` and the acceptance test suite both call into this module.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analytics
from .auditor import audit_trace, water_fill
from .experiments import (
    ExperimentSpec,
    audit_sweep,
    run_single_query_lower_bound,
    run_sparse_lower_bound,
    run_two_point_lower_bound,
    verify_phase1_generalization,
    verify_upper_bound,
)
from .experts import make_policy
from .learners import LearnerConfig, stick_with_it_k
from .spaces import grid_threshold_space, sparse_component_space

EXACT_TOL = 1e-12

CRITERIA = {
    1: "closed-form agreement",
    2: "reduction-ratio curve",
    3: "water-filling properties",
    4: "single-query lower bound",
    5: "two-point scaling",
    6: "upper-bound failure rate",
    7: "switch bound",
    8: "phase-1 generalization",
    9: "auditor lemma suite",
    10: "sparse lower bound",
}


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.criterion:2d} {status}  {self.name} ({self.seconds:.1f}s)"


def _map(fn, items, jobs):
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def binomial_band(p, n):
    """p + 3 * sqrt(p (1 - p) / n), the tolerance used by the rate checks."""
    return p + 3.0 * math.sqrt(p * (1.0 - p) / n)


class Battery:
    """Runs the acceptance checks with shared, cached experiment sweeps."""

    EPSILON = 0.2
    DELTA = 0.1
    TRIALS = 200

    def __init__(self, seed=0, trials=None, jobs=1):
        self.seed = seed
        self.trials = trials or self.TRIALS
        self.jobs = jobs
        self._spaces = None
        self._upper = None
        self._phase1 = None
        self._two_point = None

    # -- shared fixtures -----------------------------------------------------

    def spaces(self):
        """The two upper-bound benchmark spaces with their expert rosters.

        The value-ordering experts only exist on spaces with numeric component
        values, so the sparse space swaps Largest for a fixed gamma table.
        """
        if self._spaces is None:
            grid = grid_threshold_space(M=100, c=4, pool=200, seed=self.seed + 12345)
            sparse = sparse_component_space(ell=3, c=3, eps=self.EPSILON)
            table = np.tile(np.arange(1.0, sparse.c + 1.0), (sparse.n_queries, 1))
            self._spaces = [
                ("grid", grid, [("largest", "largest"), ("random", "random"), ("adversarial", "adversarial")]),
                ("sparse", sparse, [("gamma", make_policy("gamma", gamma_table=table)), ("random", "random"), ("adversarial", "adversarial")]),
            ]
        return self._spaces

    def _specs(self):
        for label, space, experts in self.spaces():
            k = stick_with_it_k(space, self.EPSILON, self.DELTA)
            learner = LearnerConfig(kind="stick", k=k, selection="seeded_random")
            for policy_label, policy in experts:
                yield ExperimentSpec(
                    name=f"{label}-{policy_label}",
                    space=space,
                    policy=policy,
                    learner=learner,
                    epsilon=self.EPSILON,
                    delta=self.DELTA,
                    k=k,
                    trials=self.trials,
                    seed=self.seed,
                )

    def upper_sweeps(self):
        if self._upper is None:
            self._upper = [verify_upper_bound(spec, jobs=self.jobs) for spec in self._specs()]
        return self._upper

    def phase1_sweeps(self):
        if self._phase1 is None:
            self._phase1 = [
                verify_phase1_generalization(spec, jobs=self.jobs) for spec in self._specs()
            ]
        return self._phase1

    def two_point_runs(self):
        """(c, eps) -> LowerBoundResult for the Theorem-1 scaling grid."""
        if self._two_point is None:
            configs = [(4, 0.05), (8, 0.05), (16, 0.05), (8, 0.025)]
            self._two_point = {
                cfg: run_two_point_lower_bound(
                    cfg[0], cfg[1], trials=self.trials, seed=self.seed, keep_traces=True
                )
                for cfg in configs
            }
        return self._two_point

    # -- the ten checks --------------------------------------------------------

    def check_1(self):
        """Closed forms vs the single-point special case and Monte Carlo."""
        rng = np.random.default_rng(self.seed)
        vs = np.arange(1, 10) / 10.0
        details = {"max_c1_gap": 0.0, "max_z": 0.0}
        passed = True
        for policy in analytics.POLICY_NAMES:
            gap = float(
                np.abs(analytics.expected_next_threshold(policy, vs, 1) - (vs - vs * vs / 2)).max()
            )
            details["max_c1_gap"] = max(details["max_c1_gap"], gap)
            if gap > EXACT_TOL:
                passed = False
            for c in (1, 4, 8):
                for v in vs:
                    mean, se = analytics.monte_carlo_next_threshold(policy, v, c, 10**5, rng)
                    z = abs(mean - analytics.expected_next_threshold(policy, v, c)) / se
                    details["max_z"] = max(details["max_z"], z)
                    if z > 3.0:
                        passed = False
        return passed, details

    def check_2(self):
        """Small-v ratio limit and the large-v largest-policy dip."""
        details = {}
        passed = True
        for c in (4, 8):
            for policy in analytics.POLICY_NAMES:
                ratio = analytics.reduction_ratio(policy, 1e-3, c)
                details[f"ratio_{policy}_c{c}"] = ratio
                if abs(ratio - c) > 0.02 * c:
                    passed = False
        dip = analytics.reduction_ratio("largest", 0.9, 8)
        details["largest_ratio_0.9_c8"] = dip
        if not dip < 1.0:
            passed = False
        return passed, details

    def check_3(self):
        """Water-filling cap, conservation, and non-negativity on random rows."""
        rng = np.random.default_rng(self.seed)
        cases = 0
        passed = True
        worst_sum_gap = 0.0
        while cases < 10**4:
            c = int(rng.integers(1, 9))
            t = int(rng.integers(1, 40))
            mu_q = float(rng.uniform(0.05, 1.0))
            prev = rng.dirichlet(np.full(c, rng.uniform(0.3, 3.0))) * (t - 1) * mu_q
            cap = t * mu_q / c
            if np.maximum(cap - prev, 0.0).sum() < mu_q:  # infeasible draw
                continue
            w = water_fill(prev, t, mu_q, c)
            cases += 1
            gap = abs(w.sum() - mu_q)
            worst_sum_gap = max(worst_sum_gap, gap)
            if np.any(w < 0) or gap > EXACT_TOL:
                passed = False
            touched = w > 0
            if np.any(prev[touched] + w[touched] > cap + EXACT_TOL):
                passed = False
        return passed, {"cases": cases, "worst_sum_gap": worst_sum_gap}

    def check_4(self):
        """Exact c/2 rounds on the repeated single-query construction."""
        rounds = {c: run_single_query_lower_bound(c) for c in (2, 10, 20)}
        passed = all(rounds[c] == c // 2 for c in rounds)
        return passed, {"rounds": rounds}

    def check_5(self):
        """Mean steps double when c doubles and when epsilon halves."""
        runs = self.two_point_runs()
        means = {cfg: run.mean_steps for cfg, run in runs.items()}
        ratios = {
            "c4->c8": means[(8, 0.05)] / means[(4, 0.05)],
            "c8->c16": means[(16, 0.05)] / means[(8, 0.05)],
            "eps.05->.025": means[(8, 0.025)] / means[(8, 0.05)],
        }
        passed = all(2.0 * 0.85 <= r <= 2.0 * 1.15 for r in ratios.values())
        return passed, {"means": {str(k): v for k, v in means.items()}, "ratios": ratios}

    def check_6(self):
        """Failure rate of the 2N-step guarantee stays within delta + 3 sigma."""
        bound = binomial_band(self.DELTA, self.trials)
        rates = {s.spec.name: float(s.failure_rate) for s in self.upper_sweeps()}
        passed = all(rate <= bound for rate in rates.values())
        return passed, {"bound": bound, "failure_rates": rates}

    def check_7(self):
        """Stick-with-it never switches hypotheses more than 4c times."""
        worst = {}
        passed = True
        for sweep in self.upper_sweeps():
            limit = 4 * sweep.space.c
            worst[sweep.spec.name] = int(sweep.switches.max())
            if sweep.switches.max() > limit:
                passed = False
        return passed, {"max_switches": worst}

    def check_8(self):
        """After N steps every surviving hypothesis generalizes, w.h.p."""
        need = 1.0 - binomial_band(self.DELTA, self.trials)
        rates = {s.spec.name: 1.0 - float(s.failure_rate) for s in self.phase1_sweeps()}
        passed = all(rate >= need for rate in rates.values())
        return passed, {"required": need, "success_rates": rates}

    def check_9(self):
        """Audit every cached trace: deterministic lemma checks must be clean,
        the capped-mass rate holds outside elimination events, and elimination
        events are rare."""
        passed = True
        details = {}
        groups = []
        for (c, eps), run in self.two_point_runs().items():
            reports = _map(
                lambda trace, run=run: audit_trace(run.space, trace, run.policy, run.params),
                run.traces,
                self.jobs,
            )
            groups.append((f"two_point_c{c}_eps{eps}", reports, run.params.eps_prime))
        for prefix, sweeps in (("upper", self.upper_sweeps()), ("phase1", self.phase1_sweeps())):
            for sweep in sweeps:
                groups.append(
                    (
                        f"{prefix}_{sweep.spec.name}",
                        audit_sweep(sweep, jobs=self.jobs),
                        sweep.params.eps_prime,
                    )
                )
        for name, reports, eps_prime in groups:
            violations = sum(r.deterministic_violations() for r in reports)
            low_mass = sum(
                1
                for r in reports
                if not r.lemma3_event and r.corollary7_value < 1.0 - eps_prime - 1e-9
            )
            events = sum(r.lemma3_event for r in reports)
            bound = binomial_band(self.DELTA, len(reports))
            rate = events / len(reports)
            details[name] = {
                "violations": violations,
                "capped_rate_failures": low_mass,
                "lemma3_rate": rate,
            }
            if violations or low_mass or rate > bound:
                passed = False
        return passed, details

    def check_10(self):
        """Sparse-space query complexity and the c-switch requirement."""
        eps = 0.25
        details = {}
        passed = True
        for c in (2, 4):
            target = (1.0 / (2.0 * eps)) * c * 2  # ell = 2
            run = run_sparse_lower_bound(2, c, eps, trials=self.trials, seed=self.seed)
            details[f"c{c}"] = {
                "mean_steps": run.mean_steps,
                "target": target,
                "min_switches": int(run.switch_counts.min()),
            }
            if not target / 2 <= run.mean_steps <= target * 2:
                passed = False
            if run.switch_counts.min() < c:
                passed = False
        return passed, details

    # -- driver ---------------------------------------------------------------

    def run_criterion(self, number):
        fn = getattr(self, f"check_{number}")
        start = time.perf_counter()
        passed, details = fn()
        return CheckResult(number, CRITERIA[number], passed, details, time.perf_counter() - start)

    def run(self, criteria=None, report=print):
        results = []
        for number in criteria or sorted(CRITERIA):
            result = self.run_criterion(number)
            results.append(result)
            if report is not None:
                report(result.line())
        return results
