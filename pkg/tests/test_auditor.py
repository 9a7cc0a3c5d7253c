"""Water-filling hand traces, vectorized agreement, and full-trace audits."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pclab.auditor import (
    AuditParams,
    audit_trace,
    capped_mass,
    oversampled_set,
    step_weights,
    water_fill,
    water_fill_rows,
)
from pclab.errors import AuditIntegrityError
from pclab.experts import make_policy
from pclab.learners import LearnerConfig, RunParameters, run_episode
from pclab.spaces import grid_threshold_space, single_query_space


class TestWaterFillHandTraces:
    def test_symmetric_first_fill(self):
        assert np.allclose(water_fill([0.0, 0.0], 1, 0.5, 2), [0.25, 0.25])

    def test_fills_ascending_entries_first(self):
        w = water_fill([0.1, 0.4], 2, 0.5, 2)
        assert np.allclose(w, [0.4, 0.1])
        assert np.allclose(np.array([0.1, 0.4]) + w, [0.5, 0.5])

    def test_over_cap_entry_untouched(self):
        w = water_fill([0.5, 0.1, 0.0], 3, 0.3, 3)
        assert np.allclose(w, [0.0, 0.0, 0.3])

    def test_rejects_bad_previous_row(self):
        with pytest.raises(AuditIntegrityError):
            water_fill([0.1, -0.1], 1, 0.5, 2)
        with pytest.raises(AuditIntegrityError):
            water_fill([0.3, 0.3], 2, 0.5, 2)  # does not sum to (t-1) mu

    def test_always_feasible_given_mass_constraint(self):
        # any over-cap excess frees at least as much room elsewhere, so a row
        # summing to (t-1) mu always absorbs mu; check a lopsided case
        w = water_fill([0.45, 0.05], 2, 0.5, 2)
        assert abs(w.sum() - 0.5) < 1e-12


class TestWaterFillProperties:
    @given(
        st.integers(min_value=1, max_value=6),
        st.integers(min_value=1, max_value=25),
        st.floats(min_value=0.05, max_value=1.0),
        st.randoms(use_true_random=False),
    )
    @settings(max_examples=300, deadline=None)
    def test_cap_conservation_nonnegativity(self, c, t, mu_q, pyrandom):
        rng = np.random.default_rng(pyrandom.getrandbits(64))
        prev = rng.dirichlet(np.ones(c)) * (t - 1) * mu_q
        cap = t * mu_q / c
        if np.maximum(cap - prev, 0.0).sum() < mu_q:
            return  # infeasible history; water_fill is allowed to refuse it
        w = water_fill(prev, t, mu_q, c)
        assert np.all(w >= 0)
        assert abs(w.sum() - mu_q) < 1e-12
        touched = w > 0
        assert np.all(prev[touched] + w[touched] <= cap + 1e-12)

    @given(
        st.integers(min_value=1, max_value=6),
        st.integers(min_value=1, max_value=25),
        st.randoms(use_true_random=False),
    )
    @settings(max_examples=300, deadline=None)
    def test_vectorized_matches_reference_loop(self, c, t, pyrandom):
        rng = np.random.default_rng(pyrandom.getrandbits(64))
        mu = rng.uniform(0.05, 1.0, size=5)
        rows = np.stack(
            [rng.dirichlet(np.ones(c)) * (t - 1) * m for m in mu]
        )
        cap = t * mu / c
        feasible = np.maximum(cap[:, None] - rows, 0.0).sum(axis=1) >= mu
        got = water_fill_rows(rows, t, mu)
        for i in np.flatnonzero(feasible):
            want = water_fill(rows[i], t, mu[i], c)
            assert np.allclose(got[i], want, atol=1e-12)


class TestStepWeights:
    def test_correct_hypothesis_water_fills_everywhere(self, grid_pool):
        W = np.zeros((grid_pool.n_queries, grid_pool.c))
        w = step_weights(grid_pool, grid_pool.target, make_policy("largest"), 1, W)
        assert np.allclose(w.sum(axis=1), grid_pool.mu)
        assert np.allclose(w, water_fill_rows(W, 1, grid_pool.mu))

    def test_one_hot_gamma_concentrates_mass(self):
        space = grid_threshold_space(M=4, c=2, queries=[(0.3, 0.8)])
        h = 3  # threshold 0.75: only the 0.8 point is mislabeled... check below
        wrong = np.flatnonzero(space.diff[h, 0])
        assert wrong.size == 1
        W = np.zeros((1, 2))
        w = step_weights(space, h, make_policy("largest"), 1, W)
        assert w[0, wrong[0]] == pytest.approx(space.mu[0])
        assert w.sum() == pytest.approx(space.mu[0])

    def test_gamma_table_products(self):
        space = grid_threshold_space(
            M=4, c=2, queries=[(0.3, 0.8), (0.1, 0.2)], mu=[0.2, 0.8]
        )
        h = space.n_hypotheses - 1  # threshold 1: everything mislabeled
        policy = make_policy("gamma", gamma_table=[[0.7, 0.3], [0.5, 0.5]])
        w = step_weights(space, h, policy, 1, np.zeros((2, 2)))
        assert np.allclose(w[0], [0.14, 0.06])


class TestOversampling:
    def test_empty_at_start(self, grid_pool):
        W = np.zeros((grid_pool.n_queries, grid_pool.c))
        assert not oversampled_set(W, 10.0, grid_pool.mu).any()

    def test_strict_inequality_at_threshold(self):
        mu = np.array([0.5])
        W = np.array([[2.0 * 0.5]])  # exactly tau * mu with tau = 2
        assert not oversampled_set(W, 2.0, mu).any()
        assert oversampled_set(W + 1e-6, 2.0, mu).any()

    def test_capped_mass(self):
        mu = np.array([0.5])
        W = np.array([[2.0, 0.1]])
        capped, total = capped_mass(W, 2.0, mu)
        assert capped[0, 0] == pytest.approx(1.0)  # capped at tau mu
        assert total == pytest.approx(1.1)


class TestAuditTrace:
    def _run_and_audit(self, space, policy_name, seed=0, learner=None):
        params = RunParameters.for_space(space, 0.2, 0.1)
        policy = make_policy(policy_name)
        result, episode = run_episode(
            space, policy, params, learner=learner, seed=seed, record_trace=True
        )
        report = audit_trace(space, episode.trace, policy, params)
        return result, report

    @pytest.mark.parametrize("policy", ["largest", "random", "adversarial"])
    def test_conforming_runs_have_zero_violations(self, grid_pool, policy):
        result, report = self._run_and_audit(grid_pool, policy)
        assert report.steps == result.steps_used
        assert report.deterministic_violations() == 0

    def test_single_query_hand_trace(self):
        """c=2 grid {0, 0.5, 1} with the glaring expert: two corrections walk
        the threshold down to the target, then step 3 is an accept whose mass
        is water-filled (1/2 per component)."""
        space = single_query_space(2)
        params = RunParameters.for_space(space, 0.5, 0.1)
        learner = LearnerConfig(selection="threshold_min")
        policy = make_policy("glaring")
        result, episode = run_episode(
            space, policy, params, learner=learner, seed=0,
            record_trace=True, max_steps=3, stop_on_goodness=False,
        )
        emitted = []
        report = audit_trace(space, episode.trace, policy, params, emit=emitted.append)
        assert report.deterministic_violations() == 0
        assert [e["accepted"] for e in emitted] == [0, 0, 1]
        assert [e["w_bad"] for e in emitted] == [1.0, 1.0, 0.0]
        # capped cumulative mass advances by a full unit each step
        assert [round(e["capped_mass"], 9) for e in emitted] == [1.0, 2.0, 3.0]

    def test_tampered_accept_flag_detected(self, grid_pool):
        params = RunParameters.for_space(grid_pool, 0.2, 0.1)
        policy = make_policy("largest")
        _, episode = run_episode(
            grid_pool, policy, params, seed=0, record_trace=True
        )
        trace = episode.trace
        trace.accepted[0] = not trace.accepted[0]
        with pytest.raises(AuditIntegrityError):
            audit_trace(grid_pool, trace, policy, params)

    def test_corollary7_on_full_run(self, grid_pool):
        _, report = self._run_and_audit(grid_pool, "largest")
        if not report.lemma3_event:
            assert report.corollary7_value >= 1 - 0.1 - 1e-9  # eps' = 0.1

    def test_report_dict_shape(self, grid_pool):
        _, report = self._run_and_audit(grid_pool, "random")
        d = report.to_dict()
        assert {"steps", "lemma2_violations", "lemma4_violations", "phase2"} <= set(d)


class TestAuditParams:
    def test_from_run(self):
        params = RunParameters(0.2, 0.1, 101, 4)
        audit = AuditParams.from_run(params)
        assert audit.tau == pytest.approx(params.tau)
        assert audit.ell == pytest.approx(params.ell)
