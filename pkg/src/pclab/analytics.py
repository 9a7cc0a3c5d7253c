"""Closed-form threshold-learning curves and their Monte-Carlo cross-checks.

All formulas concern the continuous threshold class on [0,1] with target 0
and c i.i.d. uniform points per query, under the "smallest" / "largest"
correction policies.  (1-v)^c is evaluated as exp(c*log1p(-v)) so the
small-v ratio limits stay accurate up to large c.
"""

from __future__ import annotations

import numpy as np

from .errors import MalformedSpecError

POLICY_NAMES = ("smallest", "largest")


def _pow1m(v, c):
    """(1 - v)**c, stable for small v."""
    v = np.asarray(v, dtype=np.float64)
    with np.errstate(divide="ignore"):
        out = np.exp(c * np.log1p(-v))
    return np.where(v >= 1.0, 0.0, out)


def _check_policy(policy):
    if policy not in POLICY_NAMES:
        raise MalformedSpecError(f"unknown policy {policy!r}")


def expected_next_threshold(policy, v_t, c):
    """E[V_{t+1} | V_t = v_t] under the named correction policy."""
    _check_policy(policy)
    v = np.asarray(v_t, dtype=np.float64)
    if policy == "largest":
        out = v - (1.0 - _pow1m(v, c) * (1.0 + c * v)) / (c + 1)
    else:
        out = (1.0 - _pow1m(v, c + 1)) / (c + 1)
    return out if out.ndim else float(out)

def survival_probability(policy, v, v_t, c):
    """Pr(V_{t+1} > v | V_t = v_t) for 0 <= v <= v_t."""
    _check_policy(policy)
    v = np.asarray(v, dtype=np.float64)
    if policy == "largest":
        out = _pow1m(v_t, c) + (1.0 - _pow1m(v_t - v, c))
    else:
        out = _pow1m(v, c)
    return out if out.ndim else float(out)


def reduction_ratio(policy, v_t, c):
    """Expected one-step error reduction relative to a single-point query.

    The single-point baseline reduction at v_t is v_t^2 / 2.
    """
    v = np.asarray(v_t, dtype=np.float64)
    if np.any(v <= 0):
        raise MalformedSpecError("reduction ratio is undefined at v_t = 0")
    out = (v - expected_next_threshold(policy, v, c)) / (v * v / 2.0)
    return out if out.ndim else float(out)


def monte_carlo_next_threshold(policy, v_t, c, n_samples, rng):
    """Simulation oracle for expected_next_threshold: (mean, standard_error)."""
    _check_policy(policy)
    if n_samples < 1:
        raise MalformedSpecError("need n_samples >= 1")
    x = rng.random((n_samples, c))
    wrong = x <= v_t  # proposed label 0, true label 1
    any_wrong = wrong.any(axis=1)
    if policy == "largest":
        corrected = np.where(wrong, x, -np.inf).max(axis=1)
    else:
        corrected = np.where(wrong, x, np.inf).min(axis=1)
    updated = np.where(any_wrong, corrected, v_t)
    mean = float(updated.mean())
    se = float(updated.std(ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else 0.0
    return mean, se


def integrated_survival(policy, v_t, c, n_points=10_000):
    """Trapezoid integral of the survival curve over [0, v_t]; should equal
    expected_next_threshold, which is how the closed forms were derived."""
    grid = np.linspace(0.0, v_t, n_points)
    return float(np.trapezoid(survival_probability(policy, grid, v_t, c), grid))


def curve_rows(cs, policies, grid_size=512):
    """Rows (v, c, policy, expected_next, reduction, ratio) for CSV output."""
    vs = np.linspace(0.0, 1.0, grid_size + 1)[1:]  # (0, 1], endpoint included
    rows = []
    for c in cs:
        for policy in policies:
            expected = expected_next_threshold(policy, vs, c)
            ratio = reduction_ratio(policy, vs, c)
            for v, e, r in zip(vs, expected, ratio):
                rows.append(
                    {
                        "v": float(v),
                        "c": c,
                        "policy": policy,
                        "expected_next": float(e),
                        "reduction": float(v - e),
                        "ratio": float(r),
                    }
                )
    return rows
