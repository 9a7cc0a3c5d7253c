"""Finite hypothesis spaces: grid thresholds, the two lower-bound
constructions, and triplet-constrained hierarchies.

A space is a fully enumerated table ``answers[h, q, j]`` of small integer
answer codes, a query distribution ``mu``, and a designated target
hypothesis.  Spaces are immutable after build.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from . import trees
from .errors import MalformedSpecError, SpaceBudgetError

DEFAULT_HYPOTHESIS_BUDGET = 10**6
_TABLE_ENTRY_BUDGET = 5 * 10**7


class HypothesisSpace:
    """Finite indexed family of hypotheses over a finite query set."""

    def __init__(self, kind, answers, mu, target, component_values=None, meta=None):
        answers = np.asarray(answers)
        mu = np.asarray(mu, dtype=np.float64)
        if answers.ndim != 3:
            raise MalformedSpecError("answers must be (H, Q, c)")
        if mu.shape != (answers.shape[1],):
            raise MalformedSpecError("mu must have one weight per query")
        if np.any(mu < 0) or abs(mu.sum() - 1.0) > 1e-12:
            raise MalformedSpecError("mu must be a probability distribution")
        if not 0 <= target < answers.shape[0]:
            raise MalformedSpecError("target hypothesis id out of range")
        self.kind = kind
        self.answers = answers
        self.mu = mu
        self.target = int(target)
        self.component_values = (
            None if component_values is None else np.asarray(component_values, float)
        )
        self.meta = dict(meta or {})
        self._diff = None
        self._diff_flat = None
        self._err = None
        self._errc = None

    # -- shape ------------------------------------------------------------

    @property
    def n_hypotheses(self):
        return self.answers.shape[0]

    @property
    def n_queries(self):
        return self.answers.shape[1]

    @property
    def c(self):
        return self.answers.shape[2]

    def _check_ids(self, h=None, q=None, j=None):
        if h is not None and not 0 <= h < self.n_hypotheses:
            raise IndexError(f"hypothesis id {h} out of range")
        if q is not None and not 0 <= q < self.n_queries:
            raise IndexError(f"query id {q} out of range")
        if j is not None and not 0 <= j < self.c:
            raise IndexError(f"component index {j} out of range")

    # -- answer oracle ----------------------------------------------------

    def answer(self, h, q, j):
        self._check_ids(h, q, j)
        return int(self.answers[h, q, j])

    def evaluate(self, h, q):
        self._check_ids(h, q)
        return tuple(int(v) for v in self.answers[h, q])

    def has_component_values(self):
        return self.component_values is not None

    # -- cached derived tables ---------------------------------------------

    @property
    def diff(self):
        """Boolean (H, Q, c): where each hypothesis disagrees with the target."""
        if self._diff is None:
            self._diff = self.answers != self.answers[self.target]
        return self._diff

    @property
    def diff_flat(self):
        if self._diff_flat is None:
            self._diff_flat = np.ascontiguousarray(
                self.diff.reshape(self.n_hypotheses, -1).astype(np.float64)
            )
        return self._diff_flat

    @property
    def err_vector(self):
        if self._err is None:
            self._err = (self.diff.any(axis=2) * self.mu).sum(axis=1)
        return self._err

    @property
    def errc_vector(self):
        if self._errc is None:
            per_pair = self.mu[None, :, None] / self.c
            self._errc = (self.diff * per_pair).sum(axis=(1, 2))
        return self._errc

    def err(self, h):
        self._check_ids(h)
        return float(self.err_vector[h])

    def err_c(self, h):
        self._check_ids(h)
        return float(self.errc_vector[h])

    # -- consistency -------------------------------------------------------

    def accept_elimination(self, q, displayed):
        """Mask of hypotheses matching all displayed values on query q."""
        displayed = np.asarray(displayed)
        if displayed.shape != (self.c,):
            raise MalformedSpecError("accept must carry exactly c values")
        return (self.answers[:, q, :] == displayed).all(axis=1)

    def correction_elimination(self, q, j, value):
        """Mask of hypotheses whose (q, j) answer equals the corrected value."""
        self._check_ids(q=q, j=j)
        return self.answers[:, q, j] == value

    def consistent_mask(self, transcript):
        mask = np.ones(self.n_hypotheses, dtype=bool)
        for rec in transcript:
            if rec.kind == "accept":
                mask &= self.accept_elimination(rec.query, rec.displayed)
            else:
                mask &= self.correction_elimination(rec.query, rec.component, rec.value)
        return mask

    def consistent_set(self, transcript):
        return [int(h) for h in np.flatnonzero(self.consistent_mask(transcript))]

    # -- answer-value rendering ---------------------------------------------

    def value_token(self, q, j, code):
        if self.kind == "triplet":
            triple = self.meta["triples"][q][j]
            return trees.triplet_token(triple, code, self.meta["names"])
        return int(code)

    def value_code(self, q, j, token):
        if self.kind == "triplet":
            triple = self.meta["triples"][q][j]
            return trees.triplet_code_of_token(triple, token, self.meta["names"])
        code = int(token)
        if code not in (0, 1):
            raise MalformedSpecError(f"label must be 0 or 1, got {token!r}")
        return code

    def hypothesis_label(self, h):
        self._check_ids(h)
        if self.kind in ("grid", "twopoint", "single"):
            return f"v={self.meta['thresholds'][h]:g}"
        if self.kind == "triplet":
            return trees.newick(self.meta["trees"][h], self.meta["names"])
        if self.kind == "sparse":
            return "digits=" + "".join(str(d) for d in self.meta["digits"][h])
        return str(h)

    def describe(self):
        return {
            "kind": self.kind,
            "n_hypotheses": self.n_hypotheses,
            "n_queries": self.n_queries,
            "c": self.c,
            "target": self.target,
            "target_label": self.hypothesis_label(self.target),
        }


def _check_budget(n_hypotheses, n_queries, c, budget):
    if n_hypotheses > budget:
        raise SpaceBudgetError(
            f"|H| = {n_hypotheses} exceeds enumeration budget {budget}"
        )
    if n_hypotheses * n_queries * c > _TABLE_ENTRY_BUDGET:
        raise SpaceBudgetError("answer table would exceed the entry budget")


# -- threshold spaces -------------------------------------------------------


def _threshold_space(kind, thresholds, points, mu, target_value, meta=None):
    thresholds = np.asarray(thresholds, float)
    points = np.asarray(points, float)
    answers = (points[None, :, :] > thresholds[:, None, None]).astype(np.int8)
    target = int(np.argmin(np.abs(thresholds - target_value)))
    if abs(thresholds[target] - target_value) > 1e-12:
        raise MalformedSpecError(f"target threshold {target_value} not on the grid")
    full_meta = {"thresholds": thresholds, "points": points}
    full_meta.update(meta or {})
    return HypothesisSpace(
        kind, answers, mu, target, component_values=points, meta=full_meta
    )


def grid_threshold_space(
    M,
    c,
    queries=None,
    pool=0,
    seed=0,
    mu=None,
    target=0.0,
    budget=DEFAULT_HYPOTHESIS_BUDGET,
):
    """Thresholds {0, 1/M, ..., 1} on [0,1] with c-point queries.

    Queries are either an explicit list of c-tuples or, with pool > 0, a
    seeded i.i.d.-uniform pool of that many queries (uniform mu).
    """
    if M < 1 or c < 1:
        raise MalformedSpecError("need M >= 1 and c >= 1")
    if queries is None:
        if pool < 1:
            raise MalformedSpecError("give either an explicit query list or pool >= 1")
        rng = np.random.default_rng(seed)
        points = rng.random((pool, c))
    else:
        points = np.asarray(queries, float)
        if points.ndim != 2 or points.shape[1] != c:
            raise MalformedSpecError("queries must be c-tuples of points")
    n_q = points.shape[0]
    _check_budget(M + 1, n_q, c, budget)
    if mu is None:
        mu = np.full(n_q, 1.0 / n_q)
    kind = "single" if n_q == 1 else "grid"
    return _threshold_space(
        kind, np.arange(M + 1) / M, points, mu, target, meta={"M": M}
    )


def two_point_threshold_space(c, eps, budget=DEFAULT_HYPOTHESIS_BUDGET):
    """Two-query construction: a rare low query and a common high query."""
    if not 0 < eps < 0.5:
        raise MalformedSpecError("need 0 < eps < 1/2")
    if c < 1:
        raise MalformedSpecError("need c >= 1")
    _check_budget(2 * c + 1, 2, c, budget)
    i = np.arange(1, c + 1)
    low = i / (2 * c)
    high = 0.5 + i / (2 * c)
    points = np.stack([low, high])
    mu = np.array([2 * eps, 1 - 2 * eps])
    return _threshold_space(
        "twopoint", np.arange(2 * c + 1) / (2 * c), points, mu, 0.0, meta={"eps": eps}
    )


def single_query_space(c):
    """One repeated query (1/c, ..., 1), thresholds on the same grid."""
    return grid_threshold_space(M=c, c=c, queries=[np.arange(1, c + 1) / c])


# -- sparse component space ---------------------------------------------------


def sparse_component_space(ell, c, eps, budget=DEFAULT_HYPOTHESIS_BUDGET):
    """All-zero target; hypotheses place at most one 1 per special query.

    The first `ell` of floor(ell / (2*eps)) uniform queries are special; the
    class has (c+1)**ell members.
    """
    if ell < 1 or c < 1:
        raise MalformedSpecError("need ell >= 1 and c >= 1")
    if not 0 < eps <= 0.5:
        raise MalformedSpecError("need 0 < eps <= 1/2")
    n_q = int(np.floor(ell / (2 * eps)))
    if n_q < ell:
        raise MalformedSpecError("floor(ell / (2*eps)) must be at least ell")
    n_h = (c + 1) ** ell
    _check_budget(n_h, n_q, c, budget)
    digits = (np.arange(n_h)[:, None] // (c + 1) ** np.arange(ell)[None, :]) % (c + 1)
    answers = np.zeros((n_h, n_q, c), dtype=np.int8)
    for q in range(ell):
        for j in range(c):
            answers[:, q, j] = digits[:, q] == j + 1
    mu = np.full(n_q, 1.0 / n_q)
    ones_count = (digits > 0).sum(axis=1)
    meta = {"ell": ell, "eps": eps, "digits": digits, "ones_count": ones_count}
    return HypothesisSpace("sparse", answers, mu, target=0, meta=meta)


# -- triplet tree space -------------------------------------------------------


def _double_factorial_trees(n):
    count = 1
    for k in range(1, n):
        count *= 2 * k - 1
    return count


def triplet_tree_space(n, m, target=0, names=None, budget=DEFAULT_HYPOTHESIS_BUDGET):
    """All rooted binary trees on n leaves; queries are m-leaf subsets and
    components are the leaf triples of each subset."""
    if not 3 <= m <= n:
        raise MalformedSpecError("need 3 <= m <= n")
    n_h = _double_factorial_trees(n)
    n_q = len(list(combinations(range(n), m)))
    c = len(list(combinations(range(m), 3)))
    _check_budget(n_h, n_q, c, budget)
    if names is None:
        names = [chr(ord("a") + i) if n <= 26 else f"L{i}" for i in range(n)]
    all_trees = trees.enumerate_trees(n)
    queries = list(combinations(range(n), m))
    triples = [trees.all_triples(q) for q in queries]
    answers = np.zeros((n_h, n_q, c), dtype=np.int8)
    for h, tree in enumerate(all_trees):
        paths = trees.leaf_paths(tree)
        for qi, trips in enumerate(triples):
            for ci, trip in enumerate(trips):
                answers[h, qi, ci] = trees.triplet_code(paths, *trip)
    mu = np.full(n_q, 1.0 / n_q)
    if isinstance(target, str):
        want = trees.parse_newick(target, names)
        target = all_trees.index(want)
    meta = {
        "trees": all_trees,
        "names": names,
        "queries": queries,
        "triples": triples,
        "m": m,
    }
    return HypothesisSpace("triplet", answers, mu, target=int(target), meta=meta)


# -- spec parsing --------------------------------------------------------------


def _coerce(text):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_space_spec(spec):
    """Parse "kind:key=value,..." into a spec dict."""
    if isinstance(spec, dict):
        return dict(spec)
    kind, _, rest = spec.partition(":")
    out = {"kind": kind.strip()}
    if rest.strip():
        for item in rest.split(","):
            key, _, value = item.partition("=")
            if not _:
                raise MalformedSpecError(f"bad space spec item {item!r}")
            out[key.strip()] = _coerce(value.strip())
    return out


def build_space(spec, budget=DEFAULT_HYPOTHESIS_BUDGET):
    """Build a space from a spec string or dict; see parse_space_spec."""
    params = parse_space_spec(spec)
    kind = params.pop("kind", None)
    try:
        if kind == "grid":
            return grid_threshold_space(budget=budget, **params)
        if kind == "single":
            return single_query_space(**params)
        if kind == "twopoint":
            return two_point_threshold_space(budget=budget, **params)
        if kind == "sparse":
            if "l" in params:
                params["ell"] = params.pop("l")
            return sparse_component_space(budget=budget, **params)
        if kind == "triplet":
            return triplet_tree_space(budget=budget, **params)
    except TypeError as exc:
        raise MalformedSpecError(f"bad parameters for space kind {kind!r}: {exc}")
    raise MalformedSpecError(f"unknown space kind {kind!r}")
