"""Interaction protocol core: feedback records, transcripts, consistency,
and the two error metrics.

A transcript is the sole source of consistency constraints.  Accept records
carry all c displayed values so a transcript is self-contained and
replayable without the hypothesis that emitted it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InconsistentFeedbackError, MalformedSpecError

ACCEPT = "accept"
CORRECT = "correct"


@dataclass(frozen=True)
class FeedbackRecord:
    """One unit of expert feedback: a full accept or a single correction."""

    step: int
    query: int
    kind: str
    displayed: tuple | None = None  # accept only: all c displayed values
    component: int | None = None  # correct only
    value: int | None = None  # correct only

    def __post_init__(self):
        if self.kind == ACCEPT:
            if self.displayed is None or self.component is not None:
                raise MalformedSpecError("accept carries displayed values only")
        elif self.kind == CORRECT:
            if self.component is None or self.value is None or self.displayed is not None:
                raise MalformedSpecError("correct carries one (component, value) pair")
        else:
            raise MalformedSpecError(f"unknown feedback kind {self.kind!r}")


def accept_record(step, query, displayed):
    return FeedbackRecord(step, int(query), ACCEPT, displayed=tuple(int(v) for v in displayed))


def correct_record(step, query, component, value):
    return FeedbackRecord(step, int(query), CORRECT, component=int(component), value=int(value))


class Transcript:
    """Ordered feedback records with contradiction rejection at append time."""

    def __init__(self, records=()):
        self.records = []
        self._forced = {}  # (query, component) -> value
        for rec in records:
            self.append(rec)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def _force(self, q, j, value, step):
        old = self._forced.get((q, j))
        if old is not None and old != value:
            raise InconsistentFeedbackError(
                f"step {step} forces ({q},{j})={value} but earlier feedback forced {old}"
            )
        self._forced[(q, j)] = value

    def append(self, rec):
        if self.records and rec.step <= self.records[-1].step:
            raise InconsistentFeedbackError("step numbers must be strictly increasing")
        if rec.kind == ACCEPT:
            for j, value in enumerate(rec.displayed):
                self._force(rec.query, j, value, rec.step)
        else:
            self._force(rec.query, rec.component, rec.value, rec.step)
        self.records.append(rec)

    def forced_value(self, q, j):
        return self._forced.get((q, j))

    def conflict_with(self, q, j, value):
        """Value an existing record forces at (q, j) if it contradicts `value`."""
        old = self._forced.get((q, j))
        return old if old is not None and old != value else None


# -- operations ---------------------------------------------------------------


def evaluate(space, h, q):
    """The full displayed answer h(q) = (h(q,1), ..., h(q,c))."""
    return space.evaluate(h, q)


def is_consistent(space, h, transcript):
    for rec in transcript:
        if rec.kind == ACCEPT:
            if space.evaluate(h, rec.query) != rec.displayed:
                return False
        elif space.answer(h, rec.query, rec.component) != rec.value:
            return False
    return True


def err(space, h):
    """Whole-query error: mu-mass of queries where h disagrees with the target."""
    return space.err(h)


def err_c(space, h):
    """Per-component error: mu(q)/c summed over disagreeing (q, j) pairs."""
    return space.err_c(h)


def replay_states(space, transcript):
    """Deterministic replay: after each record, the version-space size and the
    lowest-indexed consistent hypothesis (None once the space empties)."""
    mask = np.ones(space.n_hypotheses, dtype=bool)
    for rec in transcript:
        if rec.kind == ACCEPT:
            mask &= space.accept_elimination(rec.query, rec.displayed)
        else:
            mask &= space.correction_elimination(rec.query, rec.component, rec.value)
        surviving = np.flatnonzero(mask)
        h = int(surviving[0]) if surviving.size else None
        yield rec.step, int(mask.sum()), h


# -- serialization --------------------------------------------------------------


def transcript_to_jsonl(space, transcript):
    lines = []
    for rec in transcript:
        if rec.kind == ACCEPT:
            body = {
                "step": rec.step,
                "query": rec.query,
                "kind": ACCEPT,
                "displayed": [
                    space.value_token(rec.query, j, v) for j, v in enumerate(rec.displayed)
                ],
            }
        else:
            body = {
                "step": rec.step,
                "query": rec.query,
                "kind": CORRECT,
                "component": rec.component,
                "value": space.value_token(rec.query, rec.component, rec.value),
            }
        lines.append(json.dumps(body))
    return "\n".join(lines) + ("\n" if lines else "")


def transcript_from_jsonl(space, text):
    transcript = Transcript()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        body = json.loads(line)
        if body["kind"] == ACCEPT:
            displayed = tuple(
                space.value_code(body["query"], j, v)
                for j, v in enumerate(body["displayed"])
            )
            transcript.append(accept_record(body["step"], body["query"], displayed))
        else:
            value = space.value_code(body["query"], body["component"], body["value"])
            transcript.append(
                correct_record(body["step"], body["query"], body["component"], value)
            )
    return transcript
