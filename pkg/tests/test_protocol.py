"""Feedback records, transcripts, consistency, and JSONL serialization."""

import pytest

from pclab.errors import InconsistentFeedbackError, MalformedSpecError
from pclab.protocol import (
    Transcript,
    accept_record,
    correct_record,
    is_consistent,
    replay_states,
    transcript_from_jsonl,
    transcript_to_jsonl,
)


class TestRecords:
    def test_accept_carries_all_values(self):
        rec = accept_record(1, 0, (0, 1))
        assert rec.kind == "accept" and rec.displayed == (0, 1)

    def test_correct_carries_one_pair(self):
        rec = correct_record(1, 0, 1, 1)
        assert (rec.component, rec.value) == (1, 1)

    def test_malformed_records(self):
        from pclab.protocol import FeedbackRecord

        with pytest.raises(MalformedSpecError):
            FeedbackRecord(1, 0, "accept")  # missing displayed values
        with pytest.raises(MalformedSpecError):
            FeedbackRecord(1, 0, "correct", component=1)  # missing value
        with pytest.raises(MalformedSpecError):
            FeedbackRecord(1, 0, "shrug")


class TestTranscript:
    def test_steps_strictly_increase(self):
        transcript = Transcript([correct_record(1, 0, 0, 1)])
        with pytest.raises(InconsistentFeedbackError):
            transcript.append(correct_record(1, 0, 1, 1))

    def test_contradiction_rejected(self):
        transcript = Transcript([correct_record(1, 0, 0, 1)])
        with pytest.raises(InconsistentFeedbackError):
            transcript.append(correct_record(2, 0, 0, 0))

    def test_accept_forces_all_components(self):
        transcript = Transcript([accept_record(1, 0, (0, 1))])
        with pytest.raises(InconsistentFeedbackError):
            transcript.append(correct_record(2, 0, 1, 0))

    def test_repeat_of_same_value_allowed(self):
        transcript = Transcript([correct_record(1, 0, 0, 1)])
        transcript.append(correct_record(2, 0, 0, 1))
        assert len(transcript) == 2

    def test_conflict_with(self):
        transcript = Transcript([correct_record(1, 0, 0, 1)])
        assert transcript.conflict_with(0, 0, 0) == 1
        assert transcript.conflict_with(0, 0, 1) is None
        assert transcript.conflict_with(0, 1, 0) is None


class TestConsistency:
    def test_empty_transcript(self, grid5):
        assert all(
            is_consistent(grid5, h, Transcript()) for h in range(grid5.n_hypotheses)
        )

    def test_direct_contradiction(self, grid5):
        transcript = Transcript([correct_record(1, 0, 1, 1)])
        # threshold 1 labels point 1.0 as 0, contradicting the correction
        h_one = grid5.n_hypotheses - 1
        assert not is_consistent(grid5, h_one, transcript)
        assert is_consistent(grid5, grid5.target, transcript)

    def test_accept_full_match(self, grid5):
        transcript = Transcript([accept_record(1, 0, (1, 1))])
        assert is_consistent(grid5, grid5.target, transcript)


class TestSerialization:
    def test_round_trip(self, grid5):
        transcript = Transcript(
            [correct_record(1, 0, 0, 1), accept_record(2, 0, (1, 1))]
        )
        text = transcript_to_jsonl(grid5, transcript)
        back = transcript_from_jsonl(grid5, text)
        assert [r.kind for r in back] == ["correct", "accept"]
        assert back.records[0].value == 1
        assert back.records[1].displayed == (1, 1)

    def test_triplet_tokens_round_trip(self, triplet44):
        truth = triplet44.answers[triplet44.target]
        transcript = Transcript([correct_record(1, 0, 2, int(truth[0, 2]))])
        text = transcript_to_jsonl(triplet44, transcript)
        assert "|" in text  # human-readable topology tokens on the wire
        back = transcript_from_jsonl(triplet44, text)
        assert back.records[0].value == int(truth[0, 2])

    def test_blank_and_comment_lines_skipped(self, grid5):
        text = "# header\n\n" + transcript_to_jsonl(
            grid5, Transcript([correct_record(1, 0, 0, 1)])
        )
        assert len(transcript_from_jsonl(grid5, text)) == 1


class TestReplay:
    def test_states_shrink_to_consistent_set(self, grid5):
        transcript = Transcript([correct_record(1, 0, 0, 1)])
        states = list(replay_states(grid5, transcript))
        step, size, hypothesis = states[-1]
        assert step == 1
        assert size == int(grid5.consistent_mask(transcript).sum())
        assert hypothesis == grid5.consistent_set(transcript)[0]
