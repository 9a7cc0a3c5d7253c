"""pclab: a simulation and audit laboratory for learning from partial
corrections, where an expert fixes one wrong component of each displayed
answer and the learner tracks the shrinking version space."""

from .errors import (
    AuditIntegrityError,
    EmptyVersionSpaceError,
    InconsistentFeedbackError,
    MalformedSpecError,
    PclabError,
    ProtocolViolationError,
    SpaceBudgetError,
    UnsupportedPolicyError,
)
from .protocol import (
    Transcript,
    accept_record,
    correct_record,
    err,
    err_c,
    evaluate,
    is_consistent,
    transcript_from_jsonl,
    transcript_to_jsonl,
)
from .spaces import (
    HypothesisSpace,
    build_space,
    grid_threshold_space,
    single_query_space,
    sparse_component_space,
    triplet_tree_space,
    two_point_threshold_space,
)
from .experts import gamma_of, make_policy
from .learners import (
    Episode,
    LearnerConfig,
    RunParameters,
    TrialResult,
    goodness_check,
    run_episode,
    run_step,
    select_hypothesis,
    stick_with_it_k,
)
from .auditor import (
    AuditParams,
    AuditReport,
    audit_trace,
    capped_mass,
    oversampled_set,
    step_weights,
    water_fill,
    water_fill_rows,
)

__version__ = "0.1.0"
