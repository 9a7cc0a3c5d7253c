"""Exception types shared across the package."""


class PclabError(Exception):
    """Base class for all package errors."""


class SpaceBudgetError(PclabError):
    """A space spec would enumerate more hypotheses than the configured cap."""


class MalformedSpecError(PclabError, ValueError):
    """A space / experiment / policy spec could not be parsed or validated."""


class InconsistentFeedbackError(PclabError):
    """Two feedback records force different values at the same (query, component)."""


class ProtocolViolationError(PclabError):
    """A simulated expert corrected a component on which the hypothesis was right."""


class UnsupportedPolicyError(PclabError):
    """Policy needs structure (e.g. ordered component values) the space lacks."""


class EmptyVersionSpaceError(PclabError):
    """No hypothesis is consistent with the transcript; upstream protocol violation."""


class AuditIntegrityError(PclabError):
    """A trace handed to the auditor is malformed or violates a precondition."""
