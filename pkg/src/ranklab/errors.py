"""Exception hierarchy shared by every ranklab module."""

from __future__ import annotations


class RankLabError(Exception):
    """Base class for all ranklab errors."""


class ForestError(RankLabError, ValueError):
    pass


class CycleError(ForestError):
    """Two attachments lie in the same component."""


class UnknownVertex(ForestError, KeyError):
    pass


class PendingVertexError(ForestError):
    """An unlabeled vertex is already waiting for its label."""


class UnlabeledVertex(ForestError):
    pass


class SizeLimit(RankLabError):
    """A generator or brute-force routine would exceed its configured cap."""


class IllegalMove(RankLabError):
    pass


class InvalidLabel(RankLabError):
    pass


class StrategyError(RankLabError):
    """A strategy produced an illegal move or label.

    ``transcript`` holds the game up to (not including) the offending round.
    """

    def __init__(self, message: str, *, round: int | None = None, transcript=None):
        super().__init__(message)
        self.round = round
        self.transcript = transcript


class EmptyTranscript(RankLabError):
    pass


class CaseError(RankLabError):
    pass


class NoCaseError(CaseError):
    pass


class MultiCaseError(CaseError):
    pass


class ExistenceError(RankLabError):
    """The per-case smallest completing label does not exist."""


class ClassViolation(RankLabError):
    pass


class BudgetExceeded(RankLabError):
    def __init__(self, message: str, *, nodes: int = 0):
        super().__init__(message)
        self.nodes = nodes
