"""Preference oracles: simulated scorers and the human-answer bridge.

A preference oracle answers pairwise rule comparisons with +1 (first rule
preferred), -1 (second preferred), or 0 (indifferent). Simulated oracles
derive answers from a scalar score per rule, so their answers are
antisymmetric and transitive by construction. The human "oracle" is a
thread-safe handoff: the learning loop posts a query and blocks until some
other thread submits the answer.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .choquet import MobiusCapacity
from .corpus import Rule, TransactionDatabase
from .measures import MeasureKind, compute_measure, surprise_score

VALID_ANSWERS = (-1, 0, 1)


class OracleKind(str, enum.Enum):
    PHI = "phi"
    SURPRISE = "surprise"
    HIDDEN_CHOQUET = "hidden_choquet"
    HUMAN = "human"


@dataclass(frozen=True)
class ScoreOracle:
    """Answers pairwise queries by comparing per-rule scores exactly.

    Scores are compared without a tolerance: equal floats mean indifference,
    and reproducible inputs give reproducible ties.
    """

    kind: OracleKind
    score_fn: Callable[[Rule], float]

    def score(self, rule: Rule) -> float:
        return float(self.score_fn(rule))

    def answer(self, r_i: Rule, r_j: Rule) -> int:
        s_i, s_j = self.score(r_i), self.score(r_j)
        if s_i > s_j:
            return 1
        if s_i < s_j:
            return -1
        return 0


def phi_oracle() -> ScoreOracle:
    """Oracle ranking rules by the phi correlation of their 2x2 table."""
    return ScoreOracle(OracleKind.PHI, lambda rule: compute_measure(rule.counts, MeasureKind.PHI))


def surprise_oracle(db: TransactionDatabase) -> ScoreOracle:
    """Oracle ranking rules by log2 of observed vs. independence frequency."""
    return ScoreOracle(OracleKind.SURPRISE, lambda rule: surprise_score(db, rule))


def hidden_choquet_oracle(
    capacity: MobiusCapacity,
    rules: Sequence[Rule],
    features: np.ndarray,
) -> ScoreOracle:
    """Oracle scoring rules with a hidden capacity over the learner's features.

    ``features`` must be the same normalized matrix the learner sees (one row
    per rule, in order), which makes the learning problem realizable: the
    hidden weights lie inside the initial version space.
    """
    features = np.asarray(features, dtype=float)
    if features.shape[0] != len(rules):
        raise ValueError("one feature row per rule required")
    scores = capacity.scores(features)
    index_of = {rule: i for i, rule in enumerate(rules)}
    if len(index_of) != len(rules):
        raise ValueError("duplicate rules cannot be scored unambiguously")

    def score(rule: Rule) -> float:
        try:
            return float(scores[index_of[rule]])
        except KeyError:
            raise ValueError(f"rule {rule.label()} is not part of this oracle's rule set") from None

    return ScoreOracle(OracleKind.HIDDEN_CHOQUET, score)


class BridgeClosed(RuntimeError):
    """Raised by waiters when the bridge shuts down mid-session."""


class AnswerRejected(ValueError):
    """Submitted answer does not match the pending query's iteration."""


@dataclass(frozen=True)
class PendingQuery:
    pair: tuple[int, int]
    iteration: int


class HumanBridge:
    """Single-producer/single-consumer handoff for one interactive session.

    The learner thread calls :meth:`post_query` then :meth:`await_answer`;
    an API thread calls :meth:`submit_answer`. At most one query is pending
    at a time, and an answer is accepted exactly once per iteration number —
    re-submissions and answers for past iterations are rejected.
    """

    def __init__(self) -> None:
        self._cond = threading.Condition()
        self._pending: PendingQuery | None = None
        self._answer: int | None = None
        self._closed = False

    @property
    def pending(self) -> PendingQuery | None:
        with self._cond:
            return self._pending

    @property
    def closed(self) -> bool:
        with self._cond:
            return self._closed

    def post_query(self, pair: tuple[int, int], iteration: int) -> None:
        with self._cond:
            if self._closed:
                raise BridgeClosed("bridge is closed")
            if self._pending is not None:
                raise RuntimeError("a query is already pending")
            self._pending = PendingQuery((int(pair[0]), int(pair[1])), int(iteration))
            self._answer = None
            self._cond.notify_all()

    def submit_answer(self, iteration: int, value: int) -> None:
        if value not in VALID_ANSWERS:
            raise ValueError(f"answer must be one of {VALID_ANSWERS}, got {value!r}")
        with self._cond:
            if self._closed:
                raise BridgeClosed("bridge is closed")
            if self._pending is None:
                raise AnswerRejected("no query is pending")
            if iteration != self._pending.iteration:
                raise AnswerRejected(
                    f"answer targets iteration {iteration}, "
                    f"pending is {self._pending.iteration}"
                )
            self._answer = int(value)
            self._pending = None
            self._cond.notify_all()

    def await_answer(self, timeout: float | None = None) -> int:
        with self._cond:
            ok = self._cond.wait_for(
                lambda: self._answer is not None or self._closed, timeout=timeout
            )
            if self._closed:
                raise BridgeClosed("bridge closed while waiting for an answer")
            if not ok:
                raise TimeoutError("no answer arrived in time")
            value, self._answer = self._answer, None
            return value

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._pending = None
            self._cond.notify_all()


class HumanOracle:
    """Adapter presenting a :class:`HumanBridge` as a pairwise oracle.

    Maps rules back to their row indices so the pending query is exposed as
    an index pair, and numbers queries with consecutive iteration ids
    starting at 1 (matching the learning loop's record numbering).
    """

    kind = OracleKind.HUMAN

    def __init__(
        self, bridge: HumanBridge, rules: Sequence[Rule], start_iteration: int = 1
    ) -> None:
        self.bridge = bridge
        self._index_of = {rule: i for i, rule in enumerate(rules)}
        self._iteration = start_iteration

    def answer(self, r_i: Rule, r_j: Rule) -> int:
        pair = (self._index_of[r_i], self._index_of[r_j])
        self.bridge.post_query(pair, self._iteration)
        value = self.bridge.await_answer()
        self._iteration += 1
        return value
