"""Interactive preference-learning loop over capacity version spaces.

Each iteration computes a central capacity of the current version space,
selects an informative rule pair (branch-and-bound near the center, or a
random baseline), asks the oracle, and intersects the version space with the
implied half-space. The session log records one entry per answered query.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Hashable, Literal, Sequence

import numpy as np

from . import balltree
from .choquet import MobiusCapacity, SubsetIndex, augment_matrix, preference_constraint
from .constraints import ConstraintSystem
from .versionspace import (
    CenterEstimate,
    InfeasibleVersionSpace,
    add_preference,
    chebyshev_center,
    cut_check,
    init_version_space,
    is_interesting,
    minkowski_center,
)

CenterKind = Literal["chebyshev", "minkowski"]
SelectionKind = Literal["bnb", "random"]

STATUS_COMPLETED = "completed"
STATUS_RESOLVED = "resolved"
STATUS_INDIFFERENT = "indifferent_stop"
STATUS_INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class SessionConfig:
    """Knobs for one learning session."""

    k: int
    center_kind: CenterKind = "chebyshev"
    selection: SelectionKind = "bnb"
    bound_mode: balltree.BoundMode = "paper"
    max_iterations: int = 30
    stop_on_indifference: bool = True
    exact_cut_verification: bool = False
    search_ratio: float = 0.5
    margin: float = 0.0
    leaf_capacity: int = 8
    seed: int | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0 < self.search_ratio:
            raise ValueError("search_ratio must be positive")
        if self.center_kind not in ("chebyshev", "minkowski"):
            raise ValueError(f"unknown center kind {self.center_kind!r}")
        if self.selection not in ("bnb", "random"):
            raise ValueError(f"unknown selection policy {self.selection!r}")


@dataclass(frozen=True)
class IterationRecord:
    """One answered query: what was asked, what came back, where we stood."""

    iteration: int
    pair: tuple[int, int]
    answer: int
    r_max: float
    center: np.ndarray
    duration_s: float
    selection_ok: bool = True

    def to_json_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "pair": [int(self.pair[0]), int(self.pair[1])],
            "answer": int(self.answer),
            "r_max": float(self.r_max),
            "center": [float(v) for v in self.center],
            "duration_s": float(self.duration_s),
            "selection_ok": bool(self.selection_ok),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "IterationRecord":
        return cls(
            iteration=int(data["iteration"]),
            pair=(int(data["pair"][0]), int(data["pair"][1])),
            answer=int(data["answer"]),
            r_max=float(data["r_max"]),
            center=np.asarray(data["center"], dtype=float),
            duration_s=float(data["duration_s"]),
            selection_ok=bool(data.get("selection_ok", True)),
        )


@dataclass
class SessionResult:
    capacity: MobiusCapacity
    records: list[IterationRecord]
    status: str
    index: SubsetIndex
    constraints: ConstraintSystem

    @property
    def n_queries(self) -> int:
        return len(self.records)


def write_session_log(records: Sequence[IterationRecord], path: str | Path) -> None:
    """One JSON object per line, one line per iteration record."""
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_json_dict()) + "\n")


def read_session_log(path: str | Path) -> list[IterationRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(IterationRecord.from_json_dict(json.loads(line)))
    return records


def select_query(
    vs: ConstraintSystem,
    center: CenterEstimate,
    tree: balltree.BallNode,
    points: np.ndarray,
    asked: set[tuple[int, int]],
    cfg: SessionConfig,
) -> tuple[int, int] | None:
    """Pick a rule pair whose indifference hyperplane cuts the version space.

    Searches the ball tree with target radius ``search_ratio * r_max`` and
    accepts the result only if its true hyperplane distance is at most
    ``r_max`` (which guarantees an intersecting cut). Already-asked pairs are
    masked out; with ``exact_cut_verification`` each candidate additionally
    has to pass an LP check that scores straddle zero, and rejected
    candidates are masked and the search retried a few times.
    """
    r_max = center.radius
    tau = cfg.search_ratio * r_max
    masked = set(asked)
    for _ in range(10):
        pair, dist = balltree.search_pair(
            tree, points, center.point, tau, mode=cfg.bound_mode, exclude=masked
        )
        if pair is None or not dist <= r_max:
            return None
        if cfg.exact_cut_verification:
            q = points[pair[0]] - points[pair[1]]
            if not is_interesting(cut_check(vs, q)):
                masked.add(pair)
                continue
        return pair
    return None


def random_select(
    n_rules: int,
    asked: set[tuple[int, int]],
    rng: np.random.Generator | int | None,
) -> tuple[int, int] | None:
    """Uniform unordered pair not yet asked; None when exhausted."""
    if n_rules < 2:
        raise ValueError("need at least two rules")
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    total = n_rules * (n_rules - 1) // 2
    if len(asked) >= total:
        return None
    for _ in range(100):
        i = int(rng.integers(n_rules))
        j = int(rng.integers(n_rules))
        if i == j:
            continue
        pair = (min(i, j), max(i, j))
        if pair not in asked:
            return pair
    remaining = [
        (i, j)
        for i in range(n_rules)
        for j in range(i + 1, n_rules)
        if (i, j) not in asked
    ]
    if not remaining:
        return None
    return remaining[int(rng.integers(len(remaining)))]


def _compute_center(vs: ConstraintSystem, kind: CenterKind) -> CenterEstimate:
    return chebyshev_center(vs) if kind == "chebyshev" else minkowski_center(vs)


def _renormalized_capacity(index: SubsetIndex, point: np.ndarray) -> MobiusCapacity:
    coeffs = np.asarray(point, dtype=float)
    total = float(coeffs.sum())
    if total <= 0:
        raise ValueError("center has non-positive coefficient mass")
    return MobiusCapacity(index=index, coeffs=coeffs / total)


def run_gbs(
    rules: Sequence[Hashable],
    features: np.ndarray,
    oracle,
    cfg: SessionConfig,
    initial_constraints: ConstraintSystem | None = None,
    on_select: Callable[[int, tuple[int, int], CenterEstimate], None] | None = None,
    on_record: Callable[[IterationRecord], None] | None = None,
    start_iteration: int = 1,
    asked: set[tuple[int, int]] | None = None,
) -> SessionResult:
    """Run the full query/answer/refine loop and return the learned capacity.

    ``rules`` are opaque identities handed to ``oracle.answer``; ``features``
    is the aligned normalized feature matrix (one row per rule). Stops on the
    iteration budget, an indifferent answer (when configured), an exhausted
    query supply, or an infeasible version space; the final capacity is the
    requested center of the last feasible version space, renormalized so its
    coefficients sum to one exactly.

    ``start_iteration``, ``asked``, and ``initial_constraints`` let a half-
    finished session resume: pass the replayed constraint system, the pairs
    already asked, and the next iteration number; ``max_iterations`` then
    counts the remaining budget.
    """
    features = np.asarray(features, dtype=float)
    if features.ndim != 2:
        raise ValueError("features must be a (n_rules, d) matrix")
    n, d = features.shape
    if len(rules) != n:
        raise ValueError("one feature row per rule required")
    if n < 2:
        raise ValueError("need at least two rules to compare")

    index = SubsetIndex(d, cfg.k)
    psi = augment_matrix(features, index)
    vs = initial_constraints if initial_constraints is not None else init_version_space(index)
    if vs.dim != index.size:
        raise ValueError(
            f"constraint system has dimension {vs.dim}, expected {index.size}"
        )
    tree = balltree.build(psi, leaf_capacity=cfg.leaf_capacity, seed=cfg.seed)
    rng = np.random.default_rng(cfg.seed)

    records: list[IterationRecord] = []
    asked = set(asked) if asked is not None else set()
    status = STATUS_COMPLETED
    last_center: CenterEstimate | None = None

    for iteration in range(start_iteration, start_iteration + cfg.max_iterations):
        started = time.perf_counter()
        try:
            center = _compute_center(vs, cfg.center_kind)
        except InfeasibleVersionSpace:
            if last_center is None:
                raise
            status = STATUS_INFEASIBLE
            break
        last_center = center

        if cfg.selection == "bnb":
            pair = select_query(vs, center, tree, psi, asked, cfg)
        else:
            pair = random_select(n, asked, rng)
        if pair is None:
            status = STATUS_RESOLVED
            break
        if on_select is not None:
            on_select(iteration, pair, center)

        answer = int(oracle.answer(rules[pair[0]], rules[pair[1]]))
        asked.add(pair)
        record = IterationRecord(
            iteration=iteration,
            pair=pair,
            answer=answer,
            r_max=center.radius,
            center=center.point,
            duration_s=time.perf_counter() - started,
            selection_ok=True,
        )
        records.append(record)
        if on_record is not None:
            on_record(record)

        if answer == 0:
            if cfg.stop_on_indifference:
                status = STATUS_INDIFFERENT
                break
            continue
        ineq = preference_constraint(psi[pair[0]], psi[pair[1]], answer, margin=cfg.margin)
        vs = add_preference(vs, ineq, iteration)

    if status not in (STATUS_INFEASIBLE,):
        try:
            last_center = _compute_center(vs, cfg.center_kind)
        except InfeasibleVersionSpace:
            status = STATUS_INFEASIBLE
    if last_center is None:
        raise InfeasibleVersionSpace("no feasible center was ever computed")
    capacity = _renormalized_capacity(index, last_center.point)
    return SessionResult(
        capacity=capacity, records=records, status=status, index=index, constraints=vs
    )
