"""Ranking-quality metrics, cover diversity, and constraint-angle analysis."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Rule, TransactionDatabase
from .learner import IterationRecord


def precision_at_k(learned: Sequence, oracle_order: Sequence, k: int) -> float:
    """Overlap fraction of the two top-k sets.

    With the relevant set defined as the oracle's own top-k, recall at the
    same cutoff coincides with precision, so only one number is reported.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > len(learned) or k > len(oracle_order):
        raise ValueError(f"k={k} exceeds ranking length")
    return len(set(learned[:k]) & set(oracle_order[:k])) / k


def rule_cover(db: TransactionDatabase, rule: Rule) -> np.ndarray:
    """Boolean mask of transactions containing every item of the rule."""
    items = frozenset(rule.antecedent) | frozenset(rule.consequent)
    return np.array([items <= t for t in db.transactions], dtype=bool)


@dataclass(frozen=True)
class JaccardEntry:
    rule_i: int
    rule_j: int
    value: float
    zero_cover: bool = False


def jaccard_topk_diversity(
    db: TransactionDatabase,
    rules: Sequence[Rule],
    learned_order: Sequence[int],
    k: int = 15,
) -> list[JaccardEntry]:
    """Pairwise cover overlap among the top-k ranked rules.

    Returns one entry per unordered pair of the first ``k`` ids in
    ``learned_order``. Pairs touching a rule that covers no transaction get
    value 0 with ``zero_cover`` set.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > len(rules):
        raise ValueError(f"k={k} exceeds rule count {len(rules)}")
    top = [int(i) for i in learned_order[:k]]
    covers = {i: rule_cover(db, rules[i]) for i in top}
    entries = []
    for i, j in combinations(top, 2):
        vi, vj = covers[i], covers[j]
        if not vi.any() or not vj.any():
            entries.append(JaccardEntry(i, j, 0.0, zero_cover=True))
            continue
        union = int(np.logical_or(vi, vj).sum())
        inter = int(np.logical_and(vi, vj).sum())
        entries.append(JaccardEntry(i, j, inter / union))
    return entries


@dataclass
class AngleAnalysis:
    normals: np.ndarray
    kept: list[int]
    skipped: list[int]
    angles: list[float]


def constraint_angles(rows: np.ndarray) -> AngleAnalysis:
    """Pairwise angles between preference-constraint orientations.

    Each D-dimensional row h (a half-space normal over weights that sum to
    one) is reduced by eliminating the last coordinate, a = h[:-1] - h[-1],
    then normalized; rows reducing to zero (constant h) carry no orientation
    and are skipped. Angles are arccos of clamped dot products, in [0, pi],
    one per unordered pair of kept rows.
    """
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or rows.shape[0] < 2:
        raise ValueError("need at least two constraint rows")
    reduced = rows[:, :-1] - rows[:, -1:]
    norms = np.linalg.norm(reduced, axis=1)
    kept = [i for i in range(rows.shape[0]) if norms[i] > 1e-12]
    skipped = [i for i in range(rows.shape[0]) if norms[i] <= 1e-12]
    normals = np.array([reduced[i] / norms[i] for i in kept]) if kept else np.empty((0, rows.shape[1] - 1))
    angles = [
        float(np.arccos(np.clip(np.dot(normals[a], normals[b]), -1.0, 1.0)))
        for a, b in combinations(range(len(kept)), 2)
    ]
    return AngleAnalysis(normals=normals, kept=kept, skipped=skipped, angles=angles)


def _ranking_from_center(psi: np.ndarray, center: np.ndarray) -> list[int]:
    scores = psi @ np.asarray(center, dtype=float)
    return [int(i) for i in np.argsort(-scores, kind="stable")]


def convergence_report(
    logs: Sequence[Sequence[IterationRecord]],
    labels: Sequence[tuple[object, object]] | None = None,
    psi_eval: np.ndarray | None = None,
    oracle_order: Sequence[int] | None = None,
    cutoffs: Sequence[int] = (5, 10, 15),
    psi_train: np.ndarray | None = None,
    aggregate: bool = True,
) -> list[dict]:
    """Flatten session logs into metric rows, with cross-log aggregates.

    Per record: r_max, wall time, and (when an oracle ranking over the
    evaluation features is available) precision at each cutoff under that
    iteration's center. When training features are supplied, the pairwise
    angles of the accumulated preference normals are summarized as quartiles
    at the final iteration. Unless ``aggregate`` is off, mean/median rows
    over all logs are appended, tagged in the seed column.
    """
    if not logs:
        raise ValueError("need at least one session log")
    if labels is None:
        labels = [(i, 0) for i in range(len(logs))]
    rows: list[dict] = []
    for log, (seed, fold) in zip(logs, labels):
        for rec in log:
            base = dict(iteration=rec.iteration, seed=seed, fold=fold)
            rows.append(dict(base, metric="r_max", cutoff=None, value=float(rec.r_max)))
            rows.append(dict(base, metric="duration_s", cutoff=None, value=float(rec.duration_s)))
            if psi_eval is not None and oracle_order is not None:
                learned = _ranking_from_center(psi_eval, rec.center)
                for k in cutoffs:
                    kk = min(int(k), len(learned))
                    rows.append(
                        dict(base, metric="precision", cutoff=int(k),
                             value=precision_at_k(learned, oracle_order, kk))
                    )
        if psi_train is not None and log:
            normals = [
                rec.answer * (psi_train[rec.pair[0]] - psi_train[rec.pair[1]])
                for rec in log
                if rec.answer != 0
            ]
            if len(normals) >= 2:
                analysis = constraint_angles(np.array(normals))
                if analysis.angles:
                    q25, q50, q75 = np.quantile(analysis.angles, [0.25, 0.5, 0.75])
                    last = log[-1].iteration
                    for name, val in (("angle_q25", q25), ("angle_q50", q50), ("angle_q75", q75)):
                        rows.append(dict(iteration=last, metric=name, cutoff=None,
                                         value=float(val), seed=seed, fold=fold))
    if aggregate:
        rows.extend(aggregate_rows(rows))
    return rows


def aggregate_rows(rows: Sequence[dict]) -> list[dict]:
    """Mean/median rows per (iteration, metric, cutoff) across all inputs."""
    groups: dict[tuple, list[float]] = {}
    for row in rows:
        groups.setdefault((row["iteration"], row["metric"], row["cutoff"]), []).append(row["value"])
    out = []
    for (iteration, metric, cutoff), values in sorted(
        groups.items(), key=lambda kv: (kv[0][0], kv[0][1], str(kv[0][2]))
    ):
        out.append(dict(iteration=iteration, metric=metric, cutoff=cutoff,
                        value=float(np.mean(values)), seed="mean", fold=""))
        out.append(dict(iteration=iteration, metric=metric, cutoff=cutoff,
                        value=float(np.median(values)), seed="median", fold=""))
    return out


def write_metrics_csv(rows: Sequence[dict], path: str | Path) -> None:
    """CSV with columns iteration,metric,cutoff,value,seed,fold."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "metric", "cutoff", "value", "seed", "fold"])
        for row in rows:
            value = row["value"]
            writer.writerow([
                "" if row["iteration"] is None else row["iteration"],
                row["metric"],
                "" if row["cutoff"] is None else row["cutoff"],
                repr(float(value)) if isinstance(value, (int, float)) and not isinstance(value, bool) else value,
                "" if row["seed"] is None else row["seed"],
                "" if row["fold"] is None else row["fold"],
            ])
