"""Interestingness measures, feature matrices and the rule-feature CSV format."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .corpus import ContingencyCounts, Rule, TransactionDatabase


class MeasureKind(str, Enum):
    YULES_Q = "yules_q"
    COSINE = "cosine"
    GK_TAU = "gk_tau"
    ADDED_VALUE = "added_value"
    CERTAINTY_FACTOR = "certainty_factor"
    PHI = "phi"


#: Feature set used for learning; phi is reserved for the oracle side.
DEFAULT_MEASURES = (
    MeasureKind.YULES_Q,
    MeasureKind.COSINE,
    MeasureKind.GK_TAU,
    MeasureKind.ADDED_VALUE,
    MeasureKind.CERTAINTY_FACTOR,
)

_DEDUP_DECIMALS = 12


def compute_measure(c: ContingencyCounts, kind: MeasureKind | str) -> float:
    """Evaluate one interestingness measure on a 2x2 contingency table.

    Degenerate denominators return 0 so that feature vectors stay finite.
    """
    kind = MeasureKind(kind)
    n = c.n
    if n < 1:
        raise ValueError("empty database: n must be >= 1")
    a = c.n_xy
    b = c.n_x - c.n_xy
    cc = c.n_y - c.n_xy
    e = n - c.n_x - c.n_y + c.n_xy
    p_x = c.n_x / n
    p_y = c.n_y / n
    p_xy = c.n_xy / n

    if kind is MeasureKind.YULES_Q:
        num = a * e - b * cc
        den = a * e + b * cc
        return num / den if den else 0.0
    if kind is MeasureKind.COSINE:
        den = c.n_x * c.n_y
        return c.n_xy / math.sqrt(den) if den else 0.0
    if kind is MeasureKind.GK_TAU:
        cells = np.array([[a, b], [cc, e]], dtype=float) / n
        rows = cells.sum(axis=1)
        cols = cells.sum(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            within = np.where(rows[:, None] > 0, cells**2 / rows[:, None], 0.0)
        den = 1.0 - float(cols @ cols)
        return (float(within.sum()) - float(cols @ cols)) / den if den else 0.0
    if kind is MeasureKind.ADDED_VALUE:
        conf = a / c.n_x if c.n_x else 0.0
        return conf - p_y
    if kind is MeasureKind.CERTAINTY_FACTOR:
        if p_y in (0.0, 1.0) or not c.n_x:
            return 0.0
        conf = a / c.n_x
        if conf > p_y:
            return (conf - p_y) / (1.0 - p_y)
        if conf < p_y:
            return (conf - p_y) / p_y
        return 0.0
    if kind is MeasureKind.PHI:
        den = p_x * p_y * (1.0 - p_x) * (1.0 - p_y)
        return (p_xy - p_x * p_y) / math.sqrt(den) if den > 0 else 0.0
    raise ValueError(f"unknown measure {kind!r}")


def surprise_score(db: TransactionDatabase, rule: Rule) -> float:
    """log2 ratio of observed co-occurrence count to the independence expectation."""
    f_obs = rule.counts.n_xy
    if f_obs == 0:
        raise ValueError("surprise undefined for rules with zero observed frequency")
    f_exp = db.n
    for item in rule.antecedent + rule.consequent:
        count = db.item_counts.get(item)
        if not count:
            raise ValueError(f"item {item} does not occur in the database")
        f_exp *= count / db.n
    return math.log2(f_obs / f_exp)


@dataclass
class FeatureMatrix:
    """Per-rule measure values, min-max normalized to [0, 1], after deduplication.

    ``kept`` maps each surviving row to its index in the original rule sequence.
    Columns that are constant over the rule set normalize to 0.5 and are listed
    in ``constant_columns``.
    """

    kinds: tuple[MeasureKind, ...]
    raw: np.ndarray
    norm: np.ndarray
    kept: list[int]
    constant_columns: list[int] = field(default_factory=list)
    col_min: np.ndarray | None = None
    col_max: np.ndarray | None = None

    @property
    def n_rules(self) -> int:
        return self.raw.shape[0]

    @property
    def d(self) -> int:
        return self.raw.shape[1]


def raw_feature_matrix(rules: Sequence[Rule], kinds: Iterable[MeasureKind | str]) -> np.ndarray:
    kinds = tuple(MeasureKind(k) for k in kinds)
    return np.array(
        [[compute_measure(r.counts, k) for k in kinds] for r in rules], dtype=float
    )


def normalize_columns(raw: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[int]]:
    """Min-max normalize each column to [0, 1]; constant columns map to 0.5."""
    col_min = raw.min(axis=0)
    col_max = raw.max(axis=0)
    span = col_max - col_min
    constant = [int(j) for j in np.nonzero(span == 0)[0]]
    safe_span = np.where(span == 0, 1.0, span)
    norm = (raw - col_min) / safe_span
    if constant:
        norm[:, constant] = 0.5
    return norm, col_min, col_max, constant


def feature_matrix(
    rules: Sequence[Rule], kinds: Iterable[MeasureKind | str] = DEFAULT_MEASURES
) -> FeatureMatrix:
    """Build the deduplicated, normalized rule-feature matrix.

    Rules whose raw vectors coincide (after rounding to 12 decimals) are
    collapsed to the first occurrence; normalization ranges are taken over the
    surviving rules.
    """
    kinds = tuple(MeasureKind(k) for k in kinds)
    if not rules:
        raise ValueError("need at least one rule")
    if not kinds:
        raise ValueError("need at least one measure")
    return feature_matrix_from_raw(raw_feature_matrix(rules, kinds), kinds)


# ---------------------------------------------------------------------------
# Rule-feature CSV: header antecedent,consequent,n,n_x,n_y,n_xy,<measures...>
# Itemsets are semicolon-joined ids; floats are written exactly (repr).
# ---------------------------------------------------------------------------


def _fmt(value: float) -> str:
    return repr(float(value))


def write_rules_csv(
    rules: Sequence[Rule],
    path: str | Path | IO[str],
    kinds: Iterable[MeasureKind | str] = DEFAULT_MEASURES,
    raw: np.ndarray | None = None,
) -> None:
    kinds = tuple(MeasureKind(k) for k in kinds)
    if raw is None:
        raw = raw_feature_matrix(rules, kinds)
    if isinstance(path, (str, Path)):
        with open(path, "w", newline="") as fh:
            write_rules_csv(rules, fh, kinds, raw)
        return
    writer = csv.writer(path, lineterminator="\n")
    writer.writerow(["antecedent", "consequent", "n", "n_x", "n_y", "n_xy"] + [k.value for k in kinds])
    for rule, row in zip(rules, raw):
        c = rule.counts
        writer.writerow(
            [
                ";".join(str(i) for i in rule.antecedent),
                ";".join(str(i) for i in rule.consequent),
                c.n,
                c.n_x,
                c.n_y,
                c.n_xy,
            ]
            + [_fmt(v) for v in row]
        )


def read_rules_csv(path: str | Path | IO[str]) -> tuple[list[Rule], np.ndarray, tuple[MeasureKind, ...]]:
    """Read a rule-feature CSV back into rules plus their raw measure values."""
    if isinstance(path, (str, Path)):
        with open(path, newline="") as fh:
            return read_rules_csv(fh)
    reader = csv.reader(path)
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("empty rules CSV") from None
    expected = ["antecedent", "consequent", "n", "n_x", "n_y", "n_xy"]
    if header[: len(expected)] != expected:
        raise ValueError(f"bad rules CSV header: {header!r}")
    kinds = tuple(MeasureKind(name) for name in header[len(expected) :])
    rules: list[Rule] = []
    values: list[list[float]] = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ValueError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        antecedent = tuple(int(t) for t in row[0].split(";"))
        consequent = tuple(int(t) for t in row[1].split(";"))
        counts = ContingencyCounts(
            n=int(row[2]), n_x=int(row[3]), n_y=int(row[4]), n_xy=int(row[5])
        )
        rules.append(Rule(antecedent=antecedent, consequent=consequent, counts=counts))
        values.append([float(v) for v in row[6:]])
    if not rules:
        raise ValueError("rules CSV contains no rules")
    return rules, np.array(values, dtype=float), kinds


def feature_matrix_from_raw(
    raw_all: np.ndarray, kinds: Sequence[MeasureKind]
) -> FeatureMatrix:
    """Same dedup + normalization pipeline, starting from precomputed raw values."""
    seen: set[tuple[float, ...]] = set()
    kept: list[int] = []
    for i, row in enumerate(np.round(raw_all, _DEDUP_DECIMALS)):
        key = tuple(row)
        if key in seen:
            continue
        seen.add(key)
        kept.append(i)
    raw = raw_all[kept]
    norm, col_min, col_max, constant = normalize_columns(raw)
    return FeatureMatrix(
        kinds=tuple(kinds),
        raw=raw,
        norm=norm,
        kept=kept,
        constant_columns=constant,
        col_min=col_min,
        col_max=col_max,
    )
