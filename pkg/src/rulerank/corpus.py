"""Transactional datasets, Eclat-style rule mining and contingency counts."""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence


class FimiParseError(ValueError):
    """Raised when a transaction file cannot be parsed."""

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class ContingencyCounts:
    """2x2 contingency counts of a rule X => Y over a transaction database."""

    n: int
    n_x: int
    n_y: int
    n_xy: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("empty database: n must be >= 1")
        if not (0 <= self.n_xy <= min(self.n_x, self.n_y) <= self.n):
            raise ValueError(f"inconsistent counts {self}")
        if self.n_x + self.n_y - self.n_xy > self.n:
            raise ValueError(f"inconsistent counts {self} (inclusion-exclusion)")

    @property
    def confidence(self) -> float:
        return self.n_xy / self.n_x if self.n_x else 0.0


@dataclass(frozen=True)
class Rule:
    """Association rule X => Y with its contingency counts.

    Antecedent and consequent are disjoint, non-empty, sorted item-id tuples.
    """

    antecedent: tuple[int, ...]
    consequent: tuple[int, ...]
    counts: ContingencyCounts

    def __post_init__(self):
        if not self.antecedent or not self.consequent:
            raise ValueError("antecedent and consequent must be non-empty")
        if set(self.antecedent) & set(self.consequent):
            raise ValueError("antecedent and consequent must be disjoint")
        object.__setattr__(self, "antecedent", tuple(sorted(self.antecedent)))
        object.__setattr__(self, "consequent", tuple(sorted(self.consequent)))

    def label(self) -> str:
        lhs = ";".join(str(i) for i in self.antecedent)
        rhs = ";".join(str(i) for i in self.consequent)
        return f"{lhs} => {rhs}"


class TransactionDatabase:
    """Immutable multiset of transactions (item-id sets) with per-item counts."""

    def __init__(self, transactions: Iterable[Iterable[int]]):
        self.transactions: tuple[frozenset[int], ...] = tuple(
            frozenset(t) for t in transactions
        )
        if not self.transactions:
            raise ValueError("empty database: no transactions")
        counts: dict[int, int] = {}
        for t in self.transactions:
            for item in t:
                counts[item] = counts.get(item, 0) + 1
        self.item_counts: dict[int, int] = counts

    @property
    def n(self) -> int:
        return len(self.transactions)

    @property
    def items(self) -> list[int]:
        return sorted(self.item_counts)

    def frequency(self, itemset: Iterable[int]) -> int:
        s = frozenset(itemset)
        return sum(1 for t in self.transactions if s <= t)


def load_transactions(source: str | Path | IO, format: str = "fimi") -> TransactionDatabase:
    """Load a transaction database from FIMI text (one transaction per line).

    ``source`` may be a filesystem path or a readable text/binary stream.
    Duplicate items within a line are collapsed; blank lines are skipped.
    """
    if format != "fimi":
        raise ValueError(f"unknown transaction format {format!r}")
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            return load_transactions(fh, format=format)
    raw = source.read()
    if isinstance(raw, bytes):
        text = raw.decode("utf-8")
    else:
        text = raw
    transactions = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        items = set()
        for tok in tokens:
            try:
                item = int(tok)
            except ValueError:
                raise FimiParseError(f"non-integer item id {tok!r}", lineno) from None
            if item < 0:
                raise FimiParseError(f"negative item id {item}", lineno)
            items.add(item)
        transactions.append(items)
    if not transactions:
        raise FimiParseError("no transactions found")
    return TransactionDatabase(transactions)


def loads_transactions(text: str) -> TransactionDatabase:
    """Convenience wrapper parsing FIMI content from a string."""
    return load_transactions(io.StringIO(text))


def contingency(
    db: TransactionDatabase,
    antecedent: Iterable[int],
    consequent: Iterable[int],
) -> ContingencyCounts:
    """Compute a rule's contingency counts by subset tests against every transaction."""
    x = frozenset(antecedent)
    y = frozenset(consequent)
    if not x or not y:
        raise ValueError("itemsets must be non-empty")
    if x & y:
        raise ValueError("itemsets must be disjoint")
    n_x = n_y = n_xy = 0
    for t in db.transactions:
        has_x = x <= t
        has_y = y <= t
        n_x += has_x
        n_y += has_y
        n_xy += has_x and has_y
    return ContingencyCounts(n=db.n, n_x=n_x, n_y=n_y, n_xy=n_xy)


def _frequent_itemsets(db: TransactionDatabase, min_support: int) -> dict[tuple[int, ...], int]:
    """Enumerate all frequent itemsets with depth-first tidset intersection."""
    tidsets = {item: set() for item in db.item_counts}
    for tid, t in enumerate(db.transactions):
        for item in t:
            tidsets[item].add(tid)
    frequent_items = [i for i in sorted(tidsets) if len(tidsets[i]) >= min_support]
    support: dict[tuple[int, ...], int] = {}

    def extend(prefix: tuple[int, ...], prefix_tids: set[int], candidates: list[int]):
        for pos, item in enumerate(candidates):
            tids = prefix_tids & tidsets[item] if prefix else tidsets[item]
            if len(tids) < min_support:
                continue
            itemset = prefix + (item,)
            support[itemset] = len(tids)
            extend(itemset, tids, candidates[pos + 1 :])

    extend((), set(), frequent_items)
    return support


def mine_rules(
    db: TransactionDatabase,
    min_support: int,
    min_confidence: float,
    max_rules: int = 100_000,
) -> list[Rule]:
    """Mine single-consequent association rules above support/confidence thresholds.

    Output is ordered by descending support, ties broken by lexicographic
    (antecedent, consequent) order, and truncated to ``max_rules``.
    """
    if min_support < 1:
        raise ValueError("min_support must be >= 1")
    if not (0 < min_confidence <= 1):
        raise ValueError("min_confidence must be in (0, 1]")
    if max_rules < 0:
        raise ValueError("max_rules must be >= 0")
    support = _frequent_itemsets(db, min_support)
    rules = []
    for itemset, supp in support.items():
        if len(itemset) < 2:
            continue
        for y in itemset:
            antecedent = tuple(i for i in itemset if i != y)
            n_x = support[antecedent]
            if supp / n_x < min_confidence:
                continue
            counts = ContingencyCounts(n=db.n, n_x=n_x, n_y=support[(y,)], n_xy=supp)
            rules.append(Rule(antecedent=antecedent, consequent=(y,), counts=counts))
    rules.sort(key=lambda r: (-r.counts.n_xy, r.antecedent, r.consequent))
    return rules[:max_rules]
