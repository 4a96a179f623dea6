"""k-additive Choquet aggregation in Moebius form.

The capacity is a coefficient vector indexed by all feature subsets of size
<= k in a fixed canonical order (by cardinality, then lexicographically).
Lifting a feature vector to its subset minima turns Choquet evaluation into a
plain dot product, which is what makes the whole learning problem linear.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from math import comb
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .constraints import CAPACITY, ConstraintSystem, Provenance


class SubsetIndex:
    """Canonical ordering of all subsets A of {0..d-1} with 1 <= |A| <= k."""

    def __init__(self, d: int, k: int):
        if not (1 <= k <= d):
            raise ValueError(f"need 1 <= k <= d, got d={d}, k={k}")
        self.d = d
        self.k = k
        self.subsets: list[tuple[int, ...]] = [
            subset for size in range(1, k + 1) for subset in combinations(range(d), size)
        ]
        self.position: dict[tuple[int, ...], int] = {
            s: i for i, s in enumerate(self.subsets)
        }

    @property
    def size(self) -> int:
        return len(self.subsets)

    def __len__(self) -> int:
        return len(self.subsets)

    def __eq__(self, other) -> bool:
        return isinstance(other, SubsetIndex) and (self.d, self.k) == (other.d, other.k)

    def __repr__(self) -> str:
        return f"SubsetIndex(d={self.d}, k={self.k})"

    @staticmethod
    def count(d: int, k: int) -> int:
        return sum(comb(d, s) for s in range(1, k + 1))


def augment(f: Sequence[float], index: SubsetIndex) -> np.ndarray:
    """Lift a d-vector to its subset minima in canonical order."""
    f = np.asarray(f, dtype=float)
    if f.shape != (index.d,):
        raise ValueError(f"feature vector has shape {f.shape}, expected ({index.d},)")
    return np.array([f[list(s)].min() for s in index.subsets])


def augment_matrix(F: np.ndarray, index: SubsetIndex) -> np.ndarray:
    """Row-wise augmentation of an (n, d) feature matrix to (n, D)."""
    F = np.asarray(F, dtype=float)
    if F.ndim != 2 or F.shape[1] != index.d:
        raise ValueError(f"feature matrix has shape {F.shape}, expected (n, {index.d})")
    out = np.empty((F.shape[0], index.size))
    for j, subset in enumerate(index.subsets):
        out[:, j] = F[:, list(subset)].min(axis=1)
    return out


@dataclass(frozen=True)
class MobiusCapacity:
    """Moebius coefficients m(A) in canonical subset order."""

    index: SubsetIndex
    coeffs: np.ndarray

    NORMALIZATION_TOL = 1e-9
    MONOTONICITY_TOL = 1e-9

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.shape != (self.index.size,):
            raise ValueError(
                f"capacity has {coeffs.shape} coefficients, expected ({self.index.size},)"
            )
        object.__setattr__(self, "coeffs", coeffs)

    def validate(self) -> None:
        """Check normalization and monotonicity within the type tolerances."""
        total = float(self.coeffs.sum())
        if abs(total - 1.0) > self.NORMALIZATION_TOL:
            raise ValueError(f"capacity not normalized: sum={total!r}")
        system = capacity_constraints(self.index)
        worst = float(np.max(system.ineq_coeffs @ self.coeffs - system.ineq_rhs))
        if worst > self.MONOTONICITY_TOL:
            raise ValueError(f"capacity violates monotonicity by {worst!r}")

    def __call__(self, f: Sequence[float]) -> float:
        return choquet_eval(self, f)

    def scores(self, F: np.ndarray) -> np.ndarray:
        return augment_matrix(F, self.index) @ self.coeffs

    def to_json_dict(self) -> dict:
        return {
            "d": self.index.d,
            "k": self.index.k,
            "coeffs": {
                ",".join(str(i + 1) for i in subset): float(v)
                for subset, v in zip(self.index.subsets, self.coeffs)
            },
        }

    def dump_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_json_dict(cls, data: dict) -> "MobiusCapacity":
        index = SubsetIndex(int(data["d"]), int(data["k"]))
        coeffs = np.zeros(index.size)
        for key, value in data["coeffs"].items():
            subset = tuple(sorted(int(t) - 1 for t in key.split(",")))
            coeffs[index.position[subset]] = float(value)
        return cls(index=index, coeffs=coeffs)

    @classmethod
    def load_json(cls, path: str | Path) -> "MobiusCapacity":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def choquet_eval(m: MobiusCapacity, f: Sequence[float]) -> float:
    """Choquet value of ``f`` as <coeffs, augment(f)>."""
    return float(m.coeffs @ augment(f, m.index))


def capacity_constraints(index: SubsetIndex) -> ConstraintSystem:
    """Monotonicity and normalization constraints on the Moebius coefficients.

    One inequality per (criterion i, coalition S not containing i), truncated to
    interaction order k and deduplicated by exact coefficient-row equality, plus
    the normalization equality (all coefficients sum to 1). Inequality rows are
    stored in <= form, so each monotonicity row appears negated.
    """
    d, k = index.d, index.k
    rows: list[np.ndarray] = []
    seen: set[bytes] = set()
    for i in range(d):
        others = [j for j in range(d) if j != i]
        for s_size in range(0, d):
            for S in combinations(others, s_size):
                row = np.zeros(index.size)
                for t_size in range(0, k):
                    for T in combinations(S, t_size):
                        subset = tuple(sorted(T + (i,)))
                        row[index.position[subset]] += 1.0
                key = row.tobytes()
                if key in seen:
                    continue
                seen.add(key)
                rows.append(row)
    ineq_coeffs = -np.array(rows)  # sum >= 0  ->  -sum <= 0
    ineq_rhs = np.zeros(len(rows))
    eq_coeffs = np.ones((1, index.size))
    eq_rhs = np.array([1.0])
    return ConstraintSystem(
        dim=index.size,
        eq_coeffs=eq_coeffs,
        eq_rhs=eq_rhs,
        ineq_coeffs=ineq_coeffs,
        ineq_rhs=ineq_rhs,
        eq_provenance=(CAPACITY,),
        ineq_provenance=(CAPACITY,) * len(rows),
    )


def preference_constraint(
    psi_i: np.ndarray,
    psi_j: np.ndarray,
    answer: int,
    margin: float = 0.0,
) -> tuple[np.ndarray, float]:
    """Inequality row (in <= form) induced by one answered comparison.

    answer=+1 encodes <w, psi_i - psi_j> >= margin, answer=-1 the reverse.
    """
    psi_i = np.asarray(psi_i, dtype=float)
    psi_j = np.asarray(psi_j, dtype=float)
    if psi_i.shape != psi_j.shape:
        raise ValueError("augmented vectors have different shapes")
    if answer not in (1, -1):
        raise ValueError(f"answer must be +1 or -1, got {answer}")
    q = psi_i - psi_j
    if not np.any(q):
        raise ValueError("identical augmented vectors give a vacuous constraint")
    return (-answer * q, -margin)
