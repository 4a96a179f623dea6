"""Linear constraint systems over capacity coefficients, with row provenance."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np


class Provenance(NamedTuple):
    kind: str  # "capacity" or "preference"
    iteration: int | None = None

    def tag(self) -> str:
        return self.kind if self.iteration is None else f"{self.kind}:{self.iteration}"

    @classmethod
    def from_tag(cls, tag: str) -> "Provenance":
        if ":" in tag:
            kind, it = tag.split(":", 1)
            return cls(kind, int(it))
        return cls(tag)


CAPACITY = Provenance("capacity")


@dataclass(frozen=True)
class ConstraintSystem:
    """Equality rows <a, w> = b and inequality rows <c, w> <= d over R^dim.

    Instances are values: appending rows produces a new system.
    """

    dim: int
    eq_coeffs: np.ndarray
    eq_rhs: np.ndarray
    ineq_coeffs: np.ndarray
    ineq_rhs: np.ndarray
    eq_provenance: tuple[Provenance, ...] = field(default_factory=tuple)
    ineq_provenance: tuple[Provenance, ...] = field(default_factory=tuple)

    def __post_init__(self):
        eq = np.atleast_2d(np.asarray(self.eq_coeffs, dtype=float)).reshape(-1, self.dim)
        ineq = np.atleast_2d(np.asarray(self.ineq_coeffs, dtype=float)).reshape(-1, self.dim)
        object.__setattr__(self, "eq_coeffs", eq)
        object.__setattr__(self, "ineq_coeffs", ineq)
        object.__setattr__(self, "eq_rhs", np.asarray(self.eq_rhs, dtype=float).reshape(-1))
        object.__setattr__(self, "ineq_rhs", np.asarray(self.ineq_rhs, dtype=float).reshape(-1))
        if self.eq_coeffs.shape[0] != self.eq_rhs.shape[0]:
            raise ValueError("equality coefficient/rhs row counts differ")
        if self.ineq_coeffs.shape[0] != self.ineq_rhs.shape[0]:
            raise ValueError("inequality coefficient/rhs row counts differ")
        if not self.eq_provenance:
            object.__setattr__(self, "eq_provenance", (CAPACITY,) * self.n_eq)
        if not self.ineq_provenance:
            object.__setattr__(self, "ineq_provenance", (CAPACITY,) * self.n_ineq)
        if len(self.eq_provenance) != self.n_eq or len(self.ineq_provenance) != self.n_ineq:
            raise ValueError("provenance length mismatch")

    @property
    def n_eq(self) -> int:
        return self.eq_coeffs.shape[0]

    @property
    def n_ineq(self) -> int:
        return self.ineq_coeffs.shape[0]

    def with_inequality(
        self, coeffs: Sequence[float], rhs: float, provenance: Provenance
    ) -> "ConstraintSystem":
        row = np.asarray(coeffs, dtype=float).reshape(1, -1)
        if row.shape[1] != self.dim:
            raise ValueError(f"row has dimension {row.shape[1]}, expected {self.dim}")
        return ConstraintSystem(
            dim=self.dim,
            eq_coeffs=self.eq_coeffs,
            eq_rhs=self.eq_rhs,
            ineq_coeffs=np.vstack([self.ineq_coeffs, row]),
            ineq_rhs=np.append(self.ineq_rhs, float(rhs)),
            eq_provenance=self.eq_provenance,
            ineq_provenance=self.ineq_provenance + (provenance,),
        )

    def violation(self, point: np.ndarray) -> float:
        """Largest constraint violation at ``point`` (0 when feasible)."""
        point = np.asarray(point, dtype=float)
        worst = 0.0
        if self.n_eq:
            worst = float(np.max(np.abs(self.eq_coeffs @ point - self.eq_rhs)))
        if self.n_ineq:
            worst = max(worst, float(np.max(self.ineq_coeffs @ point - self.ineq_rhs)))
        return worst

    def contains(self, point: np.ndarray, tol: float = 1e-7) -> bool:
        return self.violation(point) <= tol

    def to_json_dict(self) -> dict:
        return {
            "dim": self.dim,
            "equalities": [
                {"row": row.tolist(), "rhs": float(b)}
                for row, b in zip(self.eq_coeffs, self.eq_rhs)
            ],
            "inequalities": [
                {"row": row.tolist(), "rhs": float(d)}
                for row, d in zip(self.ineq_coeffs, self.ineq_rhs)
            ],
            "provenance": {
                "equalities": [p.tag() for p in self.eq_provenance],
                "inequalities": [p.tag() for p in self.ineq_provenance],
            },
        }

    def dump_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2, sort_keys=True))

    @classmethod
    def from_json_dict(cls, data: dict) -> "ConstraintSystem":
        dim = int(data["dim"])
        eqs = data.get("equalities", [])
        ineqs = data.get("inequalities", [])
        prov = data.get("provenance", {})
        return cls(
            dim=dim,
            eq_coeffs=np.array([e["row"] for e in eqs], dtype=float).reshape(-1, dim),
            eq_rhs=np.array([e["rhs"] for e in eqs], dtype=float),
            ineq_coeffs=np.array([e["row"] for e in ineqs], dtype=float).reshape(-1, dim),
            ineq_rhs=np.array([e["rhs"] for e in ineqs], dtype=float),
            eq_provenance=tuple(Provenance.from_tag(t) for t in prov.get("equalities", [])),
            ineq_provenance=tuple(Provenance.from_tag(t) for t in prov.get("inequalities", [])),
        )
