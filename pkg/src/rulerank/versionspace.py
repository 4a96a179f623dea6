"""Version-space polytope maintenance and its linear-program machinery.

The feasible set of capacities is kept as an explicit constraint system.
Centers (Chebyshev / Minkowski) come from small LPs solved with HiGHS; both
keep the normalization equality as an equality row and measure radii with
full-space norms, so the reported inscribed radius is a conservative proxy of
the within-subspace one.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .choquet import SubsetIndex, capacity_constraints
from .constraints import ConstraintSystem, Provenance

FEASIBILITY_TOL = 1e-7


class InfeasibleVersionSpace(RuntimeError):
    """The constraint system has no feasible capacity (inconsistent feedback)."""


class LPError(RuntimeError):
    """A linear program failed for a reason other than plain infeasibility."""


class LPStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ERROR = "error"


@dataclass(frozen=True)
class LPResult:
    status: LPStatus
    x: np.ndarray | None
    value: float | None


@dataclass(frozen=True)
class CenterEstimate:
    """A polytope center with its inscribed radius (and symmetry, if Minkowski)."""

    kind: str  # "chebyshev" or "minkowski"
    point: np.ndarray
    radius: float
    symmetry: float | None = None


def solve_lp(
    objective: Sequence[float],
    eq_coeffs: np.ndarray | None = None,
    eq_rhs: np.ndarray | None = None,
    ineq_coeffs: np.ndarray | None = None,
    ineq_rhs: np.ndarray | None = None,
    bounds: Sequence[tuple[float | None, float | None]] | None = None,
    maximize: bool = False,
) -> LPResult:
    """Solve min (or max) <objective, x> subject to eq/ineq rows.

    Variables are free unless ``bounds`` says otherwise. Results are
    deterministic for fixed inputs (single-threaded HiGHS).
    """
    c = np.asarray(objective, dtype=float)
    if maximize:
        c = -c
    n = c.shape[0]
    if bounds is None:
        bounds = [(None, None)] * n
    kwargs = {}
    if eq_coeffs is not None and len(eq_coeffs):
        kwargs["A_eq"] = np.asarray(eq_coeffs, dtype=float)
        kwargs["b_eq"] = np.asarray(eq_rhs, dtype=float)
    if ineq_coeffs is not None and len(ineq_coeffs):
        kwargs["A_ub"] = np.asarray(ineq_coeffs, dtype=float)
        kwargs["b_ub"] = np.asarray(ineq_rhs, dtype=float)
    res = linprog(c, bounds=bounds, method="highs", **kwargs)
    if res.status == 0:
        value = float(res.fun)
        return LPResult(LPStatus.OPTIMAL, np.asarray(res.x), -value if maximize else value)
    if res.status == 2:
        return LPResult(LPStatus.INFEASIBLE, None, None)
    if res.status == 3:
        return LPResult(LPStatus.UNBOUNDED, None, None)
    return LPResult(LPStatus.ERROR, None, None)


def init_version_space(index: SubsetIndex) -> ConstraintSystem:
    """Initial polytope: all monotone, normalized k-additive capacities."""
    return capacity_constraints(index)


def add_preference(
    vs: ConstraintSystem, ineq: tuple[np.ndarray, float], iteration: int
) -> ConstraintSystem:
    """Append one answered-comparison row; feasibility is checked lazily."""
    coeffs, rhs = ineq
    return vs.with_inequality(coeffs, rhs, Provenance("preference", iteration))


def _row_norms(coeffs: np.ndarray) -> np.ndarray:
    return np.linalg.norm(coeffs, axis=1)


def chebyshev_center(vs: ConstraintSystem) -> CenterEstimate:
    """Center and radius of the largest inscribed ball, via one LP.

    max r  s.t.  A x = b,  C x + r * ||c_i|| <= d,  r >= 0.
    """
    n = vs.dim
    if vs.n_ineq == 0:
        raise LPError("chebyshev center needs at least one inequality row")
    objective = np.zeros(n + 1)
    objective[-1] = 1.0
    ineq = np.hstack([vs.ineq_coeffs, _row_norms(vs.ineq_coeffs)[:, None]])
    eq = None
    eq_rhs = None
    if vs.n_eq:
        eq = np.hstack([vs.eq_coeffs, np.zeros((vs.n_eq, 1))])
        eq_rhs = vs.eq_rhs
    bounds = [(None, None)] * n + [(0, None)]
    res = solve_lp(objective, eq, eq_rhs, ineq, vs.ineq_rhs, bounds=bounds, maximize=True)
    if res.status is LPStatus.INFEASIBLE:
        raise InfeasibleVersionSpace("no capacity satisfies the accumulated constraints")
    if res.status is not LPStatus.OPTIMAL:
        raise LPError(f"chebyshev center LP ended with status {res.status.value}")
    return CenterEstimate(kind="chebyshev", point=res.x[:n], radius=float(res.x[n]))


def minkowski_center(vs: ConstraintSystem) -> CenterEstimate:
    """Point maximizing the central symmetry of the polytope.

    Two LP stages: facet minima delta_i = min <c_i, y> over the polytope, then
    max lambda s.t. A w = (1 + lambda) b, C w - lambda * delta <= d. The center
    is w* / (1 + lambda*); its radius is the post-hoc inscribed radius.
    """
    n = vs.dim
    delta = np.empty(vs.n_ineq)
    for i in range(vs.n_ineq):
        res = solve_lp(
            vs.ineq_coeffs[i],
            vs.eq_coeffs if vs.n_eq else None,
            vs.eq_rhs if vs.n_eq else None,
            vs.ineq_coeffs,
            vs.ineq_rhs,
        )
        if res.status is LPStatus.INFEASIBLE:
            raise InfeasibleVersionSpace("no capacity satisfies the accumulated constraints")
        if res.status is not LPStatus.OPTIMAL:
            raise LPError(f"facet-minimum LP {i} ended with status {res.status.value}")
        delta[i] = res.value
    objective = np.zeros(n + 1)
    objective[-1] = 1.0
    ineq = np.hstack([vs.ineq_coeffs, -delta[:, None]])
    eq = None
    eq_rhs = None
    if vs.n_eq:
        eq = np.hstack([vs.eq_coeffs, -vs.eq_rhs[:, None]])
        eq_rhs = vs.eq_rhs
    bounds = [(None, None)] * n + [(0, None)]
    res = solve_lp(objective, eq, eq_rhs, ineq, vs.ineq_rhs, bounds=bounds, maximize=True)
    if res.status is LPStatus.INFEASIBLE:
        raise InfeasibleVersionSpace("no capacity satisfies the accumulated constraints")
    if res.status is not LPStatus.OPTIMAL:
        raise LPError(f"minkowski center LP ended with status {res.status.value}")
    lam = float(res.x[n])
    point = res.x[:n] / (1.0 + lam)
    return CenterEstimate(
        kind="minkowski",
        point=point,
        radius=inscribed_radius(vs, point),
        symmetry=min(lam, 1.0),
    )


def inscribed_radius(vs: ConstraintSystem, c: np.ndarray, tol: float = 1e-6) -> float:
    """Distance from a feasible point to the nearest inequality facet, clamped at 0."""
    c = np.asarray(c, dtype=float)
    if vs.violation(c) > tol:
        raise ValueError(f"point violates the constraint system by {vs.violation(c)!r}")
    if vs.n_ineq == 0:
        raise LPError("inscribed radius needs at least one inequality row")
    slack = vs.ineq_rhs - vs.ineq_coeffs @ c
    return max(0.0, float(np.min(slack / _row_norms(vs.ineq_coeffs))))


def cut_check(vs: ConstraintSystem, q: np.ndarray) -> tuple[float, float]:
    """Exact range of <q, w> over the polytope (two LPs).

    The hyperplane orthogonal to ``q`` intersects the polytope interior iff
    the returned range straddles 0 strictly.
    """
    q = np.asarray(q, dtype=float)
    lo = solve_lp(q, vs.eq_coeffs, vs.eq_rhs, vs.ineq_coeffs, vs.ineq_rhs)
    hi = solve_lp(q, vs.eq_coeffs, vs.eq_rhs, vs.ineq_coeffs, vs.ineq_rhs, maximize=True)
    for res in (lo, hi):
        if res.status is LPStatus.INFEASIBLE:
            raise InfeasibleVersionSpace("no capacity satisfies the accumulated constraints")
        if res.status is not LPStatus.OPTIMAL:
            raise LPError(f"cut-check LP ended with status {res.status.value}")
    return lo.value, hi.value


def is_interesting(bounds: tuple[float, float], tol: float = 1e-9) -> bool:
    lo, hi = bounds
    return lo < -tol and hi > tol


def sample_feasible(
    vs: ConstraintSystem,
    n_samples: int,
    seed: int | None = None,
    thin: int = 10,
) -> np.ndarray:
    """Hit-and-run samples from the polytope (equalities handled by projection).

    Intended for tests and diagnostics; starts from the Chebyshev center.
    """
    rng = np.random.default_rng(seed)
    start = chebyshev_center(vs).point
    if vs.n_eq:
        from scipy.linalg import null_space

        basis = null_space(vs.eq_coeffs)
    else:
        basis = np.eye(vs.dim)
    if basis.size == 0:
        return np.tile(start, (n_samples, 1))
    x = start.copy()
    samples = np.empty((n_samples, vs.dim))
    count = 0
    while count < n_samples:
        for _ in range(thin):
            direction = basis @ rng.standard_normal(basis.shape[1])
            norm = np.linalg.norm(direction)
            if norm == 0:
                continue
            direction /= norm
            rates = vs.ineq_coeffs @ direction
            slack = vs.ineq_rhs - vs.ineq_coeffs @ x
            with np.errstate(divide="ignore", invalid="ignore"):
                steps = slack / rates
            upper = np.min(steps[rates > 0], initial=np.inf)
            lower = np.max(steps[rates < 0], initial=-np.inf)
            if not (np.isfinite(upper) and np.isfinite(lower)) or upper < lower:
                continue
            x = x + direction * rng.uniform(lower, upper)
        samples[count] = x
        count += 1
    return samples
