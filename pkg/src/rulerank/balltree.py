"""Ball tree over augmented rule vectors and branch-and-bound pair search.

The search looks for the pair of rules whose indifference hyperplane passes
closest to a reference direction ``w_c``. Node pairs are expanded best-first,
keyed by the center-to-center hyperplane distance, and pruned with lower /
upper bounds on that distance over all point pairs drawn from two balls.

Two bound modes exist: ``paper`` evaluates fast closed-form estimates that
are cheap but not conservative in every configuration, while ``exact``
derives tight bounds from the cone of directions spanned by the Minkowski
difference of the two balls, and is the mode to use when the search must be
provably distance-optimal.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from itertools import count
from typing import Iterable, Literal

import numpy as np

BoundMode = Literal["paper", "exact"]


@dataclass
class BallNode:
    """A bounding ball over a subset of points; leaves carry point indices."""

    center: np.ndarray
    radius: float
    left: "BallNode | None" = None
    right: "BallNode | None" = None
    indices: list[int] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def leftmost_leaf(self) -> "BallNode":
        node = self
        while not node.is_leaf:
            node = node.left
        return node

    def leaves(self) -> Iterable["BallNode"]:
        stack = [self]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                yield node
            else:
                stack.append(node.right)
                stack.append(node.left)


def build(points: np.ndarray, leaf_capacity: int = 8, seed: int | None = None) -> BallNode:
    """Build a ball tree by recursive farthest-point partitioning.

    Pivots: a seeded random point, its farthest point a, then the farthest
    point b from a. Points go to the nearer pivot (ties to a); each node's
    ball is the centroid of its points with the max distance as radius.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ValueError("need a non-empty (n, D) point matrix")
    if leaf_capacity < 1:
        raise ValueError("leaf_capacity must be >= 1")
    rng = np.random.default_rng(seed)

    def make_node(indices: np.ndarray) -> BallNode:
        pts = points[indices]
        center = pts.mean(axis=0)
        radius = float(np.linalg.norm(pts - center, axis=1).max())
        node = BallNode(center=center, radius=radius)
        if len(indices) <= leaf_capacity:
            node.indices = [int(i) for i in indices]
            return node
        start = pts[rng.integers(len(indices))]
        a = pts[int(np.argmax(np.linalg.norm(pts - start, axis=1)))]
        b = pts[int(np.argmax(np.linalg.norm(pts - a, axis=1)))]
        to_a = np.linalg.norm(pts - a, axis=1)
        to_b = np.linalg.norm(pts - b, axis=1)
        mask_a = to_a <= to_b
        if mask_a.all() or not mask_a.any():
            # All points coincide with a pivot; no useful split exists.
            node.indices = [int(i) for i in indices]
            return node
        node.left = make_node(indices[mask_a])
        node.right = make_node(indices[~mask_a])
        return node

    return make_node(np.arange(points.shape[0]))


def tree_depth(node: BallNode) -> int:
    if node.is_leaf:
        return 1
    return 1 + max(tree_depth(node.left), tree_depth(node.right))


def pair_distance(w_c: np.ndarray, psi_i: np.ndarray, psi_j: np.ndarray) -> float:
    """Distance from ``w_c`` to the indifference hyperplane of a vector pair."""
    q = np.asarray(psi_i, dtype=float) - np.asarray(psi_j, dtype=float)
    norm = np.linalg.norm(q)
    if norm == 0:
        raise ValueError("identical vectors define no hyperplane")
    return abs(float(np.dot(w_c, q))) / norm


def bounds(
    ball1: tuple[np.ndarray, float],
    ball2: tuple[np.ndarray, float],
    w_c: np.ndarray,
    mode: BoundMode = "paper",
) -> tuple[float, float]:
    """Lower/upper bounds on pair_distance over all point pairs from two balls."""
    c1, r1 = ball1
    c2, r2 = ball2
    w_c = np.asarray(w_c, dtype=float)
    gamma = float(np.linalg.norm(w_c))
    if gamma <= 0:
        raise ValueError("reference direction must be non-zero")
    rho = float(r1) + float(r2)
    disp = np.asarray(c2, dtype=float) - np.asarray(c1, dtype=float)
    delta = float(np.dot(disp, w_c))
    if mode == "paper":
        return _paper_bounds(disp, rho, w_c, gamma, delta)
    if mode == "exact":
        return _exact_bounds(disp, rho, gamma, delta)
    raise ValueError(f"unknown bound mode {mode!r}")


def _paper_bounds(disp, rho, w_c, gamma, delta) -> tuple[float, float]:
    if abs(delta) <= rho * gamma:
        lb = 0.0
    else:
        den = float(np.linalg.norm(disp * gamma - rho * w_c))
        lb = gamma * abs(delta - rho * gamma) / den if den > 0 else 0.0
    if delta <= 0:
        den = float(np.linalg.norm(disp * gamma - rho * w_c))
        ub = gamma * abs(delta - rho * gamma) / den if den > 0 else gamma
    else:
        den = float(np.linalg.norm(disp * gamma + rho * w_c))
        ub = gamma * abs(delta + rho * gamma) / den if den > 0 else gamma
    return lb, ub


def _exact_bounds(disp, rho, gamma, delta) -> tuple[float, float]:
    # Directions of the difference vectors form a cone of half-angle
    # asin(rho/L) around disp; the distance is gamma*|cos(angle to w_c)|.
    L2 = float(np.dot(disp, disp))
    rho2 = rho * rho
    if abs(delta) <= rho * gamma:
        lb = 0.0
    else:
        lb = (abs(delta) * math.sqrt(max(L2 - rho2, 0.0))
              - rho * math.sqrt(max(gamma * gamma * L2 - delta * delta, 0.0))) / L2
        lb = max(lb, 0.0)
    sin_term = gamma * gamma * L2 - delta * delta
    if sin_term <= rho2 * gamma * gamma:
        ub = gamma
    else:
        ub = (abs(delta) * math.sqrt(max(L2 - rho2, 0.0))
              + rho * math.sqrt(sin_term)) / L2
        ub = min(ub, gamma)
    return lb, ub


@dataclass(order=True)
class HeapEntry:
    key: float
    lb: float
    seq: int
    nodes: tuple[BallNode, BallNode] = field(compare=False)
    ub: float = field(compare=False)


class _Heap:
    def __init__(self):
        self._entries: list[HeapEntry] = []
        self._counter = count()

    def push_entry(self, key, lb, nodes, ub):
        heapq.heappush(self._entries, HeapEntry(key, lb, next(self._counter), nodes, ub))

    def pop(self) -> HeapEntry:
        return heapq.heappop(self._entries)

    def __bool__(self) -> bool:
        return bool(self._entries)


def push(
    heap: _Heap,
    a: BallNode,
    b: BallNode,
    w_c: np.ndarray,
    tau: float,
    mode: BoundMode = "paper",
) -> None:
    """Insert a node pair unless its lower bound proves it cannot beat ``tau``.

    Pairs whose upper bound is already within ``tau`` get the sentinel key 0
    so they are popped next. Coinciding centers also key at 0.
    """
    lb, ub = bounds((a.center, a.radius), (b.center, b.radius), w_c, mode)
    if lb > tau:
        return
    if ub <= tau:
        heap.push_entry(0.0, lb, (a, b), ub)
        return
    try:
        c_s = pair_distance(w_c, a.center, b.center)
    except ValueError:
        c_s = 0.0
    heap.push_entry(c_s, lb, (a, b), ub)


def _children(node: BallNode) -> list[BallNode]:
    return [node] if node.is_leaf else [node.left, node.right]


def _first_distinct_pair(
    points: np.ndarray,
    a: BallNode,
    b: BallNode,
    exclude: frozenset[tuple[int, int]],
) -> tuple[int, int] | None:
    """First pair of non-identical vectors from the leftmost leaves of a and b."""
    la, lb_ = a.leftmost_leaf(), b.leftmost_leaf()
    if la is lb_:
        candidates = [
            (la.indices[i], la.indices[j])
            for i in range(len(la.indices))
            for j in range(i + 1, len(la.indices))
        ]
    else:
        candidates = [(i, j) for i in la.indices for j in lb_.indices]
    for i, j in candidates:
        if i == j:
            continue
        pair = (min(i, j), max(i, j))
        if pair in exclude:
            continue
        if np.array_equal(points[i], points[j]):
            continue
        return pair
    return None


def search_pair(
    root: BallNode,
    points: np.ndarray,
    w_c: np.ndarray,
    tau: float,
    mode: BoundMode = "paper",
    exclude: Iterable[tuple[int, int]] = (),
) -> tuple[tuple[int, int] | None, float]:
    """Best-first search for the point pair nearest the query hyperplane.

    Returns (pair, distance) with the pair index-ordered, or (None, inf) when
    no valid pair exists. With finite ``tau`` the search is satisficing: it
    stops as soon as some pair within ``tau`` is certain, without minimizing
    further. With ``tau = inf`` it runs to completion and, under exact
    bounds, returns the global minimum. ``exclude`` masks index pairs
    (e.g. already-asked queries).
    """
    points = np.asarray(points, dtype=float)
    w_c = np.asarray(w_c, dtype=float)
    satisficing = math.isfinite(tau)
    excluded = frozenset((min(i, j), max(i, j)) for i, j in exclude)

    def covers_pairs(a: BallNode, b: BallNode) -> bool:
        return a is not b or not a.is_leaf or len(a.indices) >= 2

    # Seeding with the root self-pair keeps coverage a strict partition at
    # every step: (X, X) splits into (X.l, X.l), (X.r, X.r), (X.l, X.r), so
    # pruning one entry never orphans pairs belonging to another.
    heap = _Heap()
    if covers_pairs(root, root):
        push(heap, root, root, w_c, tau, mode)

    best_pair: tuple[int, int] | None = None
    best = math.inf

    def leaf_eval(a: BallNode, b: BallNode):
        nonlocal best_pair, best
        if a is b:
            pairs = (
                (a.indices[i], a.indices[j])
                for i in range(len(a.indices))
                for j in range(i + 1, len(a.indices))
            )
        else:
            pairs = ((i, j) for i in a.indices for j in b.indices)
        for i, j in pairs:
            if i == j:
                continue
            pair = (min(i, j), max(i, j))
            if pair in excluded:
                continue
            q = points[pair[0]] - points[pair[1]]
            norm = float(np.linalg.norm(q))
            if norm == 0:
                continue
            dist = abs(float(np.dot(w_c, q))) / norm
            if dist < best or (dist == best and (best_pair is None or pair < best_pair)):
                best_pair, best = pair, dist

    while heap:
        entry = heap.pop()
        if satisficing and best <= tau:
            return best_pair, best
        if entry.lb > min(tau, best):
            continue
        a, b = entry.nodes
        if satisficing and entry.ub <= tau:
            pair = _first_distinct_pair(points, a, b, excluded)
            if pair is not None:
                return pair, pair_distance(w_c, points[pair[0]], points[pair[1]])
            # All leftmost-leaf pairs were masked or degenerate; keep
            # expanding so valid pairs elsewhere in these balls survive.
        if a.is_leaf and b.is_leaf:
            leaf_eval(a, b)
            continue
        target = min(tau, best)
        if a is b:
            for child in (a.left, a.right):
                if covers_pairs(child, child):
                    push(heap, child, child, w_c, target, mode)
            push(heap, a.left, a.right, w_c, target, mode)
        else:
            for ca in _children(a):
                for cb in _children(b):
                    push(heap, ca, cb, w_c, target, mode)
    return best_pair, best
