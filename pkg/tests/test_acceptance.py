"""Acceptance gate: one end-to-end check per numbered guarantee.

Every test prints a single ``criterion N: PASS/FAIL`` line directly to the
terminal (bypassing capture) so the whole gate can be read at a glance from
any pytest run. Failures still raise, so the gate cannot silently rot.
"""

import contextlib
import json
import math
import time

import numpy as np
from click.testing import CliRunner

from conftest import synth_fimi
from rulerank.balltree import bounds, build, pair_distance, search_pair
from rulerank.choquet import MobiusCapacity, SubsetIndex, choquet_eval
from rulerank.cli import cli
from rulerank.constraints import ConstraintSystem
from rulerank.corpus import ContingencyCounts
from rulerank.evalkit import precision_at_k
from rulerank.learner import SessionConfig, run_gbs
from rulerank.measures import MeasureKind, compute_measure
from rulerank.oracles import hidden_choquet_oracle, phi_oracle
from rulerank.versionspace import (
    chebyshev_center,
    init_version_space,
    minkowski_center,
    sample_feasible,
)


@contextlib.contextmanager
def gate(capsys, num, label):
    try:
        yield
    except BaseException:
        with capsys.disabled():
            print(f"criterion {num:2d}: FAIL  {label}")
        raise
    with capsys.disabled():
        print(f"criterion {num:2d}: PASS  {label}")


def ball_samples(rng, center, radius, n, dim):
    """Uniform samples from a euclidean ball."""
    g = rng.standard_normal((n, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    u = rng.random((n, 1)) ** (1.0 / dim)
    return center + radius * u * g


def brute_min_distance(points, w_c):
    """O(n^2) minimum hyperplane distance, skipping identical vectors."""
    best = math.inf
    for i in range(len(points) - 1):
        q = points[i] - points[i + 1:]
        norms = np.linalg.norm(q, axis=1)
        keep = norms > 0
        if keep.any():
            best = min(best, float(np.min(np.abs(q[keep] @ w_c) / norms[keep])))
    return best


def box_system(dim):
    rows = np.vstack([-np.eye(dim), np.eye(dim)])
    rhs = np.concatenate([np.zeros(dim), np.ones(dim)])
    return ConstraintSystem(dim, np.empty((0, dim)), np.empty(0), rows, rhs)


def grid_symmetry(vs, steps):
    """Brute-force central symmetry over a [0,1]^dim grid (oracle for the LP)."""
    axes = np.meshgrid(*([np.linspace(0.0, 1.0, steps)] * vs.dim), indexing="ij")
    pts = np.column_stack([a.ravel() for a in axes])
    vals = pts @ vs.ineq_coeffs.T
    feasible = np.all(vals <= vs.ineq_rhs + 1e-12, axis=1)
    pts, vals = pts[feasible], vals[feasible]
    delta = vals.min(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(vals - delta > 1e-12,
                       (vs.ineq_rhs - vals) / (vals - delta), np.inf)
    sym = np.minimum(lam.min(axis=1), 1.0)
    best = int(np.argmax(sym))
    return float(sym[best]), pts[best]


def test_01_exact_bounds_enclose_sampled_distances(capsys):
    label = "exact bounds enclose 10^5 sampled pair distances per fuzzed ball pair"
    with gate(capsys, 1, label):
        start = time.monotonic()
        rng = np.random.default_rng(101)
        dims = [3, 6, 15]
        for trial in range(200):
            dim = dims[trial % 3]
            c1 = rng.normal(0.0, 2.0, dim)
            c2 = c1 + rng.normal(0.0, 0.15, dim) if trial % 7 == 0 else rng.normal(0.0, 2.0, dim)
            r1 = float(rng.uniform(0.0, 2.0))
            r2 = float(rng.uniform(0.0, 2.0))
            w_c = rng.normal(0.0, 1.0, dim)
            lb, ub = bounds((c1, r1), (c2, r2), w_c, mode="exact")
            u = ball_samples(rng, c1, r1, 100_000, dim)
            v = ball_samples(rng, c2, r2, 100_000, dim)
            q = u - v
            norms = np.linalg.norm(q, axis=1)
            keep = norms > 1e-12
            dist = np.abs(q[keep] @ w_c) / norms[keep]
            assert dist.min() >= lb - 1e-9
            assert dist.max() <= ub + 1e-9
        assert time.monotonic() - start < 120.0


def test_02_degenerate_and_overlapping_ball_bounds(capsys):
    label = "point balls collapse both bounds to the pair distance; overlap zeroes the lower bound"
    with gate(capsys, 2, label):
        rng = np.random.default_rng(202)
        for _ in range(1000):
            dim = int(rng.integers(2, 16))
            c1 = rng.normal(0.0, 1.0, dim)
            c2 = rng.normal(0.0, 1.0, dim)
            if np.array_equal(c1, c2):
                c2 = c1 + 1.0
            w_c = rng.normal(0.0, 1.0, dim)
            lb, ub = bounds((c1, 0.0), (c2, 0.0), w_c, mode="paper")
            dist = pair_distance(w_c, c1, c2)
            assert abs(lb - dist) <= 1e-12
            assert abs(ub - dist) <= 1e-12
        hits = 0
        for _ in range(4000):
            dim = int(rng.integers(2, 16))
            c1 = rng.normal(0.0, 1.0, dim)
            c2 = c1 + rng.normal(0.0, 0.3, dim)
            r1 = float(rng.uniform(0.0, 1.5))
            r2 = float(rng.uniform(0.0, 1.5))
            w_c = rng.normal(0.0, 1.0, dim)
            gamma = float(np.linalg.norm(w_c))
            displacement = float(np.dot(c2 - c1, w_c))
            if abs(displacement) <= (r1 + r2) * gamma:
                hits += 1
                for mode in ("paper", "exact"):
                    lb, _ = bounds((c1, r1), (c2, r2), w_c, mode=mode)
                    assert lb == 0.0
        assert hits >= 1000  # the overlap condition must actually be exercised


def test_03_search_matches_exhaustive_minimum(capsys):
    label = "unbounded-threshold search equals the O(n^2) minimum on 20 seeded sets"
    with gate(capsys, 3, label):
        start = time.monotonic()
        for trial in range(20):
            rng = np.random.default_rng(300 + trial)
            n = int(rng.integers(50, 501))
            pts = rng.random((n, 15))
            if trial % 3 == 0:  # plant exact duplicates to exercise masking
                for src, dst in ((0, 5), (1, 17), (2, 2 + n // 2)):
                    pts[dst % n] = pts[src]
            w_c = rng.normal(0.0, 1.0, 15)
            root = build(pts, leaf_capacity=8, seed=trial)
            pair, dist = search_pair(root, pts, w_c, tau=math.inf, mode="exact")
            assert pair is not None
            assert abs(dist - brute_min_distance(pts, w_c)) <= 1e-9
        assert time.monotonic() - start < 60.0


def test_04_chebyshev_reference_polytopes(capsys):
    label = "largest-ball centers of hypercubes and the probability simplex"
    with gate(capsys, 4, label):
        for dim in range(2, 7):
            est = chebyshev_center(box_system(dim))
            assert np.allclose(est.point, 0.5, atol=1e-6)
            assert abs(est.radius - 0.5) <= 1e-6
        simplex = ConstraintSystem(2, np.ones((1, 2)), np.ones(1),
                                   -np.eye(2), np.zeros(2))
        est = chebyshev_center(simplex)
        assert np.allclose(est.point, [0.5, 0.5], atol=1e-6)
        assert abs(est.radius - 0.5) <= 1e-6


def test_05_minkowski_reference_polytopes(capsys):
    label = "symmetry centers of triangle and square, cross-checked by grid search"
    with gate(capsys, 5, label):
        triangle = ConstraintSystem(
            2, np.empty((0, 2)), np.empty(0),
            np.array([[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]]),
            np.array([0.0, 0.0, 1.0]),
        )
        for vs, want_sym, want_point in (
            (triangle, 0.5, (1.0 / 3.0, 1.0 / 3.0)),
            (box_system(2), 1.0, (0.5, 0.5)),
        ):
            est = minkowski_center(vs)
            assert abs(est.symmetry - want_sym) <= 1e-6
            assert np.allclose(est.point, want_point, atol=1e-6)
            grid_best, grid_arg = grid_symmetry(vs, 401)
            assert est.symmetry >= grid_best - 1e-9
            assert np.linalg.norm(grid_arg - est.point) <= 0.02


def test_06_choquet_expansion_and_monotonicity(capsys):
    label = "aggregation equals the subset-minimum expansion; monotone capacities rank monotonically"
    with gate(capsys, 6, label):
        rng = np.random.default_rng(606)
        for _ in range(200):
            d = int(rng.integers(2, 7))
            k = int(rng.integers(1, min(3, d) + 1))
            index = SubsetIndex(d, k)
            m = MobiusCapacity(index=index, coeffs=rng.normal(0.0, 1.0, index.size))
            for _ in range(50):
                f = rng.random(d)
                expected = sum(
                    coeff * min(f[i] for i in subset)
                    for coeff, subset in zip(m.coeffs, index.subsets)
                )
                assert abs(choquet_eval(m, f) - expected) <= 1e-12
        index = SubsetIndex(5, 2)
        caps = sample_feasible(init_version_space(index), 5, seed=66)
        for trial in range(1000):
            cap = MobiusCapacity(index=index, coeffs=caps[trial % len(caps)])
            f = rng.random(5)
            g = f + rng.random(5) * (1.0 - f)  # g >= f componentwise
            assert choquet_eval(cap, g) >= choquet_eval(cap, f) - 1e-9


def test_07_session_radius_and_constraint_invariants(capsys, mined_rules, fm):
    label = "logged query radius never grows; the hidden capacity satisfies every constraint"
    with gate(capsys, 7, label):
        results = []
        for seed, (d, k, n, selection) in enumerate([
            (4, 2, 60, "bnb"),
            (3, 1, 50, "random"),
            (5, 2, 80, "bnb"),
            (2, 2, 40, "random"),
        ]):
            rng = np.random.default_rng(700 + seed)
            features = rng.random((n, d))
            index = SubsetIndex(d, k)
            hidden = sample_feasible(init_version_space(index), 1, seed=700 + seed)[0]
            oracle = hidden_choquet_oracle(
                MobiusCapacity(index=index, coeffs=hidden), list(range(n)), features
            )
            cfg = SessionConfig(k=k, selection=selection, max_iterations=12, seed=seed)
            results.append((run_gbs(list(range(n)), features, oracle, cfg), hidden))
        kept_rules = [mined_rules[i] for i in fm.kept]
        cfg = SessionConfig(k=2, max_iterations=10, seed=77)
        results.append((run_gbs(kept_rules, fm.norm, phi_oracle(), cfg), None))
        for result, hidden in results:
            assert result.records, "session asked no queries at all"
            radii = [rec.r_max for rec in result.records]
            assert all(a >= b - 1e-12 for a, b in zip(radii, radii[1:]))
            if hidden is not None:
                assert result.constraints.violation(hidden) <= 1e-9


def test_08_guided_sessions_recover_hidden_top_rules(capsys):
    label = "guided questioning beats random at recovering a hidden top-10 (10 seeds)"
    with gate(capsys, 8, label):
        start = time.monotonic()
        n_rules, d, k, budget = 1000, 5, 2, 60
        index = SubsetIndex(d, k)
        base_vs = init_version_space(index)
        guided, baseline = [], []
        for seed in range(10):
            rng = np.random.default_rng(8000 + seed)
            features = rng.random((n_rules, d))
            hidden = MobiusCapacity(
                index=index, coeffs=sample_feasible(base_vs, 1, seed=8000 + seed)[0]
            )
            oracle_order = np.argsort(-hidden.scores(features), kind="stable").tolist()
            rules = list(range(n_rules))
            for selection, out in (("bnb", guided), ("random", baseline)):
                oracle = hidden_choquet_oracle(hidden, rules, features)
                cfg = SessionConfig(k=k, selection=selection,
                                    max_iterations=budget, seed=seed)
                result = run_gbs(rules, features, oracle, cfg)
                assert result.n_queries <= budget
                learned = np.argsort(-result.capacity.scores(features),
                                     kind="stable").tolist()
                out.append(precision_at_k(learned, oracle_order, 10))
        assert float(np.median(guided)) >= 0.8
        assert float(np.median(guided)) > float(np.median(baseline))
        assert time.monotonic() - start < 600.0


def test_09_measure_hand_values_and_ranges(capsys):
    label = "interestingness measures match hand-computed values and respect their ranges"
    with gate(capsys, 9, label):
        hand = ContingencyCounts(10, 5, 4, 3)
        expected = {
            "yules_q": 5.0 / 7.0,
            "cosine": 3.0 / math.sqrt(20.0),
            "gk_tau": 1.0 / 6.0,
            "added_value": 0.2,
            "certainty_factor": 1.0 / 3.0,
            "phi": 1.0 / math.sqrt(6.0),
        }
        assert set(expected) == {kind.value for kind in MeasureKind}
        for kind, value in expected.items():
            assert abs(compute_measure(hand, kind) - value) <= 1e-9
        rng = np.random.default_rng(909)
        for _ in range(10_000):
            n = int(rng.integers(1, 501))
            n_x = int(rng.integers(0, n + 1))
            n_y = int(rng.integers(0, n + 1))
            lo, hi = max(0, n_x + n_y - n), min(n_x, n_y)
            c = ContingencyCounts(n, n_x, n_y, int(rng.integers(lo, hi + 1)))
            for kind in MeasureKind:
                v = compute_measure(c, kind)
                assert math.isfinite(v)
                assert -1.0 - 1e-12 <= v <= 1.0 + 1e-12
                if kind in (MeasureKind.COSINE, MeasureKind.GK_TAU):
                    assert v >= -1e-12


def test_10_cli_runs_are_reproducible(capsys, tmp_path):
    label = "seeded mine+learn runs produce byte-identical capacities and matching logs"
    with gate(capsys, 10, label):
        runner = CliRunner()
        tx = tmp_path / "tx.dat"
        tx.write_text(synth_fimi(200, seed=3))
        rules_csv = tmp_path / "rules.csv"
        res = runner.invoke(cli, [
            "mine", "--input", str(tx), "--min-support", "15",
            "--min-confidence", "0.6", "--out", str(rules_csv),
        ])
        assert res.exit_code == 0, res.output
        out_dirs = []
        for name in ("first", "second"):
            out_dir = tmp_path / name
            res = runner.invoke(cli, [
                "learn", "--rules", str(rules_csv), "--oracle", "phi",
                "--seed", "7", "--iterations", "8", "--out-dir", str(out_dir),
            ])
            assert res.exit_code == 0, res.output
            out_dirs.append(out_dir)
        first, second = out_dirs
        assert (first / "capacity_0.json").read_bytes() == \
               (second / "capacity_0.json").read_bytes()

        def stripped_log(path):
            records = []
            for line in path.read_text().strip().splitlines():
                rec = json.loads(line)
                rec.pop("duration_s", None)  # wall time may differ between runs
                records.append(rec)
            return records

        log_a = stripped_log(first / "session_0.jsonl")
        log_b = stripped_log(second / "session_0.jsonl")
        assert log_a == log_b
        assert len(log_a) >= 1
